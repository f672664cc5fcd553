#include "mcopt/nnls.hpp"

#include <vector>

#include "mcopt/linalg.hpp"

namespace mcopt {

NnlsResult nnls(const Mat& c, const Vec& b, int max_iter) {
  const Eigen::Index n = c.cols();
  NnlsResult out;
  out.x = Vec::Zero(n);
  if (n == 0) {
    out.residual = b.norm();
    return out;
  }
  if (max_iter <= 0) max_iter = 30 * static_cast<int>(n) + 50;

  const double tol = 1e-12 * (1.0 + c.norm() * (1.0 + b.norm()));
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  Vec x = Vec::Zero(n);

  auto solve_passive = [&](Vec& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Mat cp(c.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) cp.col(static_cast<Eigen::Index>(k)) = c.col(idx[k]);
    const Vec zp = min_norm_solve(cp, b);
    z.setZero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Eigen::Index>(k));
  };

  int it = 0;
  while (it < max_iter) {
    const Vec w = c.transpose() * (b - c * x);
    Eigen::Index best = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > wmax) {
        wmax = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    Vec z;
    while (true) {
      ++it;
      solve_passive(z);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
      if (feasible || it >= max_iter) break;
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          const double denom = x(j) - z(j);
          if (denom > 0.0) alpha = std::min(alpha, x(j) / denom);
        }
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= 1e-15) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
    }
    x = z.cwiseMax(0.0);
    ++it;
  }
  out.x = x;
  out.residual = (b - c * x).norm();
  out.iterations = it;
  return out;
}

MixedNnlsResult mixed_nnls(const Mat& c_nonneg, const Mat& c_free, const Vec& b) {
  MixedNnlsResult out;
  const Eigen::Index m = b.size();
  // Projector onto range(c_free)^perp.
  Mat proj = Mat::Identity(m, m);
  if (c_free.cols() > 0) {
    const Mat q = range_basis(c_free, 1e-12);
    proj -= q * q.transpose();
  }
  const NnlsResult inner = nnls(proj * c_nonneg, proj * b);
  out.x_nonneg = inner.x;
  const Vec rest = b - c_nonneg * inner.x;
  out.x_free = c_free.cols() > 0 ? min_norm_solve(c_free, rest) : Vec(0);
  out.residual = (rest - (c_free.cols() > 0 ? Vec(c_free * out.x_free) : Vec::Zero(m))).norm();
  return out;
}

}  // namespace mcopt
