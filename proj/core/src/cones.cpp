#include "mcopt/cones.hpp"

#include <algorithm>
#include <cmath>

#include "mcopt/linalg.hpp"
#include "mcopt/lp.hpp"
#include "mcopt/nnls.hpp"

namespace mcopt {

namespace {

Mat fit_rows(const Mat& a, int dim) {
  if (a.rows() == 0) return Mat(0, dim);
  if (a.cols() != dim) throw DimensionMismatch("cone row length does not match the dimension");
  return a;
}

Mat select_rows(const Mat& a, const std::vector<int>& rows) {
  Mat out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = a.row(rows[i]);
  return out;
}

}  // namespace

PolyhedralCone::PolyhedralCone(int dim, Mat a_ineq, Mat a_eq, std::vector<int> ineq_ids)
    : dim_(dim), a_i_(fit_rows(a_ineq, dim)), a_e_(fit_rows(a_eq, dim)), ids_(std::move(ineq_ids)) {
  if (ids_.empty()) {
    for (int j = 0; j < n_ineq(); ++j) ids_.push_back(j);
  }
  if (static_cast<int>(ids_.size()) != n_ineq()) throw DimensionMismatch("one id per inequality row required");
}

PolyhedralCone PolyhedralCone::whole_space(int dim) { return PolyhedralCone(dim, Mat(0, dim), Mat(0, dim)); }

bool contains(const PolyhedralCone& c, const Vec& v, double tol) {
  if (v.size() != c.dim()) throw DimensionMismatch("vector length does not match the cone dimension");
  const double scale = tol * (1.0 + v.norm());
  if (c.n_ineq() > 0 && (c.A_I() * v).maxCoeff() > scale) return false;
  if (c.n_eq() > 0 && (c.A_E() * v).lpNorm<Eigen::Infinity>() > scale) return false;
  return true;
}

PolarResult polar_contains(const PolyhedralCone& c, const Vec& mu, double tol) {
  if (mu.size() != c.dim()) throw DimensionMismatch("covector length does not match the cone dimension");
  if (tol < 0.0) tol = Tolerances::polar * (1.0 + mu.norm());
  const MixedNnlsResult r = mixed_nnls(c.A_I().transpose(), c.A_E().transpose(), mu);
  PolarResult out;
  out.certificate.lambda_I = r.x_nonneg;
  out.certificate.lambda_E = r.x_free;
  out.certificate.residual = r.residual;
  out.member = r.residual <= tol;
  return out;
}

PolyhedralCone face(const PolyhedralCone& c, const std::vector<int>& active) {
  std::vector<bool> moved(static_cast<std::size_t>(c.n_ineq()), false);
  for (int j : active) {
    if (j < 0 || j >= c.n_ineq()) throw IndexOutOfRange("face: inequality row " + std::to_string(j));
    moved[static_cast<std::size_t>(j)] = true;
  }
  std::vector<int> keep, eq;
  std::vector<int> ids;
  for (int j = 0; j < c.n_ineq(); ++j) {
    if (moved[static_cast<std::size_t>(j)]) {
      eq.push_back(j);
    } else {
      keep.push_back(j);
      ids.push_back(c.ineq_ids()[static_cast<std::size_t>(j)]);
    }
  }
  return PolyhedralCone(c.dim(), select_rows(c.A_I(), keep), vstack(c.A_E(), select_rows(c.A_I(), eq)), ids);
}

std::vector<int> implicit_equalities(const PolyhedralCone& c, double tol) {
  std::vector<int> out;
  if (c.n_ineq() == 0) return out;
  LinearProgram lp;
  lp.A_ub = c.A_I();
  lp.b_ub = Vec::Zero(c.n_ineq());
  lp.A_eq = c.A_E();
  lp.b_eq = Vec::Zero(c.n_eq());
  lp.lower = Vec::Constant(c.dim(), -1.0);
  lp.upper = Vec::Constant(c.dim(), 1.0);
  for (int j = 0; j < c.n_ineq(); ++j) {
    lp.cost = c.A_I().row(j).transpose();
    const LPResult r = solve_lp(lp);
    if (r.status == LPStatus::optimal && -r.value <= tol * (1.0 + c.A_I().row(j).norm())) out.push_back(j);
  }
  return out;
}

PolyhedralCone canonical(const PolyhedralCone& c, double tol) { return face(c, implicit_equalities(c, tol)); }

bool is_subspace(const PolyhedralCone& c, double tol) { return canonical(c, tol).n_ineq() == 0; }

Mat span_basis(const PolyhedralCone& c, double tol) {
  const PolyhedralCone cc = canonical(c, tol);
  return null_space(cc.A_E());
}

namespace {

// Rays of the pointed, full-dimensional cone {y : a y <= 0} (rows unit length).
std::vector<Vec> double_description(const Mat& a) {
  const Eigen::Index d = a.cols();
  const Eigen::Index m = a.rows();
  const double eps = 1e-10;

  // Initial simplicial cone from d independent rows.
  Eigen::ColPivHouseholderQR<Mat> qr(a.transpose());
  std::vector<int> processed;
  for (Eigen::Index i = 0; i < d; ++i) processed.push_back(static_cast<int>(qr.colsPermutation().indices()(i)));
  const Mat sub = select_rows(a, processed);
  const Mat inv = sub.inverse();
  std::vector<Vec> rays;
  for (Eigen::Index i = 0; i < d; ++i) rays.push_back((-inv.col(i)).normalized());

  std::vector<bool> done(static_cast<std::size_t>(m), false);
  for (int r : processed) done[static_cast<std::size_t>(r)] = true;
  std::sort(processed.begin(), processed.end());

  auto active_rows = [&](const Vec& r) {
    std::vector<int> z;
    for (int i : processed)
      if (std::abs(a.row(i).dot(r)) <= eps) z.push_back(i);
    return z;
  };

  for (Eigen::Index row = 0; row < m; ++row) {
    if (done[static_cast<std::size_t>(row)]) continue;
    const Vec arow = a.row(row).transpose();
    std::vector<Vec> neg, pos, zero;
    for (const Vec& r : rays) {
      const double s = arow.dot(r);
      if (s > eps)
        pos.push_back(r);
      else if (s < -eps)
        neg.push_back(r);
      else
        zero.push_back(r);
    }
    std::vector<Vec> next = neg;
    next.insert(next.end(), zero.begin(), zero.end());
    for (const Vec& rn : d >= 2 ? neg : std::vector<Vec>{}) {
      const std::vector<int> zn = active_rows(rn);
      for (const Vec& rp : pos) {
        const std::vector<int> zp = active_rows(rp);
        std::vector<int> common;
        std::set_intersection(zn.begin(), zn.end(), zp.begin(), zp.end(), std::back_inserter(common));
        if (static_cast<Eigen::Index>(common.size()) < d - 2) continue;
        if (numerical_rank(select_rows(a, common), 1e-9) != d - 2) continue;
        const Vec combo = arow.dot(rp) * rn - arow.dot(rn) * rp;
        next.push_back(combo.normalized());
      }
    }
    processed.push_back(static_cast<int>(row));
    std::sort(processed.begin(), processed.end());
    done[static_cast<std::size_t>(row)] = true;
    rays = std::move(next);
  }
  return rays;
}

}  // namespace

RayDecomposition extreme_rays(const PolyhedralCone& c, int max_dim) {
  RayDecomposition out;
  const PolyhedralCone cc = canonical(c);
  const Mat l = null_space(cc.A_E());
  if (l.cols() == 0) {
    out.lineality = Mat(c.dim(), 0);
    return out;
  }
  const Mat ar = cc.A_I() * l;
  const Mat lin = ar.rows() > 0 ? null_space(ar) : Mat::Identity(l.cols(), l.cols());
  out.lineality = l * lin;
  if (lin.cols() == l.cols()) return out;

  // Orthogonal complement of the lineality inside the reduced space.
  Mat p;
  if (lin.cols() == 0) {
    p = Mat::Identity(l.cols(), l.cols());
  } else {
    p = null_space(lin.transpose());
  }
  Mat a = ar * p;
  std::vector<int> nonzero;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double n = a.row(i).norm();
    if (n > 1e-12) {
      a.row(i) /= n;
      nonzero.push_back(static_cast<int>(i));
    }
  }
  a = select_rows(a, nonzero);
  // Only the pointed part goes through double description.
  if (a.cols() > max_dim) throw DimensionTooLarge("extreme_rays: pointed dimension " + std::to_string(a.cols()));
  for (const Vec& y : double_description(a)) out.rays.push_back((l * (p * y)).normalized());
  return out;
}

PolyhedralCone transport(const PolyhedralCone& c, const Mat& j) {
  if (j.rows() != c.dim() || j.cols() != c.dim()) throw DimensionMismatch("transport: Jacobian shape");
  const Eigen::PartialPivLU<Mat> lu(j);
  const Mat jinv = lu.inverse();
  return PolyhedralCone(c.dim(), c.A_I() * jinv, c.A_E() * jinv, c.ineq_ids());
}

std::vector<Vec> sample_cone(const RayDecomposition& rd, int dim, int count, std::mt19937_64& rng) {
  std::vector<Vec> out;
  std::exponential_distribution<double> ex(1.0);
  std::normal_distribution<double> nd;
  std::bernoulli_distribution keep(0.6);
  for (int s = 0; s < count; ++s) {
    Vec v = Vec::Zero(dim);
    for (const Vec& r : rd.rays)
      if (keep(rng)) v += ex(rng) * r;
    for (Eigen::Index j = 0; j < rd.lineality.cols(); ++j) v += nd(rng) * rd.lineality.col(j);
    out.push_back(v);
  }
  return out;
}

std::vector<Vec> sample_cone(const PolyhedralCone& c, int count, std::mt19937_64& rng) {
  return sample_cone(extreme_rays(c), c.dim(), count, rng);
}

}  // namespace mcopt
