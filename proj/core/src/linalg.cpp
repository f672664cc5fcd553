#include "mcopt/linalg.hpp"

namespace mcopt {

namespace {

int rank_from_singular_values(const Vec& s, double rel) {
  if (s.size() == 0) return 0;
  const double smax = s(0);
  if (!(smax > 0.0)) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel * smax) ++r;
  }
  return r;
}

}  // namespace

int numerical_rank(const Mat& a, double rel) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  return rank_from_singular_values(svd.singularValues(), rel);
}

Mat null_space(const Mat& a, double rel) {
  const Eigen::Index n = a.cols();
  if (a.rows() == 0) return Mat::Identity(n, n);
  if (n == 0) return Mat(0, 0);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const int r = rank_from_singular_values(svd.singularValues(), rel);
  return svd.matrixV().rightCols(n - r);
}

Mat range_basis(const Mat& a, double rel) {
  if (a.rows() == 0 || a.cols() == 0) return Mat(a.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU);
  const int r = rank_from_singular_values(svd.singularValues(), rel);
  return svd.matrixU().leftCols(r);
}

Vec min_norm_solve(const Mat& a, const Vec& b) {
  if (a.cols() == 0) return Vec(0);
  if (a.rows() == 0) return Vec::Zero(a.cols());
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
  cod.setThreshold(1e-12);
  return cod.solve(b);
}

Mat vstack(const Mat& top, const Mat& bottom) {
  const Eigen::Index cols = top.rows() > 0 ? top.cols() : bottom.cols();
  Mat out(top.rows() + bottom.rows(), cols);
  if (top.rows() > 0) out.topRows(top.rows()) = top;
  if (bottom.rows() > 0) out.bottomRows(bottom.rows()) = bottom;
  return out;
}

namespace numdiff {

Mat jacobian(const VectorMap& map, const Vec& x, double h) {
  const Eigen::Index n = x.size();
  Mat jac;
  for (Eigen::Index j = 0; j < n; ++j) {
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    const Vec col = (map(xp) - map(xm)) / (2.0 * h);
    if (j == 0) jac.resize(col.size(), n);
    jac.col(j) = col;
  }
  if (n == 0) jac.resize(map(x).size(), 0);
  return jac;
}

Vec gradient(const ScalarMap& map, const Vec& x, double h) {
  Vec g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    g(j) = (map(xp) - map(xm)) / (2.0 * h);
  }
  return g;
}

Mat hessian(const ScalarMap& map, const Vec& x, double h) {
  const Eigen::Index n = x.size();
  Mat hess(n, n);
  const double f0 = map(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec xp = x, xm = x;
    xp(i) += 2.0 * h;
    xm(i) -= 2.0 * h;
    hess(i, i) = (map(xp) - 2.0 * f0 + map(xm)) / (4.0 * h * h);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Vec pp = x, pm = x, mp = x, mm = x;
      pp(i) += h; pp(j) += h;
      pm(i) += h; pm(j) -= h;
      mp(i) -= h; mp(j) += h;
      mm(i) -= h; mm(j) -= h;
      hess(i, j) = hess(j, i) = (map(pp) - map(pm) - map(mp) + map(mm)) / (4.0 * h * h);
    }
  }
  return hess;
}

Vec second_directional(const VectorMap& map, const Vec& x, const Vec& v, double h) {
  return (map(x + h * v) - 2.0 * map(x) + map(x - h * v)) / (h * h);
}

}  // namespace numdiff

}  // namespace mcopt
