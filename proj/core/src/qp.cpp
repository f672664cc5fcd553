#include "mcopt/qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mcopt/linalg.hpp"
#include "mcopt/lp.hpp"

namespace mcopt {

namespace {

Mat rows_of(const Mat& a, const std::vector<int>& idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), a.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = a.row(idx[i]);
  return out;
}

}  // namespace

QPResult solve_qp(const QPProblem& qp, int max_iter) {
  const Eigen::Index n = qp.g.size();
  const Mat a_i = qp.A_I.rows() > 0 ? qp.A_I : Mat(0, n);
  const Mat a_e = qp.A_E.rows() > 0 ? qp.A_E : Mat(0, n);
  const Eigen::Index mi = a_i.rows();

  Vec v = Vec::Zero(n);
  const bool zero_feasible = (mi == 0 || (a_i * v - qp.b_I).maxCoeff() <= 0.0) &&
                             (a_e.rows() == 0 || qp.b_E.lpNorm<Eigen::Infinity>() == 0.0);
  if (!zero_feasible) {
    LinearProgram lp;
    lp.cost = Vec::Zero(n);
    lp.A_ub = a_i;
    lp.b_ub = qp.b_I;
    lp.A_eq = a_e;
    lp.b_eq = qp.b_E;
    const LPResult r = solve_lp(lp);
    if (r.status != LPStatus::optimal) throw QPInfeasible("QP constraints are infeasible");
    v = r.x;
  }

  QPResult out;
  Mat h = 0.5 * (qp.H + qp.H.transpose());
  const double hscale = 1.0 + h.norm();

  std::vector<int> work;
  for (Eigen::Index i = 0; i < mi; ++i) {
    if (std::abs(a_i.row(i).dot(v) - qp.b_I(i)) <= 1e-10 * (1.0 + std::abs(qp.b_I(i)))) {
      std::vector<int> trial = work;
      trial.push_back(static_cast<int>(i));
      const Mat aw = vstack(a_e, rows_of(a_i, trial));
      if (numerical_rank(aw) == aw.rows()) work = trial;
    }
  }

  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    const Mat aw = vstack(a_e, rows_of(a_i, work));
    const Vec r = h * v + qp.g;
    const Mat z = null_space(aw);
    Vec p = Vec::Zero(n);
    if (z.cols() > 0) {
      const Mat hr = z.transpose() * h * z;
      const Eigen::SelfAdjointEigenSolver<Mat> es(hr);
      const double lmin = es.eigenvalues()(0);
      if (lmin <= 1e-10 * hscale) {
        const double delta = -lmin + 1e-6 * hscale;
        h += delta * Mat::Identity(n, n);
        out.shift += delta;
        out.convexified = true;
        continue;
      }
      p = z * es.eigenvectors() * (es.eigenvalues().cwiseInverse().asDiagonal() *
                                   (es.eigenvectors().transpose() * (-(z.transpose() * r))));
    }
    if (p.norm() <= 1e-12 * (1.0 + v.norm())) {
      const Vec lambda = aw.rows() > 0 ? min_norm_solve(aw.transpose(), -r) : Vec(0);
      const Vec li = lambda.tail(static_cast<Eigen::Index>(work.size()));
      Eigen::Index worst = -1;
      double wval = -1e-12 * hscale;
      for (Eigen::Index j = 0; j < li.size(); ++j) {
        if (li(j) < wval) {
          wval = li(j);
          worst = j;
        }
      }
      if (worst < 0) {
        out.v = v;
        out.lambda_I = Vec::Zero(mi);
        for (std::size_t j = 0; j < work.size(); ++j)
          out.lambda_I(work[j]) = std::max(0.0, li(static_cast<Eigen::Index>(j)));
        out.lambda_E = lambda.head(a_e.rows());
        return out;
      }
      work.erase(work.begin() + worst);
      continue;
    }
    double alpha = 1.0;
    int blocking = -1;
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (std::find(work.begin(), work.end(), static_cast<int>(i)) != work.end()) continue;
      const double ap = a_i.row(i).dot(p);
      if (ap > 1e-14 * (1.0 + p.norm())) {
        const double t = std::max(0.0, (qp.b_I(i) - a_i.row(i).dot(v)) / ap);
        if (t < alpha) {
          alpha = t;
          blocking = static_cast<int>(i);
        }
      }
    }
    v += alpha * p;
    if (blocking >= 0) work.push_back(blocking);
  }
  throw QPInfeasible("QP active-set iteration limit reached");
}

Vec elastic_step(const QPProblem& qp, double radius) {
  const Eigen::Index n = qp.g.size();
  const Eigen::Index mi = qp.A_I.rows();
  const Eigen::Index me = qp.A_E.rows();
  const Eigen::Index nv = n + mi + 2 * me;

  LinearProgram lp;
  lp.cost = Vec::Zero(nv);
  lp.cost.tail(mi + 2 * me).setOnes();
  lp.A_ub = Mat::Zero(mi, nv);
  if (mi > 0) {
    lp.A_ub.leftCols(n) = qp.A_I;
    lp.A_ub.block(0, n, mi, mi) = -Mat::Identity(mi, mi);
  }
  lp.b_ub = qp.b_I;
  lp.A_eq = Mat::Zero(me, nv);
  if (me > 0) {
    lp.A_eq.leftCols(n) = qp.A_E;
    lp.A_eq.block(0, n + mi, me, me) = -Mat::Identity(me, me);
    lp.A_eq.block(0, n + mi + me, me, me) = Mat::Identity(me, me);
  }
  lp.b_eq = qp.b_E;
  lp.lower = Vec::Zero(nv);
  lp.lower.head(n).setConstant(-radius);
  lp.upper = Vec::Constant(nv, kInf);
  lp.upper.head(n).setConstant(radius);
  const LPResult r = solve_lp(lp);
  if (r.status != LPStatus::optimal) return Vec::Zero(n);

  // Among violation minimizers, the one with the smallest |v|_1.
  LinearProgram l2 = lp;
  const Eigen::Index nt = nv + n;
  l2.cost = Vec::Zero(nt);
  l2.cost.tail(n).setOnes();
  Mat ub = Mat::Zero(mi + 2 * n + 1, nt);
  Vec bub = Vec::Zero(mi + 2 * n + 1);
  if (mi > 0) {
    ub.topLeftCorner(mi, nv) = lp.A_ub;
    bub.head(mi) = lp.b_ub;
  }
  ub.block(mi, 0, n, n) = Mat::Identity(n, n);
  ub.block(mi, nv, n, n) = -Mat::Identity(n, n);
  ub.block(mi + n, 0, n, n) = -Mat::Identity(n, n);
  ub.block(mi + n, nv, n, n) = -Mat::Identity(n, n);
  ub.block(mi + 2 * n, 0, 1, nv) = lp.cost.transpose();
  bub(mi + 2 * n) = r.value + 1e-9 * (1.0 + r.value);
  l2.A_ub = ub;
  l2.b_ub = bub;
  l2.A_eq = Mat::Zero(me, nt);
  if (me > 0) l2.A_eq.leftCols(nv) = lp.A_eq;
  l2.lower = Vec::Zero(nt);
  l2.lower.head(nv) = lp.lower;
  l2.upper = Vec::Constant(nt, kInf);
  l2.upper.head(nv) = lp.upper;
  const LPResult r2 = solve_lp(l2);
  return r2.status == LPStatus::optimal ? Vec(r2.x.head(n)) : Vec(r.x.head(n));
}

}  // namespace mcopt
