#include "mcopt/firstorder.hpp"

#include <cmath>

#include "mcopt/linalg.hpp"
#include "mcopt/lp.hpp"
#include "mcopt/nnls.hpp"

namespace mcopt {

bool check_transversality(const LocalModel& lm, double tol) {
  Mat aug(lm.n(), lm.m() + lm.k());
  aug.leftCols(lm.m()) = lm.G;
  aug.rightCols(lm.k()) = Mat::Identity(lm.n(), lm.k());
  return numerical_rank(aug, tol) == lm.n();
}

MfcqResult check_mfcq(const LocalModel& lm, double tol) {
  MfcqResult out;
  const int m = lm.m();
  const Mat ag = lm.A_I() * lm.G;
  const Mat wg = lm.A_E() * lm.G;
  out.rank_WG = numerical_rank(wg);
  if (out.rank_WG != lm.n() - lm.k()) return out;

  LinearProgram lp;
  lp.cost = Vec::Zero(m + 1);
  lp.cost(m) = -1.0;
  lp.A_ub = Mat(ag.rows(), m + 1);
  lp.A_ub << ag, Vec::Ones(ag.rows());
  lp.b_ub = Vec::Zero(ag.rows());
  lp.A_eq = Mat::Zero(wg.rows(), m + 1);
  lp.A_eq.leftCols(m) = wg;
  lp.b_eq = Vec::Zero(wg.rows());
  lp.lower = Vec::Constant(m + 1, -1.0);
  lp.upper = Vec::Constant(m + 1, 1.0);
  lp.lower(m) = -kInf;
  const LPResult r = solve_lp(lp);
  if (r.status != LPStatus::optimal) return out;
  out.margin = r.x(m);
  out.holds = out.margin > tol;
  if (!out.holds) return out;

  // Smallest l1 witness with (almost) the same margin.
  LinearProgram w;
  w.cost = Vec::Zero(2 * m);
  w.cost.tail(m).setOnes();
  w.A_ub = Mat::Zero(ag.rows() + 2 * m, 2 * m);
  w.A_ub.topLeftCorner(ag.rows(), m) = ag;
  w.A_ub.block(ag.rows(), 0, m, m) = Mat::Identity(m, m);
  w.A_ub.block(ag.rows(), m, m, m) = -Mat::Identity(m, m);
  w.A_ub.block(ag.rows() + m, 0, m, m) = -Mat::Identity(m, m);
  w.A_ub.block(ag.rows() + m, m, m, m) = -Mat::Identity(m, m);
  w.b_ub = Vec::Zero(ag.rows() + 2 * m);
  w.b_ub.head(ag.rows()).setConstant(-out.margin * (1.0 - 1e-6));
  w.A_eq = Mat::Zero(wg.rows(), 2 * m);
  w.A_eq.leftCols(m) = wg;
  w.b_eq = Vec::Zero(wg.rows());
  w.lower = Vec::Constant(2 * m, -1.0);
  w.upper = Vec::Constant(2 * m, 1.0);
  const LPResult rw = solve_lp(w);
  out.witness = rw.status == LPStatus::optimal ? Vec(rw.x.head(m)) : Vec(r.x.head(m));
  return out;
}

bool check_zkrcq(const LocalModel& lm, double) {
  const int m = lm.m();
  const int n = lm.n();
  LinearProgram lp;
  lp.cost = Vec::Zero(m + n);
  lp.A_eq = Mat::Zero(n + (n - lm.k()), m + n);
  lp.A_eq.topLeftCorner(n, m) = lm.G;
  lp.A_eq.topRightCorner(n, n) = -Mat::Identity(n, n);
  lp.A_eq.bottomRightCorner(n - lm.k(), n) = lm.A_E();
  lp.A_ub = Mat::Zero(lm.ell(), m + n);
  lp.A_ub.rightCols(n) = lm.A_I();
  lp.b_ub = Vec::Zero(lm.ell());
  for (int j = 0; j < n; ++j) {
    for (double sign : {1.0, -1.0}) {
      lp.b_eq = Vec::Zero(lp.A_eq.rows());
      lp.b_eq(j) = sign;
      if (solve_lp(lp).status != LPStatus::optimal) return false;
    }
  }
  return true;
}

bool check_licq(const LocalModel& lm, double tol) {
  const Mat bg = vstack(lm.A_I(), lm.A_E()) * lm.G;
  return numerical_rank(bg, tol) == lm.ell() + lm.n() - lm.k();
}

CQReport constraint_qualifications(const LocalModel& lm) {
  CQReport r;
  r.n = lm.n();
  r.k = lm.k();
  r.ell = lm.ell();
  r.transversal = check_transversality(lm);
  Mat aug(lm.n(), lm.m() + lm.k());
  aug.leftCols(lm.m()) = lm.G;
  aug.rightCols(lm.k()) = Mat::Identity(lm.n(), lm.k());
  r.rank_transversal = numerical_rank(aug);
  const MfcqResult mf = check_mfcq(lm);
  r.mfcq = mf.holds;
  r.mfcq_margin = mf.margin;
  if (mf.holds) r.mfcq_witness = mf.witness;
  r.rank_WG = mf.rank_WG;
  r.zkrcq = check_zkrcq(lm);
  r.licq = check_licq(lm);
  r.rank_BG = numerical_rank(vstack(lm.A_I(), lm.A_E()) * lm.G);
  return r;
}

bool check_transversality(const ProblemInstance& prob, const Point& p, const ChartChoice& choice) {
  return check_transversality(local_model(prob, p, choice));
}
MfcqResult check_mfcq(const ProblemInstance& prob, const Point& p, const ChartChoice& choice) {
  return check_mfcq(local_model(prob, p, choice));
}
bool check_zkrcq(const ProblemInstance& prob, const Point& p, const ChartChoice& choice) {
  return check_zkrcq(local_model(prob, p, choice));
}
bool check_licq(const ProblemInstance& prob, const Point& p, const ChartChoice& choice) {
  return check_licq(local_model(prob, p, choice));
}
CQReport constraint_qualifications(const ProblemInstance& prob, const Point& p, const ChartChoice& choice) {
  return constraint_qualifications(local_model(prob, p, choice));
}

KKTCertificate fit_multiplier(const LocalModel& lm, double tol_act) {
  const Mat ai = lm.A_I();
  const Mat ae = lm.A_E();
  const MixedNnlsResult r = mixed_nnls(lm.G.transpose() * ai.transpose(), lm.G.transpose() * ae.transpose(), -lm.grad);
  KKTCertificate c;
  c.lambda_I = r.x_nonneg;
  c.lambda_E = r.x_free;
  c.mu_chart = ai.transpose() * c.lambda_I + ae.transpose() * c.lambda_E;
  c.mu_frame = lm.J_N.transpose() * c.mu_chart;
  c.residual = (lm.grad + lm.G.transpose() * c.mu_chart).norm();
  c.grad_norm = lm.grad.norm();
  for (Eigen::Index j = 0; j < c.lambda_I.size(); ++j) c.strongly_active.push_back(c.lambda_I(j) > tol_act);
  c.row_ids = lm.adapted.row_ids;
  return c;
}

std::optional<KKTCertificate> solve_kkt(const LocalModel& lm, double tol, double tol_act) {
  KKTCertificate c = fit_multiplier(lm, tol_act);
  if (!c.is_kkt(tol)) return std::nullopt;
  return c;
}

std::optional<KKTCertificate> solve_kkt(const ProblemInstance& prob, const Point& p, double tol,
                                        const ChartChoice& choice) {
  auto c = solve_kkt(local_model(prob, p, choice), tol);
  if (c) c->choice = choice;
  return c;
}

MultiplierSetProbe multiplier_set_probe(const LocalModel& lm, const KKTCertificate& cert, double tol) {
  const Mat ci = lm.G.transpose() * lm.A_I().transpose();
  const Mat ce = lm.G.transpose() * lm.A_E().transpose();
  const int li = static_cast<int>(ci.cols());
  const int le = static_cast<int>(ce.cols());

  // Inequality multipliers that can leave zero inside the multiplier set.
  std::vector<int> movable;
  for (int j = 0; j < li; ++j) {
    if (cert.strongly_active[static_cast<std::size_t>(j)]) {
      movable.push_back(j);
      continue;
    }
    LinearProgram lp;
    lp.cost = Vec::Zero(li + le);
    lp.cost(j) = -1.0;
    lp.A_eq = Mat(ci.rows(), li + le);
    lp.A_eq << ci, ce;
    lp.b_eq = ci * cert.lambda_I + ce * cert.lambda_E;
    lp.lower = Vec::Constant(li + le, -kInf);
    lp.lower.head(li).setZero();
    lp.upper = Vec::Constant(li + le, kInf);
    lp.upper(j) = 1.0;
    const LPResult r = solve_lp(lp);
    if (r.status == LPStatus::optimal && r.x(j) > tol) movable.push_back(j);
  }
  Mat c(ci.rows(), static_cast<Eigen::Index>(movable.size()) + le);
  for (std::size_t i = 0; i < movable.size(); ++i) c.col(static_cast<Eigen::Index>(i)) = ci.col(movable[i]);
  if (le > 0) c.rightCols(le) = ce;
  MultiplierSetProbe out;
  out.dim_estimate = static_cast<int>(c.cols()) - numerical_rank(c);
  out.unique = out.dim_estimate == 0;
  return out;
}

ClassicalKKT classical_report(const KKTCertificate& cert, const ProblemInstance& prob, const Point& p) {
  if (!prob.euclidean_nlp) throw ModelMismatch("classical_report needs a Euclidean NLP model");
  ClassicalKKT out;
  out.eta_I = cert.mu_frame.head(prob.n_I);
  out.eta_E = cert.mu_frame.tail(prob.n_E);
  const Vec gx = prob.g(p).x;
  const Vec gi = gx.head(prob.n_I);
  for (int i = 0; i < prob.n_I; ++i) out.active.push_back(gi(i) >= -Tolerances::feasibility);
  const Vec grad = frame_gradient(prob, p);
  const Mat jac = frame_jacobian(prob, p);
  out.stationarity = (grad + jac.transpose() * cert.mu_frame).norm();
  out.complementarity = prob.n_I > 0 ? out.eta_I.cwiseProduct(gi).cwiseAbs().maxCoeff() : 0.0;
  return out;
}

}  // namespace mcopt
