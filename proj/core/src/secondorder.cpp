#include "mcopt/secondorder.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mcopt/linalg.hpp"
#include "mcopt/lp.hpp"

namespace mcopt {

double PulledBackProblem::f_bar(const Vec& v) const { return problem->f(retraction(v)); }

Vec PulledBackProblem::g_bar(const Vec& v) const { return linmap(problem->g(retraction(v))); }

PulledBackProblem pull_back(const ProblemPtr& prob, const Point& p, const std::string& retraction_kind,
                            const std::string& linmap) {
  const std::string rk = retraction_kind.empty() ? prob->M->retraction_kinds().front() : retraction_kind;
  const Point q = prob->g(p);
  PulledBackProblem pb{prob,
                       p,
                       q,
                       prob->M->retraction(p, rk),
                       make_linearizing_map(*prob, q, linmap),
                       rk,
                       linmap,
                       PolyhedralCone()};
  if (pb.linmap.adapted()) {
    pb.cone_bar = *pb.linmap.adapted_to();
  } else {
    const AdaptedChartData d = prob->K->adapted_chart(q);
    pb.cone_bar = transport(d.cone(), prob->N->frame_to_chart(d.chart).inverse());
  }
  return pb;
}

double lagrangian_value(const PulledBackProblem& pb, const Vec& v, const Vec& mu_frame) {
  return pb.f_bar(v) + mu_frame.dot(pb.g_bar(v));
}

Vec lagrangian_gradient(const PulledBackProblem& pb, const Vec& mu_frame, double h) {
  return numdiff::gradient([&](const Vec& v) { return lagrangian_value(pb, v, mu_frame); },
                           Vec::Zero(pb.retraction.dim()), h);
}

HessianForm lagrangian_hessian(const PulledBackProblem& pb, const Vec& mu_frame, const HessianOptions& opts) {
  const int m = pb.retraction.dim();
  const Vec zero = Vec::Zero(m);
  const Vec grad_l = lagrangian_gradient(pb, mu_frame);
  const Vec grad_f = numdiff::gradient([&](const Vec& v) { return pb.f_bar(v); }, zero);
  if (grad_l.norm() > opts.stationarity_tol * (1.0 + grad_f.norm()))
    throw NotStationary("pulled-back Lagrangian gradient " + std::to_string(grad_l.norm()) + " at the base point");

  HessianForm hf;
  hf.base = pb.base;
  hf.chart_id = "frame:" + pb.retraction_kind + "/" + pb.linmap_name;
  if (opts.prefer_analytic && pb.problem->analytic_hessian) {
    if (auto a = pb.problem->analytic_hessian(pb.base, pb.retraction_kind, pb.linmap_name, mu_frame)) {
      hf.matrix = 0.5 * (*a + a->transpose());
      hf.analytic = true;
      return hf;
    }
  }
  auto l = [&](const Vec& v) { return lagrangian_value(pb, v, mu_frame); };
  const Mat h1 = numdiff::hessian(l, zero, opts.h);
  const Mat h2 = numdiff::hessian(l, zero, 0.5 * opts.h);
  const Mat r = (4.0 * h2 - h1) / 3.0;
  hf.matrix = 0.5 * (r + r.transpose());
  hf.richardson_gap = m > 0 ? (h1 - h2).cwiseAbs().maxCoeff() : 0.0;
  hf.ill_conditioned = hf.richardson_gap > opts.ill_conditioning_gap;
  return hf;
}

CriticalCone critical_cone(const LocalModel& lm, const KKTCertificate& cert, double tol_act) {
  if (cert.lambda_I.size() != lm.ell() || cert.lambda_E.size() != lm.n() - lm.k())
    throw InvalidCertificate("certificate does not match the local model");
  if (cert.lambda_I.size() > 0 && cert.lambda_I.minCoeff() < 0.0)
    throw InvalidCertificate("negative inequality multiplier");
  if (!cert.is_kkt(1e-6)) throw InvalidCertificate("certificate residual too large");

  CriticalCone cc;
  const PolyhedralCone lin = linearizing_cone(lm);
  cc.cone_M = PolyhedralCone(lm.m(), lin.A_I(), vstack(lin.A_E(), lm.grad.transpose()), lin.ineq_ids());
  cc.cone_M_frame = transport(cc.cone_M, lm.J_M.inverse());

  std::vector<int> strong;
  for (int j = 0; j < lm.ell(); ++j)
    if (cert.lambda_I(j) > tol_act) strong.push_back(j);
  cc.cone_M_mult = face(lin, strong);
  cc.cone_N = face(lm.adapted.cone(), strong);
  cc.cone_N_frame = transport(cc.cone_N, lm.J_N.inverse());
  return cc;
}

InvarianceReport invariance_check(const LocalModel& lm, const KKTCertificate& cert, const PulledBackProblem& pb1,
                                  const PulledBackProblem& pb2, double tol, int samples, std::uint64_t seed,
                                  const HessianOptions& opts) {
  InvarianceReport rep;
  rep.both_adapted = pb1.linmap.adapted() && pb2.linmap.adapted();
  rep.h1 = lagrangian_hessian(pb1, cert.mu_frame, opts);
  rep.h2 = lagrangian_hessian(pb2, cert.mu_frame, opts);
  const CriticalCone cc = critical_cone(lm, cert);
  std::mt19937_64 rng(seed);
  for (Vec v : sample_cone(cc.cone_M_frame, samples, rng)) {
    if (v.norm() < 1e-12) continue;
    v.normalize();
    rep.on_cone_max = std::max(rep.on_cone_max, std::abs(rep.h1(v) - rep.h2(v)));
    ++rep.on_cone_samples;
  }
  std::normal_distribution<double> nd;
  const int m = static_cast<int>(rep.h1.matrix.rows());
  for (int s = 0; s < samples; ++s) {
    Vec v(m);
    for (int i = 0; i < m; ++i) v(i) = nd(rng);
    if (v.norm() < 1e-12) continue;
    v.normalize();
    rep.off_cone_max = std::max(rep.off_cone_max, std::abs(rep.h1(v) - rep.h2(v)));
    ++rep.off_cone_samples;
  }
  rep.pass = rep.on_cone_max <= tol;
  return rep;
}

Vec theta_second_derivative(const LinearizingMap& lm1, const LinearizingMap& lm2, const Vec& v, double h) {
  auto theta = [&](const Vec& w) { return lm1(lm2.inverse(w)); };
  return numdiff::second_directional(theta, Vec::Zero(lm2.dim()), v, h);
}

ConsistencyReport second_order_consistent(const LinearizingMap& lm1, const LinearizingMap& lm2, double h,
                                          double tol) {
  if (!lm2.has_inverse()) throw DomainError("second linearizing map has no inverse");
  if ((lm1.base().x - lm2.base().x).norm() > 1e-10) throw DomainError("linearizing maps have different base points");
  const int n = lm2.dim();
  std::vector<Vec> diag;
  for (int i = 0; i < n; ++i) diag.push_back(theta_second_derivative(lm1, lm2, Vec::Unit(n, i), h));
  ConsistencyReport rep;
  for (int i = 0; i < n; ++i) {
    rep.second_derivative_norm = std::max(rep.second_derivative_norm, diag[static_cast<std::size_t>(i)].norm());
    for (int j = i + 1; j < n; ++j) {
      const Vec both = theta_second_derivative(lm1, lm2, Vec::Unit(n, i) + Vec::Unit(n, j), h);
      const Vec mixed = 0.5 * (both - diag[static_cast<std::size_t>(i)] - diag[static_cast<std::size_t>(j)]);
      rep.second_derivative_norm = std::max(rep.second_derivative_norm, mixed.norm());
    }
  }
  rep.consistent = rep.second_derivative_norm <= tol;
  return rep;
}

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::holds:
      return "holds";
    case VerdictKind::fails:
      return "fails";
    case VerdictKind::inconclusive:
      break;
  }
  return "inconclusive";
}

namespace {

// Some nonzero c with b c <= 0, if one exists.
std::optional<Vec> nonzero_in_cone(const Mat& b, int dim) {
  if (b.rows() == 0) return Vec(Vec::Unit(dim, 0));
  LinearProgram lp;
  lp.A_ub = b;
  lp.b_ub = Vec::Zero(b.rows());
  lp.lower = Vec::Constant(dim, -1.0);
  lp.upper = Vec::Constant(dim, 1.0);
  for (int j = 0; j < dim; ++j) {
    for (double sign : {1.0, -1.0}) {
      lp.cost = Vec::Zero(dim);
      lp.cost(j) = -sign;
      const LPResult r = solve_lp(lp);
      if (r.status == LPStatus::optimal && -r.value > 1e-9) return r.x;
    }
  }
  return std::nullopt;
}

}  // namespace

ConeQuadraticMin quadratic_min_on_cone(const Mat& h, const PolyhedralCone& c, int max_dim, int max_rows) {
  ConeQuadraticMin out;
  if (c.n_ineq() > 0 && c.dim() > max_dim) return out;
  const PolyhedralCone cc = canonical(c);
  const int l = cc.n_ineq();
  if (l > max_rows) return out;
  out.decided = true;
  const Mat hs = 0.5 * (h + h.transpose());
  const double cluster_tol = 1e-9 * (1.0 + hs.norm());

  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << l); ++mask) {
    std::vector<int> eq, rest;
    for (int j = 0; j < l; ++j) ((mask >> j) & 1U ? eq : rest).push_back(j);
    Mat rows_eq(static_cast<Eigen::Index>(eq.size()), c.dim());
    for (std::size_t i = 0; i < eq.size(); ++i) rows_eq.row(static_cast<Eigen::Index>(i)) = cc.A_I().row(eq[i]);
    const Mat z = null_space(vstack(cc.A_E(), rows_eq));
    if (z.cols() == 0) continue;
    Mat rows_rest(static_cast<Eigen::Index>(rest.size()), c.dim());
    for (std::size_t i = 0; i < rest.size(); ++i) rows_rest.row(static_cast<Eigen::Index>(i)) = cc.A_I().row(rest[i]);

    const Eigen::SelfAdjointEigenSolver<Mat> es(z.transpose() * hs * z);
    const Vec& ev = es.eigenvalues();
    Eigen::Index i = 0;
    while (i < ev.size()) {
      if (ev(i) >= out.value) break;
      Eigen::Index j = i + 1;
      while (j < ev.size() && ev(j) - ev(i) <= cluster_tol) ++j;
      const Mat v = z * es.eigenvectors().middleCols(i, j - i);
      if (auto cvec = nonzero_in_cone(rows_rest * v, static_cast<int>(v.cols()))) {
        out.value = ev(i);
        out.argmin = (v * *cvec).normalized();
        break;
      }
      i = j;
    }
  }
  return out;
}

namespace {

Verdict verdict_from(const ConeQuadraticMin& q, double threshold, bool strict) {
  Verdict v;
  if (!q.decided) return v;
  v.min_value = q.value;
  if (q.argmin.size() > 0) v.witness = q.argmin;
  const bool ok = !std::isfinite(q.value) || (strict ? q.value > threshold : q.value >= threshold);
  v.kind = ok ? VerdictKind::holds : VerdictKind::fails;
  return v;
}

}  // namespace

Verdict sosc_check(const Mat& h, const PolyhedralCone& c_frame, double tol) {
  return verdict_from(quadratic_min_on_cone(h, c_frame), tol, true);
}

Verdict sonc_check(const Mat& h, const PolyhedralCone& c_frame, double tol) {
  return verdict_from(quadratic_min_on_cone(h, c_frame), -tol, false);
}

}  // namespace mcopt
