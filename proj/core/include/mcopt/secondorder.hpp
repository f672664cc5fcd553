#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mcopt/firstorder.hpp"

namespace mcopt {

/// f_bar(v) = f(R(v)), g_bar(v) = S(g(R(v))) around p, in canonical frame
/// coordinates of T_pM and T_qN.
struct PulledBackProblem {
  ProblemPtr problem;
  Point base;
  Point q;
  Retraction retraction;
  LinearizingMap linmap;
  std::string retraction_kind;
  std::string linmap_name;
  PolyhedralCone cone_bar;  ///< inner tangent cone in frame coordinates of T_qN

  double f_bar(const Vec& v) const;
  Vec g_bar(const Vec& v) const;
};

/// Empty kinds select the defaults (M's first retraction, "adapted:0").
PulledBackProblem pull_back(const ProblemPtr& prob, const Point& p, const std::string& retraction_kind = "",
                            const std::string& linmap = "adapted:0");

double lagrangian_value(const PulledBackProblem& pb, const Vec& v, const Vec& mu_frame);
Vec lagrangian_gradient(const PulledBackProblem& pb, const Vec& mu_frame, double h = Tolerances::fd_step);

struct HessianOptions {
  double h = Tolerances::hessian_step;
  bool prefer_analytic = true;
  double stationarity_tol = 1e-6;  ///< relative to 1 + |f_bar'(0)|
  double ill_conditioning_gap = 1e-4;
};

struct HessianForm {
  Point base;
  std::string chart_id;  ///< "frame:<retraction>/<linmap>"
  Mat matrix;
  bool analytic = false;
  double richardson_gap = 0.0;  ///< max entry difference between steps h and h/2
  bool ill_conditioned = false;

  double operator()(const Vec& v) const { return v.dot(matrix * v); }
};

/// Throws NotStationary when the pulled-back Lagrangian has a nonzero gradient at 0.
HessianForm lagrangian_hessian(const PulledBackProblem& pb, const Vec& mu_frame, const HessianOptions& opts = {});

struct CriticalCone {
  PolyhedralCone cone_M;        ///< phi coordinates: linearizing cone plus f'(p) v = 0
  PolyhedralCone cone_M_frame;  ///< same cone in frame coordinates
  PolyhedralCone cone_M_mult;   ///< phi coordinates: strongly active rows as equalities
  PolyhedralCone cone_N;        ///< psi coordinates
  PolyhedralCone cone_N_frame;
};

CriticalCone critical_cone(const LocalModel& lm, const KKTCertificate& cert, double tol_act = Tolerances::activity);

struct InvarianceReport {
  double on_cone_max = 0.0;
  double off_cone_max = 0.0;
  int on_cone_samples = 0;
  int off_cone_samples = 0;
  bool both_adapted = true;
  bool pass = false;
  HessianForm h1;
  HessianForm h2;
};

InvarianceReport invariance_check(const LocalModel& lm, const KKTCertificate& cert, const PulledBackProblem& pb1,
                                  const PulledBackProblem& pb2, double tol, int samples = 200,
                                  std::uint64_t seed = 7, const HessianOptions& opts = {});

struct ConsistencyReport {
  bool consistent = false;
  double second_derivative_norm = 0.0;
};

/// Theta = lm1 o lm2^{-1}; consistent iff |Theta''(0)| <= tol.
ConsistencyReport second_order_consistent(const LinearizingMap& lm1, const LinearizingMap& lm2,
                                          double h = Tolerances::hessian_step, double tol = 1e-6);
/// Theta''(0)[v, v] by central differences.
Vec theta_second_derivative(const LinearizingMap& lm1, const LinearizingMap& lm2, const Vec& v,
                            double h = Tolerances::hessian_step);

enum class VerdictKind { holds, fails, inconclusive };

struct Verdict {
  VerdictKind kind = VerdictKind::inconclusive;
  std::optional<Vec> witness;  ///< unit minimizer of H[v, v] over the cone
  double min_value = kInf;     ///< +inf when the cone is {0}
};

const char* to_string(VerdictKind k);

struct ConeQuadraticMin {
  bool decided = false;
  double value = kInf;
  Vec argmin;
};

/// Exact minimum of v' H v over the cone intersected with the unit sphere, by
/// enumerating faces and eigenspaces of H restricted to each face span.
/// Undecided when the cone has inequality rows and dim > max_dim, or more than max_rows rows.
ConeQuadraticMin quadratic_min_on_cone(const Mat& h, const PolyhedralCone& c, int max_dim = 12, int max_rows = 20);

Verdict sosc_check(const Mat& h, const PolyhedralCone& c_frame, double tol = 1e-8);
Verdict sonc_check(const Mat& h, const PolyhedralCone& c_frame, double tol = 1e-6);

}  // namespace mcopt
