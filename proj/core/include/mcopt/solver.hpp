#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcopt/firstorder.hpp"
#include "mcopt/qp.hpp"

namespace mcopt {

enum class HessianMode { fd_lagrangian, bfgs, identity };

const char* to_string(HessianMode m);
HessianMode hessian_mode_from_string(const std::string& s);

struct SolveOptions {
  int max_iter = 100;
  double tol_kkt = Tolerances::kkt;
  double tol_step = 1e-14;
  HessianMode hessian_mode = HessianMode::fd_lagrangian;
  double merit_penalty = 10.0;
  std::uint64_t seed = 0;
  std::string retraction;  ///< empty: M's default retraction
  ChartChoice chart;       ///< used for the final certificate
};

enum class SolveStatus { converged, max_iter, breakdown };

const char* to_string(SolveStatus s);

struct IterationRecord {
  int iteration = 0;
  double f = 0.0;
  double kkt_residual = 0.0;
  double feasibility = 0.0;  ///< l1 violation of the local polyhedron at the iterate
  double step_norm = 0.0;    ///< |t v| in frame coordinates
  double step_length = 0.0;  ///< accepted t
  double merit_before = 0.0;
  double merit_after = 0.0;
  bool restoration = false;
  bool second_order_correction = false;
};

struct SolveResult {
  Point point;
  std::optional<KKTCertificate> certificate;
  std::vector<IterationRecord> iterations;
  SolveStatus status = SolveStatus::max_iter;
  std::string message;
  /// Last QP multipliers keyed by constraint row id (inequalities only).
  std::map<int, double> qp_multipliers;
};

/// Local model of the iteration at p: f_bar(v) = f(R_p(v)) and
/// c(v) = psi(g(R_p(v))) against the local polyhedron of K at g(p).
class SqpLocalProblem {
 public:
  SqpLocalProblem(const ProblemPtr& prob, const Point& p, const std::string& retraction_kind);

  const Retraction& retraction() const { return retraction_; }
  const LocalPolyhedron& polyhedron() const { return poly_; }
  int dim() const { return retraction_.dim(); }

  double f_bar(const Vec& v) const;
  Vec c_bar(const Vec& v) const;  ///< psi(g(R(v)))
  double violation(const Vec& c) const;
  double merit(const Vec& v, double rho) const;

  const Vec& gradient() const { return grad_; }
  const Mat& jacobian() const { return jac_; }  ///< d c_bar(0)

  QPProblem qp(const Mat& h) const;

 private:
  ProblemPtr prob_;
  Retraction retraction_;
  LocalPolyhedron poly_;
  Vec grad_;
  Mat jac_;
};

struct LineSearchResult {
  double t = 0.0;
  double merit_before = 0.0;
  double merit_after = 0.0;
  int halvings = 0;
};

/// Backtracking on the l1 merit with Armijo parameter 1e-4. Steps that leave
/// a chart or retraction domain count as rejected. Throws LineSearchFailure.
LineSearchResult merit_and_linesearch(const SqpLocalProblem& lp, const Vec& v, double rho, double directional,
                                      int max_halvings = 30);

/// Never throws for numerical trouble during the iteration: a failed
/// restoration or an exhausted chart/retraction domain ends the run with
/// status breakdown and a message.
SolveResult solve(const ProblemPtr& prob, const Point& p0, const SolveOptions& opts = {});

}  // namespace mcopt
