#pragma once

#include "mcopt/types.hpp"

namespace mcopt {

/// minimize 0.5 v'Hv + g'v  s.t.  A_I v <= b_I,  A_E v = b_E.
struct QPProblem {
  Mat H;
  Vec g;
  Mat A_I;
  Vec b_I;
  Mat A_E;
  Vec b_E;
};

struct QPResult {
  Vec v;
  Vec lambda_I;  ///< >= 0, stationarity H v + g + A_I' lambda_I + A_E' lambda_E = 0
  Vec lambda_E;
  int iterations = 0;
  bool convexified = false;  ///< H was shifted because a reduced Hessian was not positive definite
  double shift = 0.0;
};

/// Primal active-set method started from an LP-feasible point. Throws
/// QPInfeasible when the constraints admit no point.
QPResult solve_qp(const QPProblem& qp, int max_iter = 500);

/// Minimizes the l1 violation of the constraints within |v|_inf <= radius
/// (elastic mode). Returns the minimizer with the smallest l1 norm among LP optima.
Vec elastic_step(const QPProblem& qp, double radius);

}  // namespace mcopt
