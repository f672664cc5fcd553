#pragma once

#include "mcopt/types.hpp"

namespace mcopt {

/// minimize cost'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lower <= x <= upper.
/// Empty bound vectors mean "free"; entries may be +-kInf.
struct LinearProgram {
  Vec cost;
  Mat A_ub;
  Vec b_ub;
  Mat A_eq;
  Vec b_eq;
  Vec lower;
  Vec upper;
};

enum class LPStatus { optimal, infeasible, unbounded, iteration_limit };

struct LPResult {
  LPStatus status = LPStatus::infeasible;
  Vec x;
  double value = 0.0;
};

/// Dense two-phase tableau simplex with Bland's rule. Intended for the small
/// problems that arise in cone and constraint-qualification checks.
LPResult solve_lp(const LinearProgram& lp);

}  // namespace mcopt
