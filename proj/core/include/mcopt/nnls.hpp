#pragma once

#include "mcopt/types.hpp"

namespace mcopt {

struct NnlsResult {
  Vec x;
  double residual = 0.0;  ///< ||b - C x||
  int iterations = 0;
};

/// Lawson-Hanson active-set solver for min ||b - C x|| s.t. x >= 0.
NnlsResult nnls(const Mat& c, const Vec& b, int max_iter = 0);

struct MixedNnlsResult {
  Vec x_nonneg;
  Vec x_free;
  double residual = 0.0;
};

/// min ||b - C_nonneg x - C_free y|| over x >= 0 and free y. The free block is
/// projected out first; y is the minimum-norm least-squares completion.
MixedNnlsResult mixed_nnls(const Mat& c_nonneg, const Mat& c_free, const Vec& b);

}  // namespace mcopt
