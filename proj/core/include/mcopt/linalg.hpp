#pragma once

#include <functional>

#include "mcopt/types.hpp"

namespace mcopt {

/// Rank with the scale-invariant threshold sigma_i > rel * sigma_max.
int numerical_rank(const Mat& a, double rel = Tolerances::rank);

/// Orthonormal basis (columns) of ker(a).
Mat null_space(const Mat& a, double rel = Tolerances::rank);

/// Orthonormal basis (columns) of range(a).
Mat range_basis(const Mat& a, double rel = Tolerances::rank);

/// Minimum-norm least-squares solution of a x = b.
Vec min_norm_solve(const Mat& a, const Vec& b);

Mat vstack(const Mat& top, const Mat& bottom);

/// Central-difference derivatives used by the library when a model does not
/// supply analytic ones.
namespace numdiff {

using VectorMap = std::function<Vec(const Vec&)>;
using ScalarMap = std::function<double(const Vec&)>;

Mat jacobian(const VectorMap& map, const Vec& x, double h = Tolerances::fd_step);
Vec gradient(const ScalarMap& map, const Vec& x, double h = Tolerances::fd_step);

/// Symmetrized second differences with step h.
Mat hessian(const ScalarMap& map, const Vec& x, double h = Tolerances::hessian_step);

/// Second directional derivative d^2/dt^2 map(x + t v) at t = 0.
Vec second_directional(const VectorMap& map, const Vec& x, const Vec& v, double h = Tolerances::hessian_step);

}  // namespace numdiff

}  // namespace mcopt
