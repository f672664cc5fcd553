#pragma once

#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mcopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A point of a manifold, stored in the ambient coordinates of its embedding
/// (unit vectors in R^{n+1} for S^n, stacked blocks for products).
struct Point {
  Vec x;

  Point() = default;
  explicit Point(Vec coords) : x(std::move(coords)) {}

  Eigen::Index size() const { return x.size(); }
};

/// Default tolerances. Every routine that needs one takes it as an argument;
/// these are only the values used when the caller does not say otherwise.
struct Tolerances {
  static constexpr double chart = 1e-10;
  static constexpr double feasibility = 1e-9;
  static constexpr double kkt = 1e-8;
  static constexpr double activity = 1e-7;
  static constexpr double polar = 1e-8;
  static constexpr double rank = 1e-8;
  static constexpr double fd_step = 1e-5;
  static constexpr double hessian_step = 1e-4;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MCOPT_DEFINE_ERROR(Name)            \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

MCOPT_DEFINE_ERROR(DomainError);
MCOPT_DEFINE_ERROR(ChartMismatch);
MCOPT_DEFINE_ERROR(NotInSet);
MCOPT_DEFINE_ERROR(ValidationFailure);
MCOPT_DEFINE_ERROR(DimensionMismatch);
MCOPT_DEFINE_ERROR(IndexOutOfRange);
MCOPT_DEFINE_ERROR(DimensionTooLarge);
MCOPT_DEFINE_ERROR(InfeasiblePoint);
MCOPT_DEFINE_ERROR(InvalidCertificate);
MCOPT_DEFINE_ERROR(NotStationary);
MCOPT_DEFINE_ERROR(QPInfeasible);
MCOPT_DEFINE_ERROR(LineSearchFailure);
MCOPT_DEFINE_ERROR(Breakdown);
MCOPT_DEFINE_ERROR(BadParams);
MCOPT_DEFINE_ERROR(ModelMismatch);

#undef MCOPT_DEFINE_ERROR

}  // namespace mcopt
