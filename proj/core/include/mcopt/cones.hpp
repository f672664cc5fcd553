#pragma once

#include <random>
#include <vector>

#include "mcopt/types.hpp"

namespace mcopt {

/// {v : A_I v <= 0, A_E v = 0} in explicit coordinates. Inequality rows may
/// carry identifiers so that callers can track them across re-expressions.
class PolyhedralCone {
 public:
  PolyhedralCone() = default;
  PolyhedralCone(int dim, Mat a_ineq, Mat a_eq, std::vector<int> ineq_ids = {});

  static PolyhedralCone whole_space(int dim);

  int dim() const { return dim_; }
  const Mat& A_I() const { return a_i_; }
  const Mat& A_E() const { return a_e_; }
  int n_ineq() const { return static_cast<int>(a_i_.rows()); }
  int n_eq() const { return static_cast<int>(a_e_.rows()); }
  const std::vector<int>& ineq_ids() const { return ids_; }

 private:
  int dim_ = 0;
  Mat a_i_;
  Mat a_e_;
  std::vector<int> ids_;
};

bool contains(const PolyhedralCone& c, const Vec& v, double tol = Tolerances::feasibility);

struct PolarCertificate {
  Vec lambda_I;
  Vec lambda_E;
  double residual = 0.0;
};

struct PolarResult {
  bool member = false;
  PolarCertificate certificate;
};

/// NNLS test of mu = A_I' lambda_I + A_E' lambda_E with lambda_I >= 0. A negative
/// tol selects the default 1e-8 (1 + |mu|).
PolarResult polar_contains(const PolyhedralCone& c, const Vec& mu, double tol = -1.0);

/// Moves the inequality rows listed in `active` (positions, not ids) to the equalities.
PolyhedralCone face(const PolyhedralCone& c, const std::vector<int>& active);

/// Positions of inequality rows that vanish on the whole cone.
std::vector<int> implicit_equalities(const PolyhedralCone& c, double tol = 1e-9);

/// Same cone with implicit equalities moved to A_E.
PolyhedralCone canonical(const PolyhedralCone& c, double tol = 1e-9);

bool is_subspace(const PolyhedralCone& c, double tol = 1e-9);

/// Orthonormal basis of span(c).
Mat span_basis(const PolyhedralCone& c, double tol = 1e-9);

struct RayDecomposition {
  std::vector<Vec> rays;  ///< unit generators of the pointed part
  Mat lineality;          ///< orthonormal basis of the lineality space
};

/// c = cone(rays) + span(lineality), by double description. Throws
/// DimensionTooLarge when the pointed part has dimension above max_dim.
RayDecomposition extreme_rays(const PolyhedralCone& c, int max_dim = 12);

/// Re-expresses the cone under a linear change of coordinates x2 = J x1.
PolyhedralCone transport(const PolyhedralCone& c, const Mat& j);

/// Random elements of the cone (nonnegative ray combinations plus lineality).
std::vector<Vec> sample_cone(const PolyhedralCone& c, int count, std::mt19937_64& rng);
std::vector<Vec> sample_cone(const RayDecomposition& rd, int dim, int count, std::mt19937_64& rng);

}  // namespace mcopt
