#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mcopt/cones.hpp"
#include "mcopt/geometry.hpp"

namespace mcopt {

/// Local corner description at q: in the chart (centered at q), K is
/// {x : A_hat x_{1..k} <= 0, x_{k+1..n} = 0} near 0.
struct AdaptedChartData {
  int n = 0;
  int k = 0;
  int ell = 0;
  Mat A_hat;             ///< ell x k
  Chart chart;
  std::vector<int> row_ids;  ///< stable identifier of each inequality row

  Mat A_I() const;  ///< [A_hat 0], ell x n
  Mat W() const;    ///< [0 I], (n-k) x n
  /// Inner tangent cone in chart coordinates.
  PolyhedralCone cone() const;
};

/// K near a point q that need not lie in K: {x : A_I x <= b_I, A_E x = b_E}
/// in a chart centered at q. Used by the solver away from feasibility.
struct LocalPolyhedron {
  Chart chart;
  Mat A_I;
  Vec b_I;
  Mat A_E;
  Vec b_E;
  std::vector<int> row_ids;
};

class CornerSet {
 public:
  using AdaptedSupplier = std::function<AdaptedChartData(const Point& q)>;
  using Membership = std::function<bool(const Point& q, double tol)>;
  using PolyhedronSupplier = std::function<LocalPolyhedron(const Point& q)>;

  CornerSet(std::string name, ManifoldPtr ambient, int k, Membership membership,
            std::vector<AdaptedSupplier> adapted, PolyhedronSupplier polyhedron = {});

  const std::string& name() const { return name_; }
  const ManifoldPtr& ambient() const { return ambient_; }
  int dim_k() const { return k_; }
  int variant_count() const { return static_cast<int>(adapted_.size()); }

  bool contains(const Point& q, double tol = Tolerances::feasibility) const;
  /// Throws NotInSet when q is not in K.
  AdaptedChartData adapted_chart(const Point& q, int variant = 0) const;
  /// Falls back to the adapted chart (b = 0) when no supplier was given.
  LocalPolyhedron local_polyhedron(const Point& q) const;

 private:
  std::string name_;
  ManifoldPtr ambient_;
  int k_;
  Membership membership_;
  std::vector<AdaptedSupplier> adapted_;
  PolyhedronSupplier polyhedron_;
};

using CornerSetPtr = std::shared_ptr<const CornerSet>;

int corner_index(const CornerSet& k, const Point& q, int variant = 0);
PolyhedralCone inner_tangent_cone(const CornerSet& k, const Point& q, int variant = 0);
/// Orthonormal basis of {v : A_hat v = 0, W v = 0}, dimension k - ell.
Mat zero_tangent_space(const CornerSet& k, const Point& q, int variant = 0);

struct ValidationReport {
  bool pass = true;
  std::vector<std::string> failures;
  double max_sample_disagreement = 0.0;  ///< fraction of samples where chart and membership disagree
  int samples = 0;
};

/// Checks rank(A_hat) = ell, ell <= k and samples chart images near 0 against
/// membership.
ValidationReport validate(const CornerSet& k, const Point& q, double tol = Tolerances::feasibility,
                          int variant = 0, int samples = 200, std::uint64_t seed = 1);
/// Same as validate but checks raw data; throws ValidationFailure naming the violated condition.
void require_valid(const AdaptedChartData& data);
void require_valid(const CornerSet& k, const Point& q, double tol = Tolerances::feasibility, int variant = 0);

/// Product of corner sets inside the product of their ambient manifolds.
/// Chart coordinates are ordered (K1, K2, normal1, normal2).
CornerSetPtr product(const CornerSetPtr& k1, const CornerSetPtr& k2);

/// K = {q : A_hat q_{1..k} <= 0, q_{k+1..n} = 0} inside R^n: the polyhedral
/// cone itself as a corner set (with the given rows, surjective or not).
CornerSetPtr polyhedral_cone_set(const Mat& a_hat, int n);

}  // namespace mcopt
