#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mcopt/types.hpp"

namespace mcopt {

/// A local chart centered at a point. The domain is the open ball of radius
/// `radius` in chart coordinates; leaving it is a DomainError.
class Chart {
 public:
  using Forward = std::function<Vec(const Vec& ambient)>;
  using Inverse = std::function<Vec(const Vec& coords)>;

  struct Jacobians {
    Mat forward_at_center;  ///< dim x ambient, d forward at the center
    Mat inverse_at_zero;    ///< ambient x dim, d inverse at 0
  };

  Chart() = default;
  Chart(std::string id, Point center, int dim, double radius, Forward forward, Inverse inverse,
        std::optional<Jacobians> jacobians = std::nullopt);

  const std::string& id() const { return id_; }
  const Point& center() const { return center_; }
  int dim() const { return dim_; }
  double radius() const { return radius_; }

  Vec forward(const Point& p) const;
  Point inverse(const Vec& coords) const;
  bool in_domain(const Vec& coords) const { return coords.norm() < radius_; }

  /// d inverse at `coords`, ambient x dim (central differences).
  Mat differential_at(const Vec& coords) const;
  /// dim x ambient. Analytic when supplied, else differences on the ambient extension.
  Mat forward_jacobian_at_center() const;
  /// ambient x dim.
  Mat inverse_jacobian_at_zero() const;

 private:
  std::string id_;
  Point center_;
  int dim_ = 0;
  double radius_ = 0.0;
  Forward forward_;
  Inverse inverse_;
  std::optional<Jacobians> jacobians_;
};

/// A tangent vector represented in a particular chart.
struct TangentVec {
  Point base;
  std::string chart_id;
  Vec rep;
};

/// T = c2 o c1^{-1}.
Vec chart_transition(const Chart& c1, const Chart& c2, const Vec& x);

/// Jacobian of the transition at 0 for two charts sharing a center.
Mat transition_jacobian(const Chart& c1, const Chart& c2);

TangentVec push_tangent(const Chart& c1, const Chart& c2, const TangentVec& v);

/// Local retraction: tangent coordinates (in the manifold's canonical frame at
/// `base`) to ambient points.
class Retraction {
 public:
  using Map = std::function<Vec(const Vec& tangent)>;

  Retraction(std::string id, Point base, int dim, double domain_radius, Map map);

  const std::string& id() const { return id_; }
  const Point& base() const { return base_; }
  int dim() const { return dim_; }
  double domain_radius() const { return radius_; }
  bool in_domain(const Vec& v) const { return v.norm() < radius_; }

  Point operator()(const Vec& v) const;

 private:
  std::string id_;
  Point base_;
  int dim_;
  double radius_;
  Map map_;
};

Point retract(const Retraction& r, const Vec& v);

class PolyhedralCone;

/// Local linearizing map S_q : N -> T_qN, output in the canonical frame at q.
class LinearizingMap {
 public:
  using Map = std::function<Vec(const Vec& ambient)>;
  using InverseMap = std::function<Vec(const Vec& tangent)>;

  LinearizingMap(std::string id, Point base, int dim, double radius, Map map, InverseMap inverse = {},
                 std::shared_ptr<const PolyhedralCone> adapted_to = nullptr);

  const std::string& id() const { return id_; }
  const Point& base() const { return base_; }
  int dim() const { return dim_; }
  double radius() const { return radius_; }
  bool adapted() const { return adapted_to_ != nullptr; }
  const std::shared_ptr<const PolyhedralCone>& adapted_to() const { return adapted_to_; }
  bool has_inverse() const { return static_cast<bool>(inverse_); }

  Vec operator()(const Point& q) const;
  Point inverse(const Vec& w) const;

 private:
  std::string id_;
  Point base_;
  int dim_;
  double radius_;
  Map map_;
  InverseMap inverse_;
  std::shared_ptr<const PolyhedralCone> adapted_to_;
};

class Manifold {
 public:
  virtual ~Manifold() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual int ambient_dim() const = 0;
  virtual bool contains(const Point& p, double tol = Tolerances::feasibility) const = 0;

  /// Orthonormal ambient basis of T_pM (ambient_dim x dim). Tangent
  /// coordinates everywhere in the library refer to this frame.
  virtual Mat tangent_basis(const Point& p) const = 0;

  virtual std::vector<std::string> chart_kinds() const = 0;
  virtual Chart chart(const Point& p, std::string_view kind) const = 0;
  virtual std::vector<std::string> retraction_kinds() const = 0;
  virtual Retraction retraction(const Point& p, std::string_view kind) const = 0;

  virtual Point random_point(std::mt19937_64& rng) const = 0;

  Chart default_chart(const Point& p) const { return chart(p, chart_kinds().front()); }
  Retraction default_retraction(const Point& p) const { return retraction(p, retraction_kinds().front()); }

  /// J = d chart(p) * E(p): the chart representative of frame vectors.
  Mat frame_to_chart(const Chart& c) const;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

/// R^n with charts "shift" (x - p) and "rotated" (Q (x - p)), retractions
/// "translation" (p + v) and "quadratic" (p + v + 0.5 |v|^2 e_1).
class Euclidean final : public Manifold {
 public:
  explicit Euclidean(int n);

  std::string name() const override;
  int dim() const override { return n_; }
  int ambient_dim() const override { return n_; }
  bool contains(const Point& p, double tol) const override;
  Mat tangent_basis(const Point& p) const override;
  std::vector<std::string> chart_kinds() const override { return {"shift", "rotated"}; }
  Chart chart(const Point& p, std::string_view kind) const override;
  std::vector<std::string> retraction_kinds() const override { return {"translation", "quadratic"}; }
  Retraction retraction(const Point& p, std::string_view kind) const override;
  Point random_point(std::mt19937_64& rng) const override;

  /// The fixed orthogonal matrix used by the "rotated" chart.
  const Mat& rotation() const { return rotation_; }

 private:
  int n_;
  Mat rotation_;
};

/// Unit sphere S^n in R^{n+1}. Charts "log", "orthographic", "stereographic",
/// "gnomonic" all have identity differential in the canonical frame.
/// Retractions "exp" and "projection".
class Sphere final : public Manifold {
 public:
  explicit Sphere(int n);

  std::string name() const override;
  int dim() const override { return n_; }
  int ambient_dim() const override { return n_ + 1; }
  bool contains(const Point& p, double tol) const override;
  Mat tangent_basis(const Point& p) const override;
  std::vector<std::string> chart_kinds() const override {
    return {"log", "orthographic", "stereographic", "gnomonic"};
  }
  Chart chart(const Point& p, std::string_view kind) const override;
  std::vector<std::string> retraction_kinds() const override { return {"exp", "projection"}; }
  Retraction retraction(const Point& p, std::string_view kind) const override;
  Point random_point(std::mt19937_64& rng) const override;

  static Vec exp(const Vec& p, const Vec& ambient_tangent);
  static Vec log(const Vec& p, const Vec& q);
  static double distance(const Vec& p, const Vec& q);

 private:
  int n_;
};

/// Cartesian product; ambient coordinates are the stacked factor coordinates
/// and chart/retraction kinds apply the same kind index to every factor.
class ProductManifold final : public Manifold {
 public:
  explicit ProductManifold(std::vector<ManifoldPtr> factors);

  std::string name() const override;
  int dim() const override { return dim_; }
  int ambient_dim() const override { return ambient_dim_; }
  bool contains(const Point& p, double tol) const override;
  Mat tangent_basis(const Point& p) const override;
  std::vector<std::string> chart_kinds() const override;
  Chart chart(const Point& p, std::string_view kind) const override;
  std::vector<std::string> retraction_kinds() const override;
  Retraction retraction(const Point& p, std::string_view kind) const override;
  Point random_point(std::mt19937_64& rng) const override;

  const std::vector<ManifoldPtr>& factors() const { return factors_; }
  Point factor_point(const Point& p, std::size_t i) const;
  Point join(const std::vector<Point>& parts) const;
  Eigen::Index ambient_offset(std::size_t i) const { return ambient_offsets_[i]; }
  Eigen::Index tangent_offset(std::size_t i) const { return tangent_offsets_[i]; }

 private:
  std::vector<ManifoldPtr> factors_;
  std::vector<Eigen::Index> ambient_offsets_;
  std::vector<Eigen::Index> tangent_offsets_;
  int dim_ = 0;
  int ambient_dim_ = 0;
};

/// Linearizing map S = J^{-1} psi built from a chart centered at q; its
/// differential in the canonical frame is the identity.
LinearizingMap linearizing_map_from_chart(const Manifold& n, const Chart& chart,
                                          std::shared_ptr<const PolyhedralCone> adapted_to = nullptr);

struct AxiomReport {
  double value_residual = 0.0;         ///< |map(0) - base| or |S(base)|
  double differential_residual = 0.0;  ///< |FD differential - I|
  bool pass = false;
};

AxiomReport axiom_check(const Manifold& m, const Retraction& r, double h = Tolerances::fd_step,
                        double tol = 1e-6);
AxiomReport axiom_check(const Manifold& n, const LinearizingMap& s, double h = Tolerances::fd_step,
                        double tol = 1e-6);

}  // namespace mcopt
