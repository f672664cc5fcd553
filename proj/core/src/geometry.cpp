#include "mcopt/geometry.hpp"

#include "mcopt/cones.hpp"
#include "mcopt/linalg.hpp"

namespace mcopt {

Chart::Chart(std::string id, Point center, int dim, double radius, Forward forward, Inverse inverse,
             std::optional<Jacobians> jacobians)
    : id_(std::move(id)),
      center_(std::move(center)),
      dim_(dim),
      radius_(radius),
      forward_(std::move(forward)),
      inverse_(std::move(inverse)),
      jacobians_(std::move(jacobians)) {
  if (!(radius_ > 0.0)) throw BadParams("chart radius must be positive");
}

Vec Chart::forward(const Point& p) const {
  Vec x = forward_(p.x);
  if (x.size() != dim_) throw DimensionMismatch("chart " + id_ + ": forward has wrong dimension");
  if (!(x.norm() < radius_)) throw DomainError("chart " + id_ + ": point outside chart domain");
  return x;
}

Point Chart::inverse(const Vec& coords) const {
  if (coords.size() != dim_) throw DimensionMismatch("chart " + id_ + ": coordinate dimension mismatch");
  if (!(coords.norm() < radius_)) throw DomainError("chart " + id_ + ": coordinates outside chart domain");
  return Point(inverse_(coords));
}

Mat Chart::differential_at(const Vec& coords) const {
  const double h = std::min(Tolerances::fd_step, 0.25 * (radius_ - coords.norm()));
  if (!(h > 0.0)) throw DomainError("chart " + id_ + ": no room for differences at the domain boundary");
  return numdiff::jacobian([this](const Vec& c) { return inverse(c).x; }, coords, h);
}

Mat Chart::forward_jacobian_at_center() const {
  if (jacobians_) return jacobians_->forward_at_center;
  return numdiff::jacobian([this](const Vec& a) { return forward_(a); }, center_.x, 1e-6);
}

Mat Chart::inverse_jacobian_at_zero() const {
  if (jacobians_) return jacobians_->inverse_at_zero;
  return differential_at(Vec::Zero(dim_));
}

Vec chart_transition(const Chart& c1, const Chart& c2, const Vec& x) {
  return c2.forward(c1.inverse(x));
}

Mat transition_jacobian(const Chart& c1, const Chart& c2) {
  if (c1.dim() != c2.dim()) throw DimensionMismatch("charts of different dimension");
  return c2.forward_jacobian_at_center() * c1.inverse_jacobian_at_zero();
}

TangentVec push_tangent(const Chart& c1, const Chart& c2, const TangentVec& v) {
  if (v.chart_id != c1.id()) throw ChartMismatch("tangent vector expressed in " + v.chart_id + ", not " + c1.id());
  if ((c1.center().x - c2.center().x).norm() > 1e-12 * (1.0 + c1.center().x.norm()))
    throw ChartMismatch("charts do not share a center");
  return TangentVec{v.base, c2.id(), transition_jacobian(c1, c2) * v.rep};
}

Retraction::Retraction(std::string id, Point base, int dim, double domain_radius, Map map)
    : id_(std::move(id)), base_(std::move(base)), dim_(dim), radius_(domain_radius), map_(std::move(map)) {}

Point Retraction::operator()(const Vec& v) const {
  if (v.size() != dim_) throw DimensionMismatch("retraction " + id_ + ": tangent dimension mismatch");
  if (!(v.norm() < radius_)) throw DomainError("retraction " + id_ + ": tangent vector outside domain");
  return Point(map_(v));
}

Point retract(const Retraction& r, const Vec& v) { return r(v); }

LinearizingMap::LinearizingMap(std::string id, Point base, int dim, double radius, Map map, InverseMap inverse,
                               std::shared_ptr<const PolyhedralCone> adapted_to)
    : id_(std::move(id)),
      base_(std::move(base)),
      dim_(dim),
      radius_(radius),
      map_(std::move(map)),
      inverse_(std::move(inverse)),
      adapted_to_(std::move(adapted_to)) {}

Vec LinearizingMap::operator()(const Point& q) const {
  Vec w = map_(q.x);
  if (!(w.norm() < radius_)) throw DomainError("linearizing map " + id_ + ": point outside domain");
  return w;
}

Point LinearizingMap::inverse(const Vec& w) const {
  if (!inverse_) throw DomainError("linearizing map " + id_ + " has no inverse");
  if (!(w.norm() < radius_)) throw DomainError("linearizing map " + id_ + ": coordinates outside domain");
  return Point(inverse_(w));
}

Mat Manifold::frame_to_chart(const Chart& c) const {
  return c.forward_jacobian_at_center() * tangent_basis(c.center());
}

LinearizingMap linearizing_map_from_chart(const Manifold& n, const Chart& chart,
                                          std::shared_ptr<const PolyhedralCone> adapted_to) {
  const Mat j = n.frame_to_chart(chart);
  const Eigen::PartialPivLU<Mat> lu(j);
  const double jnorm = j.size() > 0 ? j.norm() : 1.0;
  auto map = [chart, lu](const Vec& ambient) -> Vec { return lu.solve(chart.forward(Point(ambient))); };
  auto inv = [chart, j](const Vec& w) -> Vec { return chart.inverse(j * w).x; };
  return LinearizingMap("S[" + chart.id() + "]", chart.center(), chart.dim(), chart.radius() / jnorm, map, inv,
                        std::move(adapted_to));
}

namespace {

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

}  // namespace

AxiomReport axiom_check(const Manifold& m, const Retraction& r, double h, double tol) {
  AxiomReport rep;
  const Vec zero = Vec::Zero(r.dim());
  rep.value_residual = (r(zero).x - r.base().x).norm();
  const Mat d = numdiff::jacobian([&r](const Vec& v) { return r(v).x; }, zero, h);
  rep.differential_residual = spectral_norm(d - m.tangent_basis(r.base()));
  rep.pass = rep.value_residual <= tol && rep.differential_residual <= tol;
  return rep;
}

AxiomReport axiom_check(const Manifold& n, const LinearizingMap& s, double h, double tol) {
  AxiomReport rep;
  rep.value_residual = s(s.base()).norm();
  const Retraction r = n.default_retraction(s.base());
  const Mat d = numdiff::jacobian([&](const Vec& v) { return s(r(v)); }, Vec::Zero(s.dim()), h);
  rep.differential_residual = spectral_norm(d - Mat::Identity(s.dim(), s.dim()));
  rep.pass = rep.value_residual <= tol && rep.differential_residual <= tol;
  return rep;
}

}  // namespace mcopt
