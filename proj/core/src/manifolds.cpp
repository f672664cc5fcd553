#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "mcopt/geometry.hpp"

namespace mcopt {

namespace {

std::string point_tag(const Vec& x) {
  std::size_t h = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x(i));
    h ^= std::hash<std::string>{}(buf) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  char out[24];
  std::snprintf(out, sizeof out, "%016zx", h);
  return out;
}

std::string chart_id(const std::string& manifold, std::string_view kind, const Vec& center) {
  return manifold + "/" + std::string(kind) + "@" + point_tag(center);
}

[[noreturn]] void unknown_kind(const std::string& manifold, std::string_view kind) {
  throw BadParams(manifold + ": unknown kind '" + std::string(kind) + "'");
}

Mat fixed_rotation(int n) {
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = 1.0 / (i + j + 1.0) + (i == j ? 1.0 : 0.0) + 0.3 * std::sin(1.0 + i - 2.0 * j);
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  if (n == 1) q(0, 0) = -1.0;
  return q;
}

}  // namespace

// ---- Euclidean --------------------------------------------------------------

Euclidean::Euclidean(int n) : n_(n), rotation_(fixed_rotation(n)) {
  if (n < 1) throw BadParams("Euclidean dimension must be positive");
}

std::string Euclidean::name() const { return "R" + std::to_string(n_); }

bool Euclidean::contains(const Point& p, double) const { return p.size() == n_ && p.x.allFinite(); }

Mat Euclidean::tangent_basis(const Point&) const { return Mat::Identity(n_, n_); }

Chart Euclidean::chart(const Point& p, std::string_view kind) const {
  const Vec c = p.x;
  if (kind == "shift") {
    return Chart(
        chart_id(name(), kind, c), p, n_, kInf, [c](const Vec& x) -> Vec { return x - c; },
        [c](const Vec& y) -> Vec { return y + c; }, Chart::Jacobians{Mat::Identity(n_, n_), Mat::Identity(n_, n_)});
  }
  if (kind == "rotated") {
    const Mat q = rotation_;
    return Chart(
        chart_id(name(), kind, c), p, n_, kInf, [c, q](const Vec& x) -> Vec { return q * (x - c); },
        [c, q](const Vec& y) -> Vec { return c + q.transpose() * y; }, Chart::Jacobians{q, q.transpose()});
  }
  unknown_kind(name(), kind);
}

Retraction Euclidean::retraction(const Point& p, std::string_view kind) const {
  const Vec c = p.x;
  if (kind == "translation")
    return Retraction("translation", p, n_, kInf, [c](const Vec& v) -> Vec { return c + v; });
  if (kind == "quadratic") {
    return Retraction("quadratic", p, n_, kInf, [c](const Vec& v) -> Vec {
      Vec out = c + v;
      out(0) += 0.5 * v.squaredNorm();
      return out;
    });
  }
  unknown_kind(name(), kind);
}

Point Euclidean::random_point(std::mt19937_64& rng) const {
  std::normal_distribution<double> nd;
  Vec x(n_);
  for (int i = 0; i < n_; ++i) x(i) = nd(rng);
  return Point(x);
}

// ---- Sphere -----------------------------------------------------------------

Sphere::Sphere(int n) : n_(n) {
  if (n < 1) throw BadParams("sphere dimension must be positive");
}

std::string Sphere::name() const { return "S" + std::to_string(n_); }

bool Sphere::contains(const Point& p, double tol) const {
  return p.size() == n_ + 1 && p.x.allFinite() && std::abs(p.x.norm() - 1.0) <= tol;
}

Mat Sphere::tangent_basis(const Point& p) const {
  // Householder reflection taking -s e_last to p; its first n columns span p^perp.
  const Vec x = p.x.normalized();
  const double s = x(n_) >= 0.0 ? 1.0 : -1.0;
  Vec u = x;
  u(n_) += s;
  const Mat h = Mat::Identity(n_ + 1, n_ + 1) - (2.0 / u.squaredNorm()) * u * u.transpose();
  return h.leftCols(n_);
}

Vec Sphere::exp(const Vec& p, const Vec& v) {
  const double t = v.norm();
  if (t < 1e-300) return p;
  return std::cos(t) * p + (std::sin(t) / t) * v;
}

Vec Sphere::log(const Vec& p, const Vec& q) {
  const double c = p.dot(q);
  const Vec w = q - c * p;
  const double s = w.norm();
  if (s < 1e-300) {
    if (c < 0.0) throw DomainError("sphere log undefined at the antipode");
    return Vec::Zero(p.size());
  }
  return (std::atan2(s, c) / s) * w;
}

double Sphere::distance(const Vec& p, const Vec& q) {
  return std::atan2((q - p.dot(q) * p).norm(), p.dot(q));
}

Chart Sphere::chart(const Point& p, std::string_view kind) const {
  const Vec c = p.x.normalized();
  const Mat e = tangent_basis(Point(c));
  const Chart::Jacobians jac{e.transpose(), e};
  const std::string id = chart_id(name(), kind, c);
  if (kind == "log") {
    return Chart(
        id, Point(c), n_, std::numbers::pi - 1e-3,
        [c, e](const Vec& x) -> Vec { return e.transpose() * log(c, x.normalized()); },
        [c, e](const Vec& y) -> Vec { return exp(c, e * y); }, jac);
  }
  if (kind == "orthographic") {
    return Chart(
        id, Point(c), n_, 0.99,
        [c, e](const Vec& x) -> Vec {
          const Vec u = x.normalized();
          if (u.dot(c) <= 0.0) throw DomainError("orthographic chart: point in the far hemisphere");
          return e.transpose() * u;
        },
        [c, e](const Vec& y) -> Vec { return e * y + std::sqrt(std::max(0.0, 1.0 - y.squaredNorm())) * c; }, jac);
  }
  if (kind == "stereographic") {
    return Chart(
        id, Point(c), n_, 4.0,
        [c, e](const Vec& x) -> Vec {
          const Vec u = x.normalized();
          const double d = 1.0 + u.dot(c);
          if (d < 1e-12) throw DomainError("stereographic chart: antipodal point");
          return (2.0 / d) * (e.transpose() * u);
        },
        [c, e](const Vec& y) -> Vec {
          const Vec s = 0.5 * y;
          const double r2 = s.squaredNorm();
          return (2.0 * (e * s) + (1.0 - r2) * c) / (1.0 + r2);
        },
        jac);
  }
  if (kind == "gnomonic") {
    return Chart(
        id, Point(c), n_, 10.0,
        [c, e](const Vec& x) -> Vec {
          const Vec u = x.normalized();
          const double d = u.dot(c);
          if (d <= 0.0) throw DomainError("gnomonic chart: point in the far hemisphere");
          return (e.transpose() * u) / d;
        },
        [c, e](const Vec& y) -> Vec { return (c + e * y).normalized(); }, jac);
  }
  unknown_kind(name(), kind);
}

Retraction Sphere::retraction(const Point& p, std::string_view kind) const {
  const Vec c = p.x.normalized();
  const Mat e = tangent_basis(Point(c));
  if (kind == "exp")
    return Retraction("exp", Point(c), n_, std::numbers::pi, [c, e](const Vec& v) -> Vec { return exp(c, e * v); });
  if (kind == "projection")
    return Retraction("projection", Point(c), n_, 1e6, [c, e](const Vec& v) -> Vec { return (c + e * v).normalized(); });
  unknown_kind(name(), kind);
}

Point Sphere::random_point(std::mt19937_64& rng) const {
  std::normal_distribution<double> nd;
  Vec x(n_ + 1);
  for (int i = 0; i <= n_; ++i) x(i) = nd(rng);
  return Point(x.normalized());
}

// ---- Product ----------------------------------------------------------------

ProductManifold::ProductManifold(std::vector<ManifoldPtr> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw BadParams("product of zero manifolds");
  for (const auto& f : factors_) {
    ambient_offsets_.push_back(ambient_dim_);
    tangent_offsets_.push_back(dim_);
    ambient_dim_ += f->ambient_dim();
    dim_ += f->dim();
  }
}

std::string ProductManifold::name() const {
  std::string out;
  for (std::size_t i = 0; i < factors_.size(); ++i) out += (i ? "x" : "") + factors_[i]->name();
  return out;
}

Point ProductManifold::factor_point(const Point& p, std::size_t i) const {
  return Point(p.x.segment(ambient_offsets_[i], factors_[i]->ambient_dim()));
}

Point ProductManifold::join(const std::vector<Point>& parts) const {
  if (parts.size() != factors_.size()) throw DimensionMismatch("product join: wrong number of parts");
  Vec x(ambient_dim_);
  for (std::size_t i = 0; i < parts.size(); ++i) x.segment(ambient_offsets_[i], factors_[i]->ambient_dim()) = parts[i].x;
  return Point(x);
}

bool ProductManifold::contains(const Point& p, double tol) const {
  if (p.size() != ambient_dim_) return false;
  for (std::size_t i = 0; i < factors_.size(); ++i)
    if (!factors_[i]->contains(factor_point(p, i), tol)) return false;
  return true;
}

Mat ProductManifold::tangent_basis(const Point& p) const {
  Mat e = Mat::Zero(ambient_dim_, dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i)
    e.block(ambient_offsets_[i], tangent_offsets_[i], factors_[i]->ambient_dim(), factors_[i]->dim()) =
        factors_[i]->tangent_basis(factor_point(p, i));
  return e;
}

namespace {

std::vector<std::string> combined_kinds(const std::vector<ManifoldPtr>& factors,
                                        const std::function<std::vector<std::string>(const Manifold&)>& kinds) {
  std::size_t count = 0;
  for (const auto& f : factors) count = std::max(count, kinds(*f).size());
  std::vector<std::string> out;
  for (std::size_t j = 0; j < count; ++j) {
    std::string name;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      const auto k = kinds(*factors[i]);
      name += (i ? "*" : "") + k[std::min(j, k.size() - 1)];
    }
    out.push_back(name);
  }
  return out;
}

std::size_t kind_index(const std::vector<std::string>& kinds, std::string_view kind, const std::string& manifold) {
  for (std::size_t j = 0; j < kinds.size(); ++j)
    if (kinds[j] == kind) return j;
  unknown_kind(manifold, kind);
}

}  // namespace

std::vector<std::string> ProductManifold::chart_kinds() const {
  return combined_kinds(factors_, [](const Manifold& m) { return m.chart_kinds(); });
}

std::vector<std::string> ProductManifold::retraction_kinds() const {
  return combined_kinds(factors_, [](const Manifold& m) { return m.retraction_kinds(); });
}

Chart ProductManifold::chart(const Point& p, std::string_view kind) const {
  const std::size_t j = kind_index(chart_kinds(), kind, name());
  std::vector<Chart> parts;
  double radius = kInf;
  Mat fwd = Mat::Zero(dim_, ambient_dim_);
  Mat inv = Mat::Zero(ambient_dim_, dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const auto kinds = factors_[i]->chart_kinds();
    parts.push_back(factors_[i]->chart(factor_point(p, i), kinds[std::min(j, kinds.size() - 1)]));
    radius = std::min(radius, parts.back().radius());
    const auto fa = factors_[i]->ambient_dim();
    const auto fd = factors_[i]->dim();
    fwd.block(tangent_offsets_[i], ambient_offsets_[i], fd, fa) = parts.back().forward_jacobian_at_center();
    inv.block(ambient_offsets_[i], tangent_offsets_[i], fa, fd) = parts.back().inverse_jacobian_at_zero();
  }
  Vec center(ambient_dim_);
  for (std::size_t i = 0; i < parts.size(); ++i)
    center.segment(ambient_offsets_[i], factors_[i]->ambient_dim()) = parts[i].center().x;
  auto self = *this;
  auto forward = [parts, self](const Vec& x) -> Vec {
    Vec out(self.dim());
    for (std::size_t i = 0; i < parts.size(); ++i)
      out.segment(self.tangent_offset(i), parts[i].dim()) = parts[i].forward(self.factor_point(Point(x), i));
    return out;
  };
  auto inverse = [parts, self](const Vec& y) -> Vec {
    std::vector<Point> pts;
    for (std::size_t i = 0; i < parts.size(); ++i) pts.push_back(parts[i].inverse(y.segment(self.tangent_offset(i), parts[i].dim())));
    return self.join(pts).x;
  };
  return Chart(chart_id(name(), kind, center), Point(center), dim_, radius, forward, inverse,
               Chart::Jacobians{fwd, inv});
}

Retraction ProductManifold::retraction(const Point& p, std::string_view kind) const {
  const std::size_t j = kind_index(retraction_kinds(), kind, name());
  std::vector<Retraction> parts;
  double radius = kInf;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const auto kinds = factors_[i]->retraction_kinds();
    parts.push_back(factors_[i]->retraction(factor_point(p, i), kinds[std::min(j, kinds.size() - 1)]));
    radius = std::min(radius, parts.back().domain_radius());
  }
  std::vector<Point> bases;
  for (const auto& r : parts) bases.push_back(r.base());
  auto self = *this;
  return Retraction(std::string(kind), join(bases), dim_, radius, [parts, self](const Vec& v) -> Vec {
    std::vector<Point> pts;
    for (std::size_t i = 0; i < parts.size(); ++i) pts.push_back(parts[i](v.segment(self.tangent_offset(i), parts[i].dim())));
    return self.join(pts).x;
  });
}

Point ProductManifold::random_point(std::mt19937_64& rng) const {
  std::vector<Point> pts;
  for (const auto& f : factors_) pts.push_back(f->random_point(rng));
  return join(pts);
}

}  // namespace mcopt
