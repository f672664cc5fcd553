#include "mcopt/corners.hpp"

#include <cmath>
#include <random>

#include "mcopt/linalg.hpp"

namespace mcopt {

Mat AdaptedChartData::A_I() const {
  Mat a = Mat::Zero(ell, n);
  if (ell > 0) a.leftCols(k) = A_hat;
  return a;
}

Mat AdaptedChartData::W() const {
  Mat w = Mat::Zero(n - k, n);
  if (n > k) w.rightCols(n - k).setIdentity();
  return w;
}

PolyhedralCone AdaptedChartData::cone() const { return PolyhedralCone(n, A_I(), W(), row_ids); }

CornerSet::CornerSet(std::string name, ManifoldPtr ambient, int k, Membership membership,
                     std::vector<AdaptedSupplier> adapted, PolyhedronSupplier polyhedron)
    : name_(std::move(name)),
      ambient_(std::move(ambient)),
      k_(k),
      membership_(std::move(membership)),
      adapted_(std::move(adapted)),
      polyhedron_(std::move(polyhedron)) {
  if (adapted_.empty()) throw BadParams("corner set " + name_ + " needs an adapted chart supplier");
  if (k_ < 0 || k_ > ambient_->dim()) throw BadParams("corner set " + name_ + ": k out of range");
}

bool CornerSet::contains(const Point& q, double tol) const {
  return ambient_->contains(q, std::max(tol, 1e-9)) && membership_(q, tol);
}

AdaptedChartData CornerSet::adapted_chart(const Point& q, int variant) const {
  if (variant < 0 || variant >= variant_count())
    throw IndexOutOfRange("corner set " + name_ + ": chart variant " + std::to_string(variant));
  if (!contains(q)) throw NotInSet("point is not in " + name_);
  AdaptedChartData d = adapted_[static_cast<std::size_t>(variant)](q);
  if (d.row_ids.empty())
    for (int j = 0; j < d.ell; ++j) d.row_ids.push_back(j);
  return d;
}

LocalPolyhedron CornerSet::local_polyhedron(const Point& q) const {
  if (polyhedron_) return polyhedron_(q);
  const AdaptedChartData d = adapted_chart(q);
  return LocalPolyhedron{d.chart, d.A_I(), Vec::Zero(d.ell), d.W(), Vec::Zero(d.n - d.k), d.row_ids};
}

int corner_index(const CornerSet& k, const Point& q, int variant) { return k.adapted_chart(q, variant).ell; }

PolyhedralCone inner_tangent_cone(const CornerSet& k, const Point& q, int variant) {
  return k.adapted_chart(q, variant).cone();
}

Mat zero_tangent_space(const CornerSet& k, const Point& q, int variant) {
  const AdaptedChartData d = k.adapted_chart(q, variant);
  return null_space(vstack(d.A_I(), d.W()));
}

namespace {

std::vector<std::string> structural_failures(const AdaptedChartData& d) {
  std::vector<std::string> out;
  if (d.ell > d.k) out.push_back("corner index exceeds dim K (ell > k)");
  if (d.k > d.n) out.push_back("dim K exceeds dim N (k > n)");
  if (d.A_hat.rows() != d.ell || (d.ell > 0 && d.A_hat.cols() != d.k))
    out.push_back("A_hat has the wrong shape");
  else if (numerical_rank(d.A_hat) != d.ell)
    out.push_back("surjectivity: rank(A_hat) < ell");
  return out;
}

}  // namespace

ValidationReport validate(const CornerSet& k, const Point& q, double tol, int variant, int samples,
                          std::uint64_t seed) {
  ValidationReport rep;
  const AdaptedChartData d = k.adapted_chart(q, variant);
  rep.failures = structural_failures(d);
  if (!rep.failures.empty()) {
    rep.pass = false;
    return rep;
  }
  try {
    if (d.chart.forward(q).norm() > 1e-8) rep.failures.push_back("chart is not centered at q");
  } catch (const DomainError&) {
    rep.failures.push_back("chart is not defined at q");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  const double rho = std::min(0.1, 0.5 * d.chart.radius());
  const Mat ai = d.A_I();
  int disagree = 0;
  for (int s = 0; s < samples; ++s) {
    Vec x(d.n);
    for (int i = 0; i < d.n; ++i) x(i) = nd(rng);
    if (s % 4 != 3) x.tail(d.n - d.k).setZero();
    x *= rho * std::pow(ud(rng), 1.0 / std::max(d.n, 1)) / std::max(x.norm(), 1e-300);
    const double normal = (x.tail(d.n - d.k)).norm();
    const double worst = d.ell > 0 ? (ai * x).maxCoeff() : -kInf;
    // Skip samples too close to the boundary to be classified robustly.
    if (std::abs(worst) < 1e-6 || (normal > 0.0 && normal < 1e-6)) continue;
    const bool chart_says = worst <= tol && normal <= tol;
    const bool member = k.contains(d.chart.inverse(x), 1e-7);
    ++rep.samples;
    if (chart_says != member) ++disagree;
  }
  rep.max_sample_disagreement = rep.samples ? static_cast<double>(disagree) / rep.samples : 0.0;
  if (disagree > 0) rep.failures.push_back("sampled membership disagrees with the chart description");
  rep.pass = rep.failures.empty();
  return rep;
}

void require_valid(const AdaptedChartData& data) {
  const auto f = structural_failures(data);
  if (!f.empty()) throw ValidationFailure(f.front());
}

void require_valid(const CornerSet& k, const Point& q, double tol, int variant) {
  const ValidationReport r = validate(k, q, tol, variant);
  if (!r.pass) throw ValidationFailure(r.failures.front());
}

namespace {

// Permutation matrix taking (c1, c2) to (c1[:k1], c2[:k2], c1[k1:], c2[k2:]).
Mat corner_permutation(int n1, int k1, int n2, int k2) {
  Mat p = Mat::Zero(n1 + n2, n1 + n2);
  int row = 0;
  for (int i = 0; i < k1; ++i) p(row++, i) = 1.0;
  for (int i = 0; i < k2; ++i) p(row++, n1 + i) = 1.0;
  for (int i = k1; i < n1; ++i) p(row++, i) = 1.0;
  for (int i = k2; i < n2; ++i) p(row++, n1 + i) = 1.0;
  return p;
}

Chart product_chart(const std::shared_ptr<const ProductManifold>& pm, const Chart& c1, const Chart& c2, const Mat& perm) {
  const int n1 = c1.dim();
  const int n2 = c2.dim();
  const Eigen::Index a1 = pm->factors()[0]->ambient_dim();
  const Eigen::Index a2 = pm->factors()[1]->ambient_dim();
  Mat fwd = Mat::Zero(n1 + n2, a1 + a2);
  fwd.block(0, 0, n1, a1) = c1.forward_jacobian_at_center();
  fwd.block(n1, a1, n2, a2) = c2.forward_jacobian_at_center();
  Mat inv = Mat::Zero(a1 + a2, n1 + n2);
  inv.block(0, 0, a1, n1) = c1.inverse_jacobian_at_zero();
  inv.block(a1, n1, a2, n2) = c2.inverse_jacobian_at_zero();
  Vec center(a1 + a2);
  center << c1.center().x, c2.center().x;
  auto forward = [c1, c2, perm, a1, a2](const Vec& x) -> Vec {
    Vec y(c1.dim() + c2.dim());
    y << c1.forward(Point(x.head(a1))), c2.forward(Point(x.tail(a2)));
    return perm * y;
  };
  auto inverse = [c1, c2, perm](const Vec& z) -> Vec {
    const Vec y = perm.transpose() * z;
    Vec x(c1.center().size() + c2.center().size());
    x << c1.inverse(y.head(c1.dim())).x, c2.inverse(y.tail(c2.dim())).x;
    return x;
  };
  return Chart(c1.id() + "|" + c2.id(), Point(center), n1 + n2, std::min(c1.radius(), c2.radius()), forward, inverse,
               Chart::Jacobians{perm * fwd, inv * perm.transpose()});
}

constexpr int kSecondFactorIdOffset = 1 << 20;

}  // namespace

CornerSetPtr product(const CornerSetPtr& k1, const CornerSetPtr& k2) {
  auto pm = std::make_shared<const ProductManifold>(std::vector<ManifoldPtr>{k1->ambient(), k2->ambient()});
  auto membership = [k1, k2, pm](const Point& q, double tol) {
    return k1->contains(pm->factor_point(q, 0), tol) && k2->contains(pm->factor_point(q, 1), tol);
  };
  std::vector<CornerSet::AdaptedSupplier> variants;
  const int nv = std::max(k1->variant_count(), k2->variant_count());
  for (int v = 0; v < nv; ++v) {
    const int v1 = std::min(v, k1->variant_count() - 1);
    const int v2 = std::min(v, k2->variant_count() - 1);
    variants.push_back([k1, k2, pm, v1, v2](const Point& q) {
      const AdaptedChartData d1 = k1->adapted_chart(pm->factor_point(q, 0), v1);
      const AdaptedChartData d2 = k2->adapted_chart(pm->factor_point(q, 1), v2);
      const Mat perm = corner_permutation(d1.n, d1.k, d2.n, d2.k);
      AdaptedChartData d;
      d.n = d1.n + d2.n;
      d.k = d1.k + d2.k;
      d.ell = d1.ell + d2.ell;
      d.A_hat = Mat::Zero(d.ell, d.k);
      if (d1.ell > 0) d.A_hat.block(0, 0, d1.ell, d1.k) = d1.A_hat;
      if (d2.ell > 0) d.A_hat.block(d1.ell, d1.k, d2.ell, d2.k) = d2.A_hat;
      d.chart = product_chart(pm, d1.chart, d2.chart, perm);
      d.row_ids = d1.row_ids;
      for (int id : d2.row_ids) d.row_ids.push_back(kSecondFactorIdOffset + id);
      return d;
    });
  }
  auto polyhedron = [k1, k2, pm](const Point& q) {
    const LocalPolyhedron p1 = k1->local_polyhedron(pm->factor_point(q, 0));
    const LocalPolyhedron p2 = k2->local_polyhedron(pm->factor_point(q, 1));
    const int n1 = p1.chart.dim();
    const int n2 = p2.chart.dim();
    LocalPolyhedron out;
    out.chart = product_chart(pm, p1.chart, p2.chart, Mat::Identity(n1 + n2, n1 + n2));
    out.A_I = Mat::Zero(p1.A_I.rows() + p2.A_I.rows(), n1 + n2);
    out.A_I.block(0, 0, p1.A_I.rows(), n1) = p1.A_I;
    out.A_I.block(p1.A_I.rows(), n1, p2.A_I.rows(), n2) = p2.A_I;
    out.b_I = Vec(out.A_I.rows());
    out.b_I << p1.b_I, p2.b_I;
    out.A_E = Mat::Zero(p1.A_E.rows() + p2.A_E.rows(), n1 + n2);
    out.A_E.block(0, 0, p1.A_E.rows(), n1) = p1.A_E;
    out.A_E.block(p1.A_E.rows(), n1, p2.A_E.rows(), n2) = p2.A_E;
    out.b_E = Vec(out.A_E.rows());
    out.b_E << p1.b_E, p2.b_E;
    out.row_ids = p1.row_ids;
    for (int id : p2.row_ids) out.row_ids.push_back(kSecondFactorIdOffset + id);
    return out;
  };
  return std::make_shared<const CornerSet>(k1->name() + "x" + k2->name(), pm, k1->dim_k() + k2->dim_k(), membership,
                                           variants, polyhedron);
}

CornerSetPtr polyhedral_cone_set(const Mat& a_hat, int n) {
  const int k = static_cast<int>(a_hat.cols());
  if (k > n) throw BadParams("polyhedral cone set: more columns than the ambient dimension");
  auto rn = std::make_shared<const Euclidean>(n);
  auto membership = [a_hat, k, n](const Point& q, double tol) {
    if (a_hat.rows() > 0 && (a_hat * q.x.head(k)).maxCoeff() > tol) return false;
    return n == k || q.x.tail(n - k).lpNorm<Eigen::Infinity>() <= tol;
  };
  auto adapted = [a_hat, k, n, rn](const Point& q) {
    AdaptedChartData d;
    d.n = n;
    d.k = k;
    std::vector<int> active;
    double radius = kInf;
    for (Eigen::Index j = 0; j < a_hat.rows(); ++j) {
      const double val = a_hat.row(j).dot(q.x.head(k));
      if (val >= -Tolerances::feasibility)
        active.push_back(static_cast<int>(j));
      else
        radius = std::min(radius, -val / a_hat.row(j).norm());
    }
    d.ell = static_cast<int>(active.size());
    d.A_hat = Mat(d.ell, k);
    for (int i = 0; i < d.ell; ++i) d.A_hat.row(i) = a_hat.row(active[static_cast<std::size_t>(i)]);
    d.row_ids = active;
    const Chart shift = rn->chart(q, "shift");
    d.chart = Chart(shift.id(), q, n, radius, [c = q.x](const Vec& x) -> Vec { return x - c; },
                    [c = q.x](const Vec& y) -> Vec { return y + c; },
                    Chart::Jacobians{Mat::Identity(n, n), Mat::Identity(n, n)});
    return d;
  };
  auto polyhedron = [a_hat, k, n, rn](const Point& q) {
    LocalPolyhedron p;
    p.chart = rn->chart(q, "shift");
    p.A_I = Mat::Zero(a_hat.rows(), n);
    if (a_hat.rows() > 0) p.A_I.leftCols(k) = a_hat;
    p.b_I = -(p.A_I * q.x);
    p.A_E = Mat::Zero(n - k, n);
    if (n > k) p.A_E.rightCols(n - k).setIdentity();
    p.b_E = -(p.A_E * q.x);
    for (Eigen::Index j = 0; j < a_hat.rows(); ++j) p.row_ids.push_back(static_cast<int>(j));
    return p;
  };
  return std::make_shared<const CornerSet>("cone", rn, k, membership, std::vector<CornerSet::AdaptedSupplier>{adapted},
                                           polyhedron);
}

}  // namespace mcopt
