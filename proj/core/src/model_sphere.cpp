#include <cmath>
#include <numbers>

#include "mcopt/models.hpp"
#include "model_util.hpp"

namespace mcopt {

namespace {

constexpr double kEdgeActive = 1e-8;

Vec cross(const Vec& a, const Vec& b) {
  return Vec{{a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0)}};
}

Mat rotation_z(double angle) {
  Mat r = Mat::Identity(3, 3);
  r(0, 0) = r(1, 1) = std::cos(angle);
  r(1, 0) = std::sin(angle);
  r(0, 1) = -r(1, 0);
  return r;
}

}  // namespace

SpherePolygonData default_sphere_polygon(double beta) {
  if (!(beta > 0.0) || !(beta < 0.5 * std::numbers::pi)) throw BadParams("sphere-polygon: beta must lie in (0, pi/2)");
  SpherePolygonData d;
  for (int j = 0; j < 3; ++j) {
    const double th = 2.0 * std::numbers::pi * j / 3.0;
    d.vertices.push_back(Vec{{std::sin(beta) * std::cos(th), std::sin(beta) * std::sin(th), std::cos(beta)}});
  }
  const double th = std::numbers::pi / 3.0;
  d.target = Vec{{std::sin(2.0 * beta) * std::cos(th), std::sin(2.0 * beta) * std::sin(th), std::cos(2.0 * beta)}};
  return d;
}

std::vector<Vec> sphere_polygon_normals(const std::vector<Vec>& vertices) {
  if (vertices.size() != 3) throw BadParams("sphere-polygon: exactly three vertices are supported");
  const Vec centroid = vertices[0] + vertices[1] + vertices[2];
  std::vector<Vec> out;
  for (std::size_t i = 0; i < 3; ++i) {
    Vec nrm = cross(vertices[i], vertices[(i + 1) % 3]);
    if (nrm.norm() < 1e-12) throw BadParams("sphere-polygon: degenerate edge");
    nrm.normalize();
    if (nrm.dot(centroid) > 0.0) nrm = -nrm;
    out.push_back(nrm);
  }
  for (std::size_t i = 0; i < 3; ++i)
    if (!(out[i].dot(vertices[(i + 2) % 3]) < -1e-9)) throw BadParams("sphere-polygon: vertices are collinear");
  return out;
}

ProblemPtr build_sphere_polygon(const SpherePolygonData& data) {
  const std::vector<Vec> normals = sphere_polygon_normals(data.vertices);
  if (data.target.size() != 3 || data.target.norm() == 0.0) throw BadParams("sphere-polygon: target must be non-zero in R^3");
  auto s2 = std::make_shared<const Sphere>(2);

  auto membership = [normals](const Point& q, double tol) {
    for (const Vec& nrm : normals)
      if (nrm.dot(q.x) > tol) return false;
    return true;
  };
  auto adapted_for = [normals, s2](std::string kind) {
    return [normals, s2, kind](const Point& q) {
      const Vec c = q.x.normalized();
      const Mat e = s2->tangent_basis(Point(c));
      AdaptedChartData d;
      d.n = 2;
      d.k = 2;
      double angle = 0.5 * std::numbers::pi;
      std::vector<Vec> rows;
      for (std::size_t i = 0; i < normals.size(); ++i) {
        const double s = normals[i].dot(c);
        if (s >= -kEdgeActive) {
          rows.push_back(e.transpose() * normals[i]);
          d.row_ids.push_back(static_cast<int>(i));
        } else {
          angle = std::min(angle, std::asin(std::min(1.0, -s)));
        }
      }
      d.ell = static_cast<int>(rows.size());
      d.A_hat = Mat(d.ell, 2);
      for (int i = 0; i < d.ell; ++i) d.A_hat.row(i) = rows[static_cast<std::size_t>(i)].transpose();
      const Chart base = s2->chart(q, kind);
      const double radius = kind == "gnomonic" ? std::tan(0.9 * angle) : 0.9 * angle;
      d.chart = detail::with_radius(base, std::min(radius, base.radius()));
      return d;
    };
  };
  auto polyhedron = [normals, s2](const Point& q) {
    const Vec c = q.x.normalized();
    const Mat e = s2->tangent_basis(Point(c));
    LocalPolyhedron p;
    p.chart = s2->chart(q, "gnomonic");
    p.A_I = Mat(3, 2);
    p.b_I = Vec(3);
    for (Eigen::Index i = 0; i < 3; ++i) {
      p.A_I.row(i) = (e.transpose() * normals[static_cast<std::size_t>(i)]).transpose();
      p.b_I(i) = -normals[static_cast<std::size_t>(i)].dot(c);
      p.row_ids.push_back(static_cast<int>(i));
    }
    p.A_E = Mat(0, 2);
    p.b_E = Vec(0);
    return p;
  };

  auto prob = std::make_shared<ProblemInstance>();
  prob->name = "sphere-polygon";
  prob->M = s2;
  prob->N = s2;
  prob->K = std::make_shared<const CornerSet>(
      "triangle", s2, 2, membership,
      std::vector<CornerSet::AdaptedSupplier>{adapted_for("log"), adapted_for("gnomonic")}, polyhedron);
  const Vec t = data.target.normalized();
  prob->f = [t](const Point& p) { return -p.x.dot(t); };
  prob->f_gradient = [t](const Point&) -> Vec { return -t; };
  prob->g = [](const Point& p) { return p; };
  prob->g_jacobian = [](const Point&) -> Mat { return Mat::Identity(3, 3); };
  prob->analytic_hessian = [t](const Point& p, const std::string& rk, const std::string& lm,
                               const Vec&) -> std::optional<Mat> {
    if ((rk != "exp" && rk != "projection") || (lm != "adapted:0" && lm != "adapted:1")) return std::nullopt;
    return Mat(p.x.normalized().dot(t) * Mat::Identity(2, 2));
  };
  return prob;
}

namespace {

/// K = {(y, y)} in S^2 x S^2. Variant 0: (mean, difference) of gnomonic
/// coordinates; variant 1: (first, difference) of log coordinates.
CornerSetPtr diagonal_set(const std::shared_ptr<const ProductManifold>& n2, const std::shared_ptr<const Sphere>& s2) {
  auto membership = [](const Point& q, double tol) { return (q.x.head(3) - q.x.tail(3)).norm() <= tol; };
  auto variant = [n2, s2](bool mean) {
    return [n2, s2, mean](const Point& q) {
      const Vec y = q.x.head(3).normalized();
      const Chart phi = s2->chart(Point(y), mean ? "gnomonic" : "log");
      const Mat e = s2->tangent_basis(Point(y));
      const double a = mean ? 0.5 : 1.0;
      Mat fwd = Mat::Zero(4, 6);
      fwd.block(0, 0, 2, 3) = a * e.transpose();
      fwd.block(0, 3, 2, 3) = (1.0 - a) * e.transpose();
      fwd.block(2, 0, 2, 3) = e.transpose();
      fwd.block(2, 3, 2, 3) = -e.transpose();
      Mat inv = Mat::Zero(6, 4);
      inv.block(0, 0, 3, 2) = e;
      inv.block(0, 2, 3, 2) = (1.0 - a) * e;
      inv.block(3, 0, 3, 2) = e;
      inv.block(3, 2, 3, 2) = -a * e;
      AdaptedChartData d;
      d.n = 4;
      d.k = 2;
      d.ell = 0;
      d.A_hat = Mat(0, 2);
      const double radius = (mean ? 2.0 : 1.0) / (mean ? 1.2 : 1.5);
      d.chart = Chart(
          std::string(mean ? "diagonal/mean-gnomonic@" : "diagonal/first-log@") + detail::center_tag(q.x),
          Point(Vec(q.x)), 4, radius,
          [phi, a](const Vec& x) -> Vec {
            const Vec a1 = phi.forward(Point(Vec(x.head(3))));
            const Vec a2 = phi.forward(Point(Vec(x.tail(3))));
            Vec out(4);
            out << a * a1 + (1.0 - a) * a2, a1 - a2;
            return out;
          },
          [phi, a](const Vec& z) -> Vec {
            const Vec m = z.head(2);
            const Vec dlt = z.tail(2);
            Vec out(6);
            out << phi.inverse(Vec(m + (1.0 - a) * dlt)).x, phi.inverse(Vec(m - a * dlt)).x;
            return out;
          },
          Chart::Jacobians{fwd, inv});
      return d;
    };
  };
  auto polyhedron = [s2](const Point& q) {
    const Vec y1 = q.x.head(3).normalized();
    const Vec y2 = q.x.tail(3).normalized();
    Vec mid = y1 + y2;
    mid = mid.norm() > 1e-6 ? Vec(mid.normalized()) : y1;
    const Chart phi = s2->chart(Point(mid), "gnomonic");
    const Vec a1 = phi.forward(Point(y1));
    const Vec a2 = phi.forward(Point(y2));
    Vec c0(4);
    c0 << 0.5 * (a1 + a2), a1 - a2;
    LocalPolyhedron p;
    p.chart = Chart(
        "diagonal/polyhedron@" + detail::center_tag(q.x), q, 4, 1.0,
        [phi, c0](const Vec& x) -> Vec {
          const Vec b1 = phi.forward(Point(Vec(x.head(3))));
          const Vec b2 = phi.forward(Point(Vec(x.tail(3))));
          Vec out(4);
          out << 0.5 * (b1 + b2), b1 - b2;
          return out - c0;
        },
        [phi, c0](const Vec& z) -> Vec {
          const Vec w = z + c0;
          Vec out(6);
          out << phi.inverse(Vec(w.head(2) + 0.5 * w.tail(2))).x, phi.inverse(Vec(w.head(2) - 0.5 * w.tail(2))).x;
          return out;
        });
    p.A_I = Mat(0, 4);
    p.b_I = Vec(0);
    p.A_E = Mat::Zero(2, 4);
    p.A_E.rightCols(2).setIdentity();
    p.b_E = -c0.tail(2);
    return p;
  };
  return std::make_shared<const CornerSet>("diagonal", n2, 2, membership,
                                           std::vector<CornerSet::AdaptedSupplier>{variant(true), variant(false)},
                                           polyhedron);
}

}  // namespace

ProblemPtr build_diagonal_constraint(const DiagonalData& data) {
  if (data.target.size() != 3 || data.target.norm() == 0.0)
    throw BadParams("diagonal-constraint: target must be non-zero in R^3");
  auto s2 = std::make_shared<const Sphere>(2);
  auto n2 = std::make_shared<const ProductManifold>(std::vector<ManifoldPtr>{s2, s2});
  auto prob = std::make_shared<ProblemInstance>();
  prob->name = "diagonal-constraint";
  prob->M = s2;
  prob->N = n2;
  prob->K = diagonal_set(n2, s2);
  const Vec t = data.target.normalized();
  prob->f = [t](const Point& p) { return -p.x.dot(t); };
  prob->f_gradient = [t](const Point&) -> Vec { return -t; };

  Mat left;
  Vec offset = Vec::Zero(3);
  switch (data.variant) {
    case DiagonalVariant::rotation:
      left = rotation_z(data.angle);
      break;
    case DiagonalVariant::constant:
      if (data.q0.size() != 3 || data.q0.norm() == 0.0) throw BadParams("diagonal-constraint: q0 must be non-zero in R^3");
      left = Mat::Zero(3, 3);
      offset = data.q0.normalized();
      break;
    case DiagonalVariant::identical:
      left = Mat::Identity(3, 3);
      break;
  }
  prob->g = [left, offset](const Point& p) {
    Vec out(6);
    out << left * p.x + offset, p.x;
    return Point(out);
  };
  prob->g_jacobian = [left](const Point&) -> Mat {
    Mat j(6, 3);
    j << left, Mat::Identity(3, 3);
    return j;
  };
  return prob;
}

}  // namespace mcopt
