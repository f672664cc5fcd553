#include <doctest.h>

#include <cmath>

#include "mcopt/models.hpp"
#include "mcopt_oracles/oracles.hpp"

using namespace mcopt;

TEST_CASE("finite differences") {
  Mat a(2, 3);
  a << 1, 2, 3, -4, 5, 0.5;
  const Mat j = oracles::fd_jacobian([&](const Vec& x) { return Vec(a * x); }, Vec::Ones(3));
  CHECK((j - a).norm() < 1e-9);

  Mat q(2, 2);
  q << 2, 1, 1, 4;
  const Mat h = oracles::fd_hessian([&](const Vec& x) { return 0.5 * x.dot(q * x); }, Vec{{0.3, -0.7}});
  CHECK((h - q).norm() < 1e-6);

  const Mat s = oracles::fd_hessian([](const Vec& x) { return std::sin(x(0)); }, Vec::Constant(1, 0.3));
  CHECK(s(0, 0) == doctest::Approx(-std::sin(0.3)).epsilon(1e-6));

  CHECK_THROWS_AS(oracles::fd_jacobian([](const Vec& x) { return x; }, Vec::Zero(1), 0.0), DomainError);
  CHECK_THROWS_AS(oracles::fd_hessian([](const Vec& x) { return x(0); }, Vec::Zero(1), -1.0), DomainError);
}

TEST_CASE("tangent cone oracle") {
  ClassicalNlpData d;
  d.Q = Mat::Identity(3, 3);
  d.c = Vec::Zero(3);
  d.A = Mat(2, 3);
  d.A << 1, 0, 0, 0, 1, 1;
  d.b = Vec::Zero(2);
  d.n_I = 1;
  d.n_E = 1;
  const ProblemPtr prob = build_classical_nlp(d);
  const Point p(Vec::Zero(3));
  CHECK(oracles::tangent_cone_oracle(*prob, p, Vec{{-1.0, 1.0, -1.0}}));
  CHECK(oracles::tangent_cone_oracle(*prob, p, Vec{{0.0, 1.0, -1.0}}));
  CHECK_FALSE(oracles::tangent_cone_oracle(*prob, p, Vec{{-1.0, 1.0, 0.0}}));
  CHECK_FALSE(oracles::tangent_cone_oracle(*prob, p, Vec{{1.0, 0.0, 0.0}}));
  CHECK_THROWS_AS(oracles::tangent_cone_oracle(*prob, Point(Vec{{1.0, 0.0, 0.0}}), Vec::Ones(3)), InfeasiblePoint);

  const ProblemPtr sphere = build_sphere_polygon(default_sphere_polygon());
  const auto normals = sphere_polygon_normals(default_sphere_polygon().vertices);
  const Point v0(default_sphere_polygon().vertices[0]);
  const Mat basis = sphere->M->tangent_basis(v0);
  // Inward along the bisector of the two edges meeting at v0.
  const Vec inward = -(normals[0] + normals[2]);
  const Vec w = basis.transpose() * inward;
  const std::vector<double> dist = oracles::tangential_distances(*sphere, v0, w.normalized());
  CHECK(dist.back() < 1e-3);
}

TEST_CASE("grid minimization") {
  ClassicalNlpData d;
  d.Q = Mat::Identity(2, 2);
  d.c = Vec{{-1.0, -1.0}};
  d.A = Mat(1, 2);
  d.A << 1, 1;
  d.b = Vec::Constant(1, -1.0);
  d.n_I = 1;
  const ProblemPtr prob = build_classical_nlp(d);
  oracles::GridRegion box;
  box.lower = Vec::Constant(2, -1.0);
  box.upper = Vec::Constant(2, 1.0);
  box.refinements = 2;
  const oracles::GridResult r = oracles::grid_minimize(*prob, box, 1e-3);
  CHECK((r.point.x - Vec::Constant(2, 0.5)).norm() < 2e-3);
  CHECK(r.value == doctest::Approx(-0.75).epsilon(1e-5));

  const oracles::GridResult coarse = oracles::grid_minimize(*prob, box, 2e-3);
  CHECK(coarse.value >= r.value - 1e-12);
  CHECK(coarse.value - r.value < 1e-5);

  d.Q = Mat::Zero(2, 2);
  d.c = Vec::Zero(2);
  d.d = 3.0;
  const oracles::GridResult flat = oracles::grid_minimize(*build_classical_nlp(d), box, 1e-2);
  CHECK(flat.value == 3.0);

  ClassicalNlpData big;
  big.Q = Mat::Identity(4, 4);
  big.c = Vec::Zero(4);
  big.A = Mat::Ones(1, 4);
  big.b = Vec::Constant(1, -1.0);
  big.n_I = 1;
  oracles::GridRegion box4;
  box4.lower = -Vec::Ones(4);
  box4.upper = Vec::Ones(4);
  CHECK_THROWS_AS(oracles::grid_minimize(*build_classical_nlp(big), box4, 0.1), DimensionTooLarge);
}

TEST_CASE("grid quadratic on a cone") {
  Mat h(2, 2);
  h << 1, 0, 0, -1;
  // Quadrant x <= 0, y <= 0: minimum -1 on the y axis.
  const PolyhedralCone quad(2, Mat::Identity(2, 2), Mat::Zero(0, 2));
  CHECK(oracles::grid_min_quadratic_on_cone(h, quad) == doctest::Approx(-1.0).epsilon(1e-6));
  // Line y = 0: minimum 1.
  Mat e(1, 2);
  e << 0, 1;
  CHECK(oracles::grid_min_quadratic_on_cone(h, PolyhedralCone(2, Mat::Zero(0, 2), e)) == doctest::Approx(1.0));
  CHECK(std::isinf(oracles::grid_min_quadratic_on_cone(h, PolyhedralCone(2, Mat::Zero(0, 2), Mat::Identity(2, 2)))));
  CHECK_THROWS_AS(oracles::grid_min_quadratic_on_cone(Mat::Identity(4, 4), PolyhedralCone::whole_space(4)),
                  DimensionTooLarge);
}
