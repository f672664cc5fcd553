#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcopt/models.hpp"
#include "mcopt/qp.hpp"
#include "mcopt/solver.hpp"
#include "mcopt_oracles/oracles.hpp"

using namespace mcopt;

namespace {

ClassicalNlpData box_qp() {
  ClassicalNlpData d;
  d.Q = Mat::Identity(2, 2);
  d.c = Vec{{-1.0, -1.0}};
  d.A = Mat(2, 2);
  d.A << 1, 1, 1, 0;
  d.b = Vec{{-1.0, -5.0}};
  d.n_I = 2;
  return d;
}

/// f = -cos x on R with no constraints.
ProblemPtr cosine_problem() {
  auto prob = std::make_shared<ProblemInstance>();
  prob->M = std::make_shared<const Euclidean>(1);
  prob->N = std::make_shared<const Euclidean>(1);
  prob->K = polyhedral_cone_set(Mat(0, 1), 1);
  prob->f = [](const Point& p) { return -std::cos(p.x(0)); };
  prob->f_gradient = [](const Point& p) -> Vec { return Vec::Constant(1, std::sin(p.x(0))); };
  prob->g = [](const Point& p) { return p; };
  return prob;
}

}  // namespace

TEST_CASE("qp subproblem") {
  QPProblem qp;
  qp.H = Mat::Identity(2, 2);
  qp.g = Vec{{1.0, -2.0}};
  qp.A_I = Mat(0, 2);
  qp.b_I = Vec(0);
  qp.A_E = Mat(0, 2);
  qp.b_E = Vec(0);
  CHECK((solve_qp(qp).v + qp.g).norm() < 1e-12);

  // a'v <= 0 with a'g < 0: the unconstrained step -g is cut back to the plane.
  const Vec a{{1.0, 1.0}};
  qp.g = Vec{{-2.0, 1.0}};
  qp.A_I = a.transpose();
  qp.b_I = Vec::Zero(1);
  const QPResult r = solve_qp(qp);
  const Vec expected = -(qp.g - (a.dot(qp.g) / a.squaredNorm()) * a);
  CHECK((r.v - expected).norm() < 1e-10);
  CHECK(r.lambda_I(0) == doctest::Approx(-a.dot(qp.g) / a.squaredNorm()));
  CHECK((qp.H * r.v + qp.g + qp.A_I.transpose() * r.lambda_I).norm() < 1e-10);

  QPProblem eq;
  eq.H = Vec{{2.0, 1.0}}.asDiagonal();
  eq.g = Vec{{1.0, 1.0}};
  eq.A_I = Mat(0, 2);
  eq.b_I = Vec(0);
  eq.A_E = a.transpose();
  eq.b_E = Vec::Constant(1, 1.0);
  Mat kkt(3, 3);
  kkt << 2, 0, 1, 0, 1, 1, 1, 1, 0;
  const Vec sol = kkt.lu().solve(Vec{{-1.0, -1.0, 1.0}});
  const QPResult re = solve_qp(eq);
  CHECK((re.v - sol.head(2)).norm() < 1e-10);
  CHECK(re.lambda_E(0) == doctest::Approx(sol(2)));

  QPProblem bad = qp;
  bad.A_I = Mat(2, 2);
  bad.A_I << 1, 0, -1, 0;
  bad.b_I = Vec{{-1.0, -1.0}};
  CHECK_THROWS_AS(solve_qp(bad), QPInfeasible);
}

TEST_CASE("merit line search") {
  const ClassicalNlpData d = box_qp();
  const ProblemPtr qp = build_classical_nlp(d);
  const SqpLocalProblem lp(qp, Point(Vec{{-1.0, 0.0}}), "translation");
  const Vec v{{0.8, 0.2}};
  const LineSearchResult full = merit_and_linesearch(lp, v, 10.0, lp.gradient().dot(v));
  CHECK(full.t == 1.0);
  CHECK(full.merit_after < full.merit_before);

  const ProblemPtr cosine = cosine_problem();
  const SqpLocalProblem lc(cosine, Point(Vec::Constant(1, 0.5)), "translation");
  const Vec big = Vec::Constant(1, -5.0);
  const LineSearchResult cut = merit_and_linesearch(lc, big, 10.0, lc.gradient().dot(big));
  CHECK(cut.t < 1.0);
  CHECK(cut.merit_after < cut.merit_before);
  CHECK(cosine->f(Point(Vec::Constant(1, 0.5) + big)) > cosine->f(Point(Vec::Constant(1, 0.5))));

  const SpherePolygonData data = default_sphere_polygon();
  const ProblemPtr tri = build_sphere_polygon(data);
  const Point c((data.vertices[0] + data.vertices[1] + data.vertices[2]).normalized());
  const SqpLocalProblem ls(tri, c, "exp");
  const Vec far = ls.gradient().normalized() * -4.0;
  const LineSearchResult guarded = merit_and_linesearch(ls, far, 10.0, ls.gradient().dot(far));
  CHECK(guarded.t * far.norm() < std::numbers::pi);

  CHECK_THROWS_AS(merit_and_linesearch(lc, Vec::Constant(1, 1.0), 10.0, -1.0, 3), LineSearchFailure);
}

TEST_CASE("convex QP reaches its closed-form solution") {
  const ClassicalNlpData d = box_qp();
  const SolveResult r = solve(build_classical_nlp(d), Point(Vec::Zero(2)));
  REQUIRE(r.status == SolveStatus::converged);
  CHECK((r.point.x - Vec{{0.5, 0.5}}).norm() < 1e-8);
  CHECK(r.iterations.size() <= 20);
  REQUIRE(r.certificate);
  CHECK(r.certificate->residual <= Tolerances::kkt);
  // The QP's multiplier for the active row agrees with the certificate.
  REQUIRE(r.qp_multipliers.count(0));
  CHECK(std::abs(r.qp_multipliers.at(0) - 0.5) < 1e-6);
  for (std::size_t i = 1; i < r.iterations.size(); ++i)
    CHECK(r.iterations[i].merit_after <= r.iterations[i].merit_before + 1e-12);
}

TEST_CASE("remark instance") {
  const SolveResult r = solve(build_remark_counterexample(), Point(Vec{{-0.5, 0.3}}));
  REQUIRE(r.status == SolveStatus::converged);
  CHECK(std::abs(r.point.x(0)) < 1e-8);
  REQUIRE(r.certificate);
  CHECK((r.certificate->mu_frame - Vec{{1.0, 0.0}}).norm() < 1e-8);
}

TEST_CASE("one iteration from a certified minimizer does not move") {
  const Model m = build_model("classical-nlp");
  SolveOptions opts;
  opts.max_iter = 1;
  const SolveResult r = solve(m.problem, *m.reference_point, opts);
  for (const auto& it : r.iterations) CHECK(it.step_norm <= 1e-8);
  CHECK((r.point.x - m.reference_point->x).norm() <= 1e-8);
}

TEST_CASE("sphere triangle from an interior start") {
  const SpherePolygonData data = default_sphere_polygon();
  const ProblemPtr prob = build_sphere_polygon(data);
  const Point c((data.vertices[0] + data.vertices[1] + data.vertices[2]).normalized());
  std::vector<Point> ends;
  for (const std::string kind : {"exp", "projection"}) {
    SolveOptions opts;
    opts.retraction = kind;
    const SolveResult r = solve(prob, c, opts);
    REQUIRE(r.status == SolveStatus::converged);
    ends.push_back(r.point);
  }
  CHECK(Sphere::distance(ends[0].x, ends[1].x) < 1e-6);

  oracles::GridRegion region;
  region.kind = oracles::GridRegion::Kind::sphere_cap;
  region.center = c.x;
  region.radius = 0.6;
  region.refinements = 2;
  const oracles::GridResult g = oracles::grid_minimize(*prob, region, 1e-3);
  // A grid of spacing h misses a boundary minimizer by about |grad f| h.
  CHECK(prob->f(ends[0]) <= g.value + 1e-12);
  CHECK(g.value - prob->f(ends[0]) < 1e-3);
  // The target lies across edge 0, so the minimizer is its projection onto that great circle.
  const Vec nrm = sphere_polygon_normals(data.vertices)[0];
  const Vec t = data.target.normalized();
  CHECK((ends[0].x - (t - t.dot(nrm) * nrm).normalized()).norm() < 1e-8);
}

TEST_CASE("hessian modes") {
  const ClassicalNlpData d = box_qp();
  for (HessianMode mode : {HessianMode::bfgs, HessianMode::identity}) {
    SolveOptions opts;
    opts.hessian_mode = mode;
    const SolveResult r = solve(build_classical_nlp(d), Point(Vec::Zero(2)), opts);
    INFO(to_string(mode));
    CHECK(r.status == SolveStatus::converged);
    CHECK((r.point.x - Vec{{0.5, 0.5}}).norm() < 1e-7);
  }
  CHECK(hessian_mode_from_string(to_string(HessianMode::bfgs)) == HessianMode::bfgs);
  CHECK_THROWS_AS(hessian_mode_from_string("newton"), BadParams);
}
