#include <doctest.h>

#include <random>

#include "mcopt/models.hpp"
#include "mcopt/secondorder.hpp"
#include "mcopt_oracles/oracles.hpp"

using namespace mcopt;

namespace {

const Point kOrigin(Vec::Zero(2));

HessianForm remark_hessian(const std::string& map, bool analytic, double alpha = 1.0) {
  const ProblemPtr prob = build_remark_counterexample(alpha);
  HessianOptions opts;
  opts.prefer_analytic = analytic;
  return lagrangian_hessian(pull_back(prob, kOrigin, "", map), Vec{{1.0, 0.0}}, opts);
}

ClassicalNlpData with_equality() {
  // f = 0.5|x|^2 + x3, x1 + x2 <= 0, x3 + 0.5 x1^2 = 0.
  ClassicalNlpData d;
  d.Q = Mat::Identity(3, 3);
  d.c = Vec{{0.0, 0.0, 1.0}};
  d.A = Mat(2, 3);
  d.A << 1, 1, 0, 0, 0, 1;
  d.b = Vec::Zero(2);
  Mat p1 = Mat::Zero(3, 3);
  p1(0, 0) = 1.0;
  d.P = {Mat::Zero(3, 3), p1};
  d.n_I = 1;
  d.n_E = 1;
  return d;
}

}  // namespace

TEST_CASE("remark Hessians") {
  for (bool analytic : {true, false}) {
    INFO("analytic " << analytic);
    const HessianForm h1 = remark_hessian("S01", analytic);
    CHECK(h1.matrix.norm() < 1e-6);
    CHECK(h1.analytic == analytic);
    const HessianForm h2 = remark_hessian("S02", analytic, 1.5);
    CHECK((h2.matrix - Vec{{0.0, 3.0}}.asDiagonal().toDenseMatrix()).norm() < 1e-6);
    const HessianForm h3 = remark_hessian("S03", analytic);
    CHECK(h3(Vec{{1.0, 1.0}}) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::abs(h3.matrix(0, 1) - 1.0) < 1e-6);
    CHECK((h3.matrix - h3.matrix.transpose()).norm() <= 1e-8 * (1.0 + h3.matrix.norm()));
  }
}

TEST_CASE("lagrangian value") {
  const ProblemPtr prob = build_remark_counterexample();
  const Vec mu{{1.0, 0.0}};
  const PulledBackProblem pb3 = pull_back(prob, kOrigin, "", "S03");
  CHECK(lagrangian_value(pb3, Vec::Zero(2), mu) == 0.0);
  const Vec v{{0.3, 0.2}};
  CHECK(lagrangian_value(pb3, v, mu) == doctest::Approx(0.3 * 0.2));

  const ClassicalNlpData d = with_equality();
  const ProblemPtr nlp = build_classical_nlp(d);
  const Point p(Vec::Zero(3));
  const PulledBackProblem pb = pull_back(nlp, p);
  const Vec m{{0.4, -1.0}};
  const Vec w{{0.1, -0.2, 0.05}};
  const double classical = nlp->f(Point(w)) + m.dot(nlp->g(Point(w)).x);
  CHECK(lagrangian_value(pb, w, m) == doctest::Approx(classical).epsilon(1e-12));
  CHECK_THROWS_AS(lagrangian_value(pull_back(prob, kOrigin, "", "S03"), Vec{{0.0, 2.0}}, mu), DomainError);
}

TEST_CASE("the Hessian requires stationarity") {
  const ProblemPtr prob = build_remark_counterexample();
  CHECK_THROWS_AS(lagrangian_hessian(pull_back(prob, kOrigin), Vec::Zero(2)), NotStationary);
}

TEST_CASE("critical cone") {
  SUBCASE("remark") {
    const ProblemPtr prob = build_remark_counterexample();
    const LocalModel lm = local_model(*prob, kOrigin);
    const CriticalCone cc = critical_cone(lm, fit_multiplier(lm));
    for (const PolyhedralCone* c : {&cc.cone_M_frame, &cc.cone_N_frame, &cc.cone_M_mult}) {
      CHECK(contains(*c, Vec{{0.0, 1.0}}));
      CHECK(contains(*c, Vec{{0.0, -1.0}}));
      CHECK_FALSE(contains(*c, Vec{{-1.0, 0.0}}));
    }
  }
  SUBCASE("no active constraint") {
    ClassicalNlpData d;
    d.Q = Mat::Identity(2, 2);
    d.c = Vec::Zero(2);
    d.A = Mat::Ones(1, 2);
    d.b = Vec::Constant(1, -1.0);
    d.n_I = 1;
    const LocalModel lm = local_model(*build_classical_nlp(d), kOrigin);
    const CriticalCone cc = critical_cone(lm, fit_multiplier(lm));
    CHECK(span_basis(cc.cone_M).cols() == 2);
    CHECK(is_subspace(cc.cone_M));
  }
  SUBCASE("two definitions agree and g' maps C_M into C_N") {
    const ClassicalNlpData d = with_equality();
    const ProblemPtr prob = build_classical_nlp(d);
    // Both constraints active at 0, eta = (0, -1).
    const LocalModel lm = local_model(*prob, Point(Vec::Zero(3)));
    const KKTCertificate cert = fit_multiplier(lm);
    REQUIRE(cert.is_kkt());
    const CriticalCone cc = critical_cone(lm, cert);
    std::mt19937_64 rng(3);
    for (const Vec& v : sample_cone(cc.cone_M, 200, rng)) {
      CHECK(contains(cc.cone_M_mult, v, 1e-8));
      CHECK(contains(cc.cone_N, Vec(lm.G * v), 1e-8));
    }
    for (const Vec& w : sample_cone(cc.cone_N, 50, rng)) CHECK(std::abs(cert.mu_chart.dot(w)) < 1e-9);
  }
  SUBCASE("strictly active inequality") {
    const ProblemPtr prob = build_remark_counterexample();
    const LocalModel lm = local_model(*prob, kOrigin);
    const CriticalCone cc = critical_cone(lm, fit_multiplier(lm));
    CHECK(cc.cone_M_mult.n_ineq() == 0);
    CHECK(cc.cone_M_mult.n_eq() == 1);
  }
  SUBCASE("invalid certificate") {
    const ProblemPtr prob = build_remark_counterexample();
    const LocalModel lm = local_model(*prob, Point(Vec{{-1.0, 0.0}}));
    CHECK_THROWS_AS(critical_cone(lm, fit_multiplier(lm)), InvalidCertificate);
  }
}

TEST_CASE("invariance on the critical cone") {
  const ProblemPtr prob = build_remark_counterexample();
  const LocalModel lm = local_model(*prob, kOrigin);
  const KKTCertificate cert = fit_multiplier(lm);
  HessianOptions fd;
  fd.prefer_analytic = false;
  const PulledBackProblem pb1 = pull_back(prob, kOrigin, "", "S01");
  const PulledBackProblem pb3 = pull_back(prob, kOrigin, "", "S03");
  const InvarianceReport r = invariance_check(lm, cert, pb1, pb3, 1e-8, 200, 7, fd);
  CHECK(r.pass);
  CHECK(r.on_cone_samples >= 200);
  CHECK(r.on_cone_max <= 1e-8);
  CHECK(r.off_cone_max > 0.99);
  CHECK(r.h2(Vec{{1.0, 1.0}}) - r.h1(Vec{{1.0, 1.0}}) == doctest::Approx(2.0).epsilon(1e-6));

  const PulledBackProblem pb2 = pull_back(prob, kOrigin, "", "S02");
  const InvarianceReport bad = invariance_check(lm, cert, pb1, pb2, 1e-8, 200, 7, fd);
  CHECK_FALSE(bad.both_adapted);
  CHECK(bad.h2(Vec{{0.0, 1.0}}) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(bad.h2(Vec{{1.0, 0.0}})) < 1e-6);
}

TEST_CASE("second-order consistency") {
  const ProblemPtr prob = build_remark_counterexample();
  const LinearizingMap s1 = make_linearizing_map(*prob, kOrigin, "S01");
  const LinearizingMap s3 = make_linearizing_map(*prob, kOrigin, "S03");
  CHECK(second_order_consistent(s1, s1).consistent);
  const ConsistencyReport r = second_order_consistent(s1, s3);
  CHECK_FALSE(r.consistent);
  CHECK(r.second_derivative_norm > 0.5);
  // Theta(v) = (v1 + v1 v2, v2), so Theta''[v, v] = (2 v1 v2, 0).
  const Vec t = theta_second_derivative(s1, s3, Vec{{1.0, 1.0}});
  CHECK(std::abs(std::abs(t(0)) - 2.0) < 1e-5);
  CHECK(std::abs(t(1)) < 1e-6);

  const Euclidean r2(2);
  const Point p(Vec{{0.5, 0.5}});
  CHECK(second_order_consistent(linearizing_map_from_chart(r2, r2.chart(p, "shift")),
                                linearizing_map_from_chart(r2, r2.chart(p, "rotated")))
            .consistent);
}

TEST_CASE("second derivative of Theta stays in the tangent space of K") {
  const ClassicalNlpData d = with_equality();
  const ProblemPtr prob = build_classical_nlp(d);
  const Point q(Vec::Zero(2));
  const LinearizingMap s0 = make_linearizing_map(*prob, q, "adapted:0");
  const LinearizingMap s1 = make_linearizing_map(*prob, q, "adapted:1");
  const CornerSetPtr k = prob->K;
  std::mt19937_64 rng(19);
  for (const Vec& v : sample_cone(inner_tangent_cone(*k, q), 50, rng)) {
    CHECK(std::abs(theta_second_derivative(s0, s1, v.normalized())(1)) < 1e-5);
  }
}

TEST_CASE("sosc and sonc") {
  Mat eq(1, 2);
  eq << 1, 0;
  const PolyhedralCone line(2, Mat(0, 2), eq);
  CHECK(sosc_check(Mat::Identity(2, 2), line).kind == VerdictKind::holds);

  const Mat saddle = Vec{{1.0, -1.0}}.asDiagonal();
  const PolyhedralCone plane = PolyhedralCone::whole_space(2);
  const Verdict v = sosc_check(saddle, plane);
  CHECK(v.kind == VerdictKind::fails);
  REQUIRE(v.witness);
  CHECK(std::abs(std::abs((*v.witness)(1)) - 1.0) < 1e-9);
  CHECK(v.min_value == doctest::Approx(-1.0));

  CHECK(sonc_check(Mat::Zero(2, 2), plane).kind == VerdictKind::holds);
  CHECK(sonc_check(remark_hessian("S01", false).matrix, line).kind == VerdictKind::holds);
  CHECK(sonc_check(saddle, plane).kind == VerdictKind::fails);

  // A cone whose minimum sits on a face: H = [[1, -2], [-2, 1]] on the quadrant.
  Mat h(2, 2);
  h << 1, -2, -2, 1;
  const PolyhedralCone quad(2, -Mat::Identity(2, 2), Mat(0, 2));
  const Verdict q = sosc_check(h, quad);
  CHECK(q.kind == VerdictKind::fails);
  CHECK(q.min_value == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(q.min_value == doctest::Approx(oracles::grid_min_quadratic_on_cone(h, quad, 1e-3)).epsilon(1e-5));

  CHECK(sosc_check(Mat::Identity(13, 13), PolyhedralCone(13, -Mat::Identity(13, 13), Mat(0, 13))).kind ==
        VerdictKind::inconclusive);
}

TEST_CASE("convex QP minimizer satisfies SOSC and is a strict local minimum") {
  const Model m = build_model("classical-nlp");
  REQUIRE(m.reference_point);
  const Point p = *m.reference_point;
  const LocalModel lm = local_model(*m.problem, p);
  const KKTCertificate cert = fit_multiplier(lm);
  REQUIRE(cert.is_kkt());
  const CriticalCone cc = critical_cone(lm, cert);
  const HessianForm h = lagrangian_hessian(pull_back(m.problem, p), cert.mu_frame);
  const Verdict v = sosc_check(h.matrix, cc.cone_M_frame);
  CHECK(v.kind == VerdictKind::holds);
  const double grid = oracles::grid_min_quadratic_on_cone(h.matrix, cc.cone_M_frame, 1e-3);
  CHECK(std::abs(grid - v.min_value) < 1e-5);

  const Retraction r = m.problem->M->default_retraction(p);
  std::mt19937_64 rng(41);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(1e-4, 1e-2);
  int feasible = 0;
  while (feasible < 100) {
    Vec v2{{nd(rng), nd(rng)}};
    v2 *= ud(rng) / v2.norm();
    const Point x = r(v2);
    if (!m.problem->feasible(x)) continue;
    ++feasible;
    CHECK(m.problem->f(x) > m.problem->f(p));
  }
}

TEST_CASE("gradient of the pulled-back Lagrangian does not depend on the retraction") {
  const SpherePolygonData data = default_sphere_polygon();
  const ProblemPtr prob = build_sphere_polygon(data);
  const Point p((data.vertices[0] + 2.0 * data.vertices[1] + data.vertices[2]).normalized());
  const Vec mu{{0.3, -0.7}};
  const Vec expected = frame_gradient(*prob, p) + frame_jacobian(*prob, p).transpose() * mu;
  for (const auto& kind : prob->M->retraction_kinds()) {
    const PulledBackProblem pb = pull_back(prob, p, kind);
    CHECK((lagrangian_gradient(pb, mu) - expected).norm() <= 1e-6);
  }
}
