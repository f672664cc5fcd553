#include <doctest.h>

#include <random>

#include "mcopt/firstorder.hpp"
#include "mcopt/models.hpp"
#include "mcopt/solver.hpp"

using namespace mcopt;

namespace {

/// M = R^m, N = R^n, K = polyhedral_cone_set(a_hat, n), affine g.
ProblemPtr linear_problem(const Vec& grad, const Mat& jac, const Mat& a_hat) {
  auto prob = std::make_shared<ProblemInstance>();
  prob->name = "linear";
  const auto m = static_cast<int>(jac.cols());
  const auto n = static_cast<int>(jac.rows());
  prob->M = std::make_shared<const Euclidean>(m);
  prob->N = std::make_shared<const Euclidean>(n);
  prob->K = polyhedral_cone_set(a_hat, n);
  prob->f = [grad](const Point& p) { return grad.dot(p.x); };
  prob->g = [jac](const Point& p) { return Point(jac * p.x); };
  return prob;
}

ClassicalNlpData box_qp() {
  // f = 0.5|x|^2 - x1 - x2; x1 + x2 <= 1 is active at (1/2, 1/2), x1 <= 5 is not.
  ClassicalNlpData d;
  d.Q = Mat::Identity(2, 2);
  d.c = Vec{{-1.0, -1.0}};
  d.A = Mat(2, 2);
  d.A << 1, 1, 1, 0;
  d.b = Vec{{-1.0, -5.0}};
  d.n_I = 2;
  return d;
}

}  // namespace

TEST_CASE("transversality") {
  const ProblemPtr full = linear_problem(Vec::Zero(2), Mat::Identity(2, 2), Mat::Identity(1, 2));
  CHECK(check_transversality(*full, Point(Vec::Zero(2))));

  auto point_k = std::make_shared<ProblemInstance>();
  point_k->M = std::make_shared<const Euclidean>(1);
  point_k->N = std::make_shared<const Euclidean>(1);
  point_k->K = polyhedral_cone_set(Mat(0, 0), 1);
  point_k->f = [](const Point& p) { return p.x(0); };
  point_k->g = [](const Point& p) { return Point(Vec::Constant(1, p.x(0) * p.x(0))); };
  CHECK_FALSE(check_transversality(*point_k, Point(Vec::Zero(1))));

  const SpherePolygonData data = default_sphere_polygon();
  const ProblemPtr tri = build_sphere_polygon(data);
  CHECK(check_transversality(*tri, Point((data.vertices[0] + data.vertices[1]).normalized())));
  CHECK_THROWS_AS(check_transversality(*tri, Point(Vec{{0.0, 0.0, -1.0}})), InfeasiblePoint);
}

TEST_CASE("MFCQ and ZKRCQ") {
  const ProblemPtr single = linear_problem(Vec::Zero(2), Mat::Identity(2, 2), Vec::Unit(2, 0).transpose());
  const MfcqResult r = check_mfcq(*single, Point(Vec::Zero(2)));
  CHECK(r.holds);
  CHECK(r.witness(0) < 0.0);
  CHECK(check_zkrcq(*single, Point(Vec::Zero(2))));

  Mat opp(2, 2);
  opp << 1, 0, -1, 0;
  const ProblemPtr opposing = linear_problem(Vec::Zero(2), opp, Mat::Identity(2, 2));
  CHECK_FALSE(check_mfcq(*opposing, Point(Vec::Zero(2))).holds);
  CHECK_FALSE(check_zkrcq(*opposing, Point(Vec::Zero(2))));

  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 200; ++t) {
    const int m = 1 + t % 4;
    const int n = 1 + (t / 4) % 4;
    const int k = n - (t % 3 == 0 ? 1 : 0);
    Mat jac(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) jac(i, j) = nd(rng);
    if (t % 5 == 0) jac.row(0) = jac.row(n - 1);
    Mat a_hat = Mat::Identity(k, k);
    const ProblemPtr prob = linear_problem(Vec::Zero(m), jac, a_hat);
    const Point p(Vec::Zero(m));
    const CQReport cq = constraint_qualifications(*prob, p);
    CHECK(cq.mfcq == cq.zkrcq);
    if (cq.licq) CHECK(cq.zkrcq);
    if (cq.zkrcq) CHECK(cq.transversal);
  }
}

TEST_CASE("LICQ") {
  const ClassicalNlpData d = box_qp();
  CHECK(check_licq(*build_classical_nlp(d), Point(Vec{{0.5, 0.5}})));

  Mat dup(2, 2);
  dup << 1, 0, 1, 0;
  CHECK_FALSE(check_licq(*linear_problem(Vec::Zero(2), dup, Mat::Identity(2, 2)), Point(Vec::Zero(2))));
}

TEST_CASE("solve_kkt") {
  const ProblemPtr remark = build_remark_counterexample();
  const auto cert = solve_kkt(*remark, Point(Vec::Zero(2)));
  REQUIRE(cert);
  CHECK((cert->mu_frame - Vec{{1.0, 0.0}}).norm() < 1e-12);
  CHECK(cert->residual < 1e-12);
  CHECK(cert->strongly_active.size() == 1);
  CHECK(cert->strongly_active[0]);

  CHECK_FALSE(solve_kkt(*remark, Point(Vec{{-1.0, 0.0}})));
  CHECK_THROWS_AS(solve_kkt(*remark, Point(Vec{{1.0, 0.0}})), InfeasiblePoint);

  ClassicalNlpData d = box_qp();
  const auto free = solve_kkt(*build_classical_nlp(d), Point(Vec{{0.5, 0.5}}));
  REQUIRE(free);

  // Only x1 <= 5 left, inactive at the unconstrained minimizer.
  d.A = d.A.bottomRows(1).eval();
  d.b = d.b.tail(1).eval();
  d.n_I = 1;
  const auto inactive = solve_kkt(*build_classical_nlp(d), Point(Vec{{1.0, 1.0}}));
  REQUIRE(inactive);
  CHECK(inactive->mu_chart.norm() == 0.0);
  CHECK(inactive->lambda_I.size() == 0);
}

TEST_CASE("sphere edge multiplier matches a boundary search") {
  const SpherePolygonData data = default_sphere_polygon();
  const ProblemPtr prob = build_sphere_polygon(data);
  const Vec t = data.target.normalized();
  const Vec n0 = sphere_polygon_normals(data.vertices)[0];

  // Dense search of f along the arc from vertex 0 to vertex 1, refined.
  const Vec a = data.vertices[0], b = data.vertices[1];
  double lo = 0.0, hi = 1.0, best_s = 0.0;
  for (int level = 0; level < 6; ++level) {
    double best = kInf;
    for (int i = 0; i <= 1000; ++i) {
      const double s = lo + (hi - lo) * i / 1000.0;
      const double v = -((1.0 - s) * a + s * b).normalized().dot(t);
      if (v < best) {
        best = v;
        best_s = s;
      }
    }
    const double w = (hi - lo) / 500.0;
    lo = std::max(0.0, best_s - w);
    hi = std::min(1.0, best_s + w);
  }
  const Vec edge_min = ((1.0 - best_s) * a + best_s * b).normalized();

  const SolveResult res = solve(prob, Point((a + b + data.vertices[2]).normalized()));
  REQUIRE(res.status == SolveStatus::converged);
  CHECK((res.point.x - edge_min).norm() < 1e-6);
  const auto cert = solve_kkt(*prob, res.point);
  REQUIRE(cert);
  REQUIRE(cert->lambda_I.size() == 1);
  CHECK(cert->lambda_I(0) == doctest::Approx(t.dot(n0)).epsilon(1e-6));
}

TEST_CASE("multiplier set probe") {
  const ProblemPtr remark = build_remark_counterexample();
  const LocalModel lm = local_model(*remark, Point(Vec::Zero(2)));
  CHECK(multiplier_set_probe(lm, fit_multiplier(lm)).unique);

  const ClassicalNlpData d = box_qp();
  const LocalModel lq = local_model(*build_classical_nlp(d), Point(Vec{{0.5, 0.5}}));
  CHECK(check_licq(lq));
  CHECK(multiplier_set_probe(lq, fit_multiplier(lq)).unique);

  // f = x, g = (x, x), K = {0}^2.
  Mat jac(2, 1);
  jac << 1, 1;
  const ProblemPtr redundant = linear_problem(Vec::Ones(1), jac, Mat(0, 0));
  const LocalModel lr = local_model(*redundant, Point(Vec::Zero(1)));
  const KKTCertificate cr = fit_multiplier(lr);
  REQUIRE(cr.is_kkt());
  const MultiplierSetProbe probe = multiplier_set_probe(lr, cr);
  CHECK_FALSE(probe.unique);
  CHECK(probe.dim_estimate == 1);
}

TEST_CASE("classical report") {
  const ClassicalNlpData d = box_qp();
  const ProblemPtr prob = build_classical_nlp(d);
  const Point p(Vec{{0.5, 0.5}});
  const auto cert = solve_kkt(*prob, p);
  REQUIRE(cert);
  const ClassicalKKT ck = classical_report(*cert, *prob, p);
  CHECK(ck.eta_I(0) == doctest::Approx(0.5));
  CHECK(ck.eta_I(1) == 0.0);
  CHECK(ck.active[0]);
  CHECK_FALSE(ck.active[1]);
  CHECK(ck.complementarity == 0.0);
  CHECK(ck.stationarity < 1e-12);

  CHECK_THROWS_AS(classical_report(*cert, *build_remark_counterexample(), Point(Vec::Zero(2))), ModelMismatch);
}

TEST_CASE("equality-constrained QP against its KKT system") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    const int m = 4, ne = 2;
    Mat r(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) r(i, j) = nd(rng);
    ClassicalNlpData d;
    d.Q = r * r.transpose() + Mat::Identity(m, m);
    d.c = Vec(m);
    for (int i = 0; i < m; ++i) d.c(i) = nd(rng);
    d.A = Mat(ne, m);
    for (int i = 0; i < ne; ++i)
      for (int j = 0; j < m; ++j) d.A(i, j) = nd(rng);
    d.b = Vec{{nd(rng), nd(rng)}};
    d.n_E = ne;
    Mat kkt = Mat::Zero(m + ne, m + ne);
    kkt.topLeftCorner(m, m) = d.Q;
    kkt.topRightCorner(m, ne) = d.A.transpose();
    kkt.bottomLeftCorner(ne, m) = d.A;
    Vec rhs(m + ne);
    rhs << -d.c, -d.b;
    const Vec sol = kkt.fullPivLu().solve(rhs);
    const ProblemPtr prob = build_classical_nlp(d);
    const Point p(Vec(sol.head(m)));
    const auto cert = solve_kkt(*prob, p);
    REQUIRE(cert);
    const ClassicalKKT ck = classical_report(*cert, *prob, p);
    CHECK((ck.eta_E - sol.tail(ne)).norm() <= 1e-8 * (1.0 + sol.tail(ne).norm()));
  }
}

TEST_CASE("certificates survive a change of charts") {
  const ClassicalNlpData d = box_qp();
  const ProblemPtr prob = build_classical_nlp(d);
  const Point p(Vec{{0.5, 0.5}});
  const auto a = solve_kkt(*prob, p, Tolerances::kkt, ChartChoice{});
  const auto b = solve_kkt(*prob, p, Tolerances::kkt, ChartChoice{"rotated", 1});
  REQUIRE(a);
  REQUIRE(b);
  CHECK(b->residual <= 10.0 * Tolerances::kkt);
  CHECK((a->mu_frame - b->mu_frame).norm() < 1e-8);
}

TEST_CASE("a missing multiplier comes with a descent direction") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  int seen = 0;
  for (int t = 0; t < 50; ++t) {
    const Vec grad{{nd(rng), nd(rng), nd(rng)}};
    Mat jac(2, 3);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j) jac(i, j) = nd(rng);
    const ProblemPtr prob = linear_problem(grad, jac, Mat::Identity(2, 2));
    const Point p(Vec::Zero(3));
    if (!check_zkrcq(*prob, p) || solve_kkt(*prob, p)) continue;
    ++seen;
    const PolyhedralCone c = linearizing_cone(*prob, p);
    bool descent = false;
    for (const Vec& v : sample_cone(c, 400, rng)) descent = descent || grad.dot(v) < 0.0;
    CHECK(descent);
  }
  CHECK(seen > 0);
}
