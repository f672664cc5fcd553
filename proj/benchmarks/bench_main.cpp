#include <benchmark/benchmark.h>

#include <random>

#include "mcopt/cones.hpp"
#include "mcopt/linalg.hpp"
#include "mcopt/models.hpp"
#include "mcopt/nnls.hpp"
#include "mcopt/secondorder.hpp"
#include "mcopt/solver.hpp"

using namespace mcopt;

namespace {

Mat random_matrix(int r, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = nd(rng);
  return m;
}

void BM_Nnls(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mat c = random_matrix(2 * n, n, 1);
  const Vec b = random_matrix(2 * n, 1, 2).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(nnls(c, b).residual);
}
BENCHMARK(BM_Nnls)->Arg(5)->Arg(20)->Arg(80);

void BM_ExtremeRays(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  // A pointed cone: d + 2 random rows around a common interior direction.
  Mat a = random_matrix(d + 2, d, 3);
  a.col(0) = a.col(0).cwiseAbs() + Vec::Constant(d + 2, 1.0);
  const PolyhedralCone c(d, -a, Mat(0, d));
  for (auto _ : state) benchmark::DoNotOptimize(extreme_rays(c).rays.size());
}
BENCHMARK(BM_ExtremeRays)->DenseRange(3, 7, 2);

void BM_SphereSolve(benchmark::State& state) {
  const ProblemPtr prob = build_sphere_polygon(default_sphere_polygon());
  const Point start(Vec::Unit(3, 2));
  for (auto _ : state) benchmark::DoNotOptimize(solve(prob, start).iterations.size());
}
BENCHMARK(BM_SphereSolve);

void BM_FdHessian(benchmark::State& state) {
  ControlData data;
  data.nodes = static_cast<int>(state.range(0));
  const ControlModel cm = build_control_model(data);
  const AdjointSolution adj = solve_adjoint_system(cm, data.alpha);
  Vec x(adj.y.size() + adj.u.size());
  x << adj.y, adj.u;
  const Point p(x);
  const auto cert = solve_kkt(*cm.problem, p);
  const PulledBackProblem pb = pull_back(cm.problem, p);
  HessianOptions opts;
  opts.prefer_analytic = false;
  for (auto _ : state) benchmark::DoNotOptimize(lagrangian_hessian(pb, cert->mu_frame, opts).matrix.norm());
}
BENCHMARK(BM_FdHessian)->Arg(5)->Arg(20);

}  // namespace
BENCHMARK_MAIN();
