#include "mcopt/problem.hpp"

#include "mcopt/linalg.hpp"

namespace mcopt {

bool ProblemInstance::feasible(const Point& p, double tol) const {
  if (!M->contains(p, std::max(tol, 1e-9))) return false;
  return K->contains(g(p), tol);
}

std::vector<NamedLinearizingMap> linearizing_maps(const ProblemInstance& prob) {
  std::vector<NamedLinearizingMap> out;
  for (int v = 0; v < prob.K->variant_count(); ++v) {
    const CornerSetPtr k = prob.K;
    const ManifoldPtr n = prob.N;
    out.push_back(NamedLinearizingMap{"adapted:" + std::to_string(v), true, [k, n, v](const Point& q) {
                                        const AdaptedChartData d = k->adapted_chart(q, v);
                                        const Mat j = n->frame_to_chart(d.chart);
                                        auto cone = std::make_shared<const PolyhedralCone>(transport(d.cone(), j.inverse()));
                                        return linearizing_map_from_chart(*n, d.chart, cone);
                                      }});
  }
  out.insert(out.end(), prob.extra_linearizing_maps.begin(), prob.extra_linearizing_maps.end());
  return out;
}

LinearizingMap make_linearizing_map(const ProblemInstance& prob, const Point& q, const std::string& name) {
  for (const auto& m : linearizing_maps(prob))
    if (m.name == name) return m.make(q);
  throw BadParams("problem " + prob.name + " has no linearizing map '" + name + "'");
}

Vec frame_gradient(const ProblemInstance& prob, const Point& p) {
  if (prob.f_gradient) return prob.M->tangent_basis(p).transpose() * prob.f_gradient(p);
  const Retraction r = prob.M->default_retraction(p);
  return numdiff::gradient([&](const Vec& v) { return prob.f(r(v)); }, Vec::Zero(prob.M->dim()));
}

Mat frame_jacobian(const ProblemInstance& prob, const Point& p) {
  const Point q = prob.g(p);
  if (prob.g_jacobian)
    return prob.N->tangent_basis(q).transpose() * prob.g_jacobian(p) * prob.M->tangent_basis(p);
  const Retraction r = prob.M->default_retraction(p);
  const LinearizingMap s = linearizing_map_from_chart(*prob.N, prob.N->default_chart(q));
  return numdiff::jacobian([&](const Vec& v) { return s(prob.g(r(v))); }, Vec::Zero(prob.M->dim()));
}

LocalModel local_model(const ProblemInstance& prob, const Point& p, const ChartChoice& choice, double tol) {
  LocalModel lm;
  lm.p = p;
  lm.q = prob.g(p);
  if (!prob.K->contains(lm.q, tol)) throw InfeasiblePoint("g(p) is not in " + prob.K->name());
  lm.chart_M = choice.m_chart.empty() ? prob.M->default_chart(p) : prob.M->chart(p, choice.m_chart);
  lm.adapted = prob.K->adapted_chart(lm.q, choice.k_variant);
  lm.J_M = prob.M->frame_to_chart(lm.chart_M);
  lm.J_N = prob.N->frame_to_chart(lm.adapted.chart);
  lm.grad_frame = frame_gradient(prob, p);
  lm.G_frame = frame_jacobian(prob, p);
  const Mat jm_inv = lm.J_M.inverse();
  lm.grad = jm_inv.transpose() * lm.grad_frame;
  lm.G = lm.J_N * lm.G_frame * jm_inv;
  return lm;
}

PolyhedralCone linearizing_cone(const LocalModel& lm) {
  return PolyhedralCone(lm.m(), lm.A_I() * lm.G, lm.A_E() * lm.G, lm.adapted.row_ids);
}

PolyhedralCone linearizing_cone(const ProblemInstance& prob, const Point& p, const ChartChoice& choice) {
  return linearizing_cone(local_model(prob, p, choice));
}

}  // namespace mcopt
