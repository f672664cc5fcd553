#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcopt/corners.hpp"
#include "mcopt/geometry.hpp"

namespace mcopt {

struct NamedLinearizingMap {
  std::string name;
  bool adapted = true;
  std::function<LinearizingMap(const Point& q)> make;
};

/// Analytic Hessian of the pulled-back Lagrangian at p for a given retraction
/// kind and linearizing map name, in canonical frame coordinates. Returns
/// nullopt when the combination is not covered.
using AnalyticLagrangianHessian = std::function<std::optional<Mat>(
    const Point& p, const std::string& retraction, const std::string& linmap, const Vec& mu_frame)>;

/// minimize f(p) over p in M subject to g(p) in K, K a corner set in N.
struct ProblemInstance {
  std::string name;
  ManifoldPtr M;
  ManifoldPtr N;
  CornerSetPtr K;
  std::function<double(const Point&)> f;
  std::function<Point(const Point&)> g;

  /// Optional ambient derivatives: gradient of an ambient extension of f and
  /// Jacobian (N ambient x M ambient) of an ambient extension of g.
  std::function<Vec(const Point&)> f_gradient;
  std::function<Mat(const Point&)> g_jacobian;

  /// Maps beyond the ones derived from K's adapted charts.
  std::vector<NamedLinearizingMap> extra_linearizing_maps;
  AnalyticLagrangianHessian analytic_hessian;

  /// Set for R^m -> R^{n_I + n_E} problems with K = R^{n_I}_- x {0}.
  bool euclidean_nlp = false;
  int n_I = 0;
  int n_E = 0;

  bool feasible(const Point& p, double tol = Tolerances::feasibility) const;
};

using ProblemPtr = std::shared_ptr<const ProblemInstance>;

/// Which chart of M and which adapted chart variant of K to compute in.
struct ChartChoice {
  std::string m_chart;  ///< empty: M's default chart
  int k_variant = 0;
};

/// "adapted:<i>" for every adapted chart variant of K, then the extra maps.
std::vector<NamedLinearizingMap> linearizing_maps(const ProblemInstance& prob);
LinearizingMap make_linearizing_map(const ProblemInstance& prob, const Point& q, const std::string& name);

/// f'(p) in the canonical frame of T_pM.
Vec frame_gradient(const ProblemInstance& prob, const Point& p);
/// g'(p) between the canonical frames of T_pM and T_{g(p)}N.
Mat frame_jacobian(const ProblemInstance& prob, const Point& p);

/// Everything needed for first-order analysis at a feasible p, expressed in
/// the chart phi of M at p and the adapted chart psi of K at q = g(p).
struct LocalModel {
  Point p;
  Point q;
  Chart chart_M;
  AdaptedChartData adapted;
  Mat J_M;  ///< frame -> phi coordinates
  Mat J_N;  ///< frame -> psi coordinates
  Vec grad_frame;
  Mat G_frame;
  Vec grad;  ///< f'_phi as a column
  Mat G;     ///< g'_{psi,phi}(0), n x m

  int m() const { return static_cast<int>(G.cols()); }
  int n() const { return adapted.n; }
  int k() const { return adapted.k; }
  int ell() const { return adapted.ell; }
  Mat A_I() const { return adapted.A_I(); }
  Mat A_E() const { return adapted.W(); }
};

/// Throws InfeasiblePoint if g(p) is not in K within tol.
LocalModel local_model(const ProblemInstance& prob, const Point& p, const ChartChoice& choice = {},
                       double tol = Tolerances::feasibility);

/// {v : A_I G v <= 0, A_E G v = 0} in phi coordinates.
PolyhedralCone linearizing_cone(const LocalModel& lm);
PolyhedralCone linearizing_cone(const ProblemInstance& prob, const Point& p, const ChartChoice& choice = {});

}  // namespace mcopt
