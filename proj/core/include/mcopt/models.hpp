#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcopt/problem.hpp"

namespace mcopt {

/// A built problem plus whatever reference data is known for it.
struct Model {
  std::string name;
  ProblemPtr problem;
  Point start;                            ///< default solver start
  std::optional<Point> reference_point;   ///< known minimizer / KKT point
  std::optional<Vec> reference_mu_frame;  ///< multiplier at reference_point, canonical frame of T_qN
  std::string provenance;                 ///< how the reference data was obtained
};

struct ModelDescriptor {
  std::string name;
  std::string summary;
  nlohmann::json defaults;  ///< parameter names with default values
  bool has_reference = false;
  std::function<Model(const nlohmann::json& params)> build;
};

const std::vector<ModelDescriptor>& model_registry();
/// Throws BadParams for unknown names or parameters.
Model build_model(const std::string& name, const nlohmann::json& params = nlohmann::json::object());

// ---- classical NLP ----------------------------------------------------------

/// f = 0.5 x'Qx + c'x + d,  g_i = 0.5 x'P_i x + a_i'x + b_i,  first n_I rows <= 0, rest = 0.
struct ClassicalNlpData {
  Mat Q;
  Vec c;
  double d = 0.0;
  std::vector<Mat> P;  ///< empty or one per constraint
  Mat A;               ///< rows a_i
  Vec b;
  int n_I = 0;
  int n_E = 0;
};

/// K = R^{n_I}_- x {0}^{n_E} with two adapted charts: the shift chart of radius
/// min |y_i| over y_i < 0, and d + d*d/2 (componentwise, d = y - q).
CornerSetPtr classical_corner_set(int n_I, int n_E);
ProblemPtr build_classical_nlp(const ClassicalNlpData& data);

// ---- remark counterexample --------------------------------------------------

/// M = N = R^2, f = -p1, g = id, K = {p1 <= 0}; extra maps "S01", "S02", "S03".
ProblemPtr build_remark_counterexample(double alpha = 1.0);

// ---- sphere polygon ---------------------------------------------------------

struct SpherePolygonData {
  std::vector<Vec> vertices;  ///< three unit vectors
  Vec target;                 ///< f(p) = -<p, target/|target|>
};

SpherePolygonData default_sphere_polygon(double beta = 0.3);
/// Edge i joins vertex i and i+1; normals point away from the triangle.
std::vector<Vec> sphere_polygon_normals(const std::vector<Vec>& vertices);
ProblemPtr build_sphere_polygon(const SpherePolygonData& data);

// ---- diagonal constraint ----------------------------------------------------

enum class DiagonalVariant { rotation, constant, identical };

struct DiagonalData {
  DiagonalVariant variant = DiagonalVariant::rotation;
  double angle = 0.7;  ///< rotation about e3
  Vec q0;              ///< constant map value
  Vec target;          ///< f(p) = -<p, target/|target|>
};

ProblemPtr build_diagonal_constraint(const DiagonalData& data);

// ---- control model ----------------------------------------------------------

struct ControlData {
  int nodes = 20;
  int controls = -1;     ///< number of controlled nodes (B = first columns of I); -1 means all
  double alpha = 0.1;    ///< control cost
  double beta = 0.0;     ///< quartic energy coefficient
  double stiffness = 1.0;
  bool anchored = true;  ///< Dirichlet ends (Q positive definite)
  Vec y_target;          ///< empty: sin profile
};

struct ControlModel {
  ProblemPtr problem;
  Mat Q;
  Mat B;
  Vec y_target;
};

/// Y = R^N, U = R^{N_u}; E = 0.5 y'Qy - (Bu)'y + beta/4 sum y^4; g = (y, dE/dy) into
/// T*Y = R^N x R^N with K the zero section. Extra map "cotangent" is the map
/// (y, w) -> (v, w + v (e1'w)) built on the retraction y* + v + 0.5|v|^2 e1.
ControlModel build_control_model(const ControlData& data);

struct AdjointSolution {
  Vec y;
  Vec u;
  Vec lambda;
};

/// Direct solution of Qy = Bu, (y - y_d) + Q lambda = 0, alpha u = B' lambda (beta = 0).
AdjointSolution solve_adjoint_system(const ControlModel& cm, double alpha);

struct CircleControlData {
  int nodes = 6;
  double kappa = 1.0;
  double alpha = 0.5;
  Vec target_angles;  ///< empty: a gentle arc
};

/// Y = (S^1)^N, T*Y trivialized by the frame J y_i, K the zero section.
ProblemPtr build_circle_control_model(const CircleControlData& data);

}  // namespace mcopt
