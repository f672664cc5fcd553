#include "mcopt/models.hpp"

#include <cmath>
#include <cstdio>

#include "mcopt/linalg.hpp"
#include "model_util.hpp"

namespace mcopt {

namespace detail {

std::string center_tag(const Vec& c) {
  std::string out;
  char buf[32];
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.6g", i ? "," : "", c(i));
    out += buf;
  }
  return out;
}

Chart with_radius(const Chart& c, double radius) {
  return Chart(
      c.id(), c.center(), c.dim(), radius, [c](const Vec& x) -> Vec { return c.forward(Point(x)); },
      [c](const Vec& y) -> Vec { return c.inverse(y).x; },
      Chart::Jacobians{c.forward_jacobian_at_center(), c.inverse_jacobian_at_zero()});
}

void check_keys(const nlohmann::json& params, const nlohmann::json& defaults, const std::string& model) {
  if (!params.is_object()) throw BadParams(model + ": parameters must be a JSON object");
  for (const auto& [key, value] : params.items())
    if (!defaults.contains(key)) throw BadParams(model + ": unknown parameter '" + key + "'");
}

Vec to_vec(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw BadParams(what + " must be an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw BadParams(what + " must be an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Mat to_mat(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw BadParams(what + " must be an array of rows");
  if (j.empty()) return Mat(0, 0);
  const Vec first = to_vec(j[0], what);
  Mat m(static_cast<Eigen::Index>(j.size()), first.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vec r = to_vec(j[i], what);
    if (r.size() != first.size()) throw BadParams(what + ": rows have different lengths");
    m.row(static_cast<Eigen::Index>(i)) = r.transpose();
  }
  return m;
}

double get_number(const nlohmann::json& params, const nlohmann::json& defaults, const std::string& key) {
  const nlohmann::json& j = params.contains(key) ? params.at(key) : defaults.at(key);
  if (!j.is_number()) throw BadParams("parameter '" + key + "' must be a number");
  return j.get<double>();
}

int get_int(const nlohmann::json& params, const nlohmann::json& defaults, const std::string& key) {
  const nlohmann::json& j = params.contains(key) ? params.at(key) : defaults.at(key);
  if (!j.is_number_integer()) throw BadParams("parameter '" + key + "' must be an integer");
  return j.get<int>();
}

}  // namespace detail

using detail::center_tag;

CornerSetPtr classical_corner_set(int n_I, int n_E) {
  if (n_I < 0 || n_E < 0) throw BadParams("constraint counts must be non-negative");
  const int n = n_I + n_E;
  const CornerSetPtr base = polyhedral_cone_set(Mat::Identity(n_I, n_I), n);
  auto shift = [base](const Point& q) { return base->adapted_chart(q, 0); };
  auto quadratic = [base, n](const Point& q) {
    AdaptedChartData d = base->adapted_chart(q, 0);
    const double r = d.chart.radius();
    const double radius = std::min(0.5 * r, 0.2);
    const Vec c = q.x;
    d.chart = Chart(
        "R^" + std::to_string(n) + "/quadratic@" + center_tag(c), q, n, radius,
        [c](const Vec& y) -> Vec {
          const Vec dd = y - c;
          return dd + 0.5 * dd.cwiseProduct(dd);
        },
        [c](const Vec& x) -> Vec {
          Vec dd(x.size());
          for (Eigen::Index i = 0; i < x.size(); ++i) dd(i) = -1.0 + std::sqrt(1.0 + 2.0 * x(i));
          return c + dd;
        },
        Chart::Jacobians{Mat::Identity(n, n), Mat::Identity(n, n)});
    return d;
  };
  return std::make_shared<const CornerSet>(
      "orthant", base->ambient(), n_I, [base](const Point& q, double tol) { return base->contains(q, tol); },
      std::vector<CornerSet::AdaptedSupplier>{shift, quadratic},
      [base](const Point& q) { return base->local_polyhedron(q); });
}

ProblemPtr build_classical_nlp(const ClassicalNlpData& data) {
  const Eigen::Index m = data.Q.rows();
  const int n = data.n_I + data.n_E;
  if (m == 0 || data.Q.cols() != m) throw BadParams("classical NLP: Q must be square and non-empty");
  if (data.c.size() != m) throw BadParams("classical NLP: c has the wrong length");
  if (data.A.rows() != n || (n > 0 && data.A.cols() != m)) throw BadParams("classical NLP: A must be (n_I + n_E) x m");
  if (data.b.size() != n) throw BadParams("classical NLP: b has the wrong length");
  if (!data.P.empty() && static_cast<int>(data.P.size()) != n)
    throw BadParams("classical NLP: P needs one matrix per constraint");
  for (const Mat& p : data.P)
    if (p.rows() != m || p.cols() != m) throw BadParams("classical NLP: P_i must be m x m");

  auto prob = std::make_shared<ProblemInstance>();
  prob->name = "classical-nlp";
  prob->M = std::make_shared<const Euclidean>(static_cast<int>(m));
  prob->N = std::make_shared<const Euclidean>(n);
  prob->K = classical_corner_set(data.n_I, data.n_E);
  prob->euclidean_nlp = true;
  prob->n_I = data.n_I;
  prob->n_E = data.n_E;

  const Mat q = 0.5 * (data.Q + data.Q.transpose());
  std::vector<Mat> ps;
  for (const Mat& p : data.P) ps.push_back(0.5 * (p + p.transpose()));
  const Vec c = data.c;
  const double d = data.d;
  const Mat a = n > 0 ? data.A : Mat(0, m);
  const Vec b = data.b;

  prob->f = [q, c, d](const Point& p) { return 0.5 * p.x.dot(q * p.x) + c.dot(p.x) + d; };
  prob->f_gradient = [q, c](const Point& p) -> Vec { return q * p.x + c; };
  prob->g = [ps, a, b](const Point& p) {
    Vec out = a * p.x + b;
    for (std::size_t i = 0; i < ps.size(); ++i)
      out(static_cast<Eigen::Index>(i)) += 0.5 * p.x.dot(ps[i] * p.x);
    return Point(out);
  };
  prob->g_jacobian = [ps, a](const Point& p) -> Mat {
    Mat j = a;
    for (std::size_t i = 0; i < ps.size(); ++i) j.row(static_cast<Eigen::Index>(i)) += (ps[i] * p.x).transpose();
    return j;
  };
  const auto grad_f = prob->f_gradient;
  const auto jac_g = prob->g_jacobian;
  prob->analytic_hessian = [q, ps, grad_f, jac_g](const Point& p, const std::string& rk, const std::string& lm,
                                                   const Vec& mu) -> std::optional<Mat> {
    if (lm != "adapted:0" && lm != "adapted:1") return std::nullopt;
    if (rk != "translation" && rk != "quadratic") return std::nullopt;
    Mat h = q;
    for (std::size_t i = 0; i < ps.size(); ++i) h += mu(static_cast<Eigen::Index>(i)) * ps[i];
    const Mat jg = jac_g(p);
    if (lm == "adapted:1")
      for (Eigen::Index i = 0; i < jg.rows(); ++i) h += mu(i) * jg.row(i).transpose() * jg.row(i);
    if (rk == "quadratic") {
      const Vec gl = grad_f(p) + jg.transpose() * mu;
      h += gl(0) * Mat::Identity(h.rows(), h.cols());
    }
    return h;
  };
  return prob;
}

ProblemPtr build_remark_counterexample(double alpha) {
  auto prob = std::make_shared<ProblemInstance>();
  prob->name = "remark-counterexample";
  auto r2 = std::make_shared<const Euclidean>(2);
  prob->M = r2;
  prob->N = r2;
  Mat a_hat(1, 2);
  a_hat << 1.0, 0.0;
  prob->K = polyhedral_cone_set(a_hat, 2);
  prob->f = [](const Point& p) { return -p.x(0); };
  prob->f_gradient = [](const Point&) -> Vec { return Vec::Unit(2, 0) * -1.0; };
  prob->g = [](const Point& p) { return p; };
  prob->g_jacobian = [](const Point&) -> Mat { return Mat::Identity(2, 2); };

  const CornerSetPtr k = prob->K;
  auto cone_at = [k](const Point& q) { return std::make_shared<const PolyhedralCone>(k->adapted_chart(q).cone()); };
  prob->extra_linearizing_maps.push_back(NamedLinearizingMap{"S01", true, [cone_at](const Point& q) {
    const Vec c = q.x;
    return LinearizingMap(
        "S01@" + center_tag(c), q, 2, kInf, [c](const Vec& y) -> Vec { return y - c; },
        [c](const Vec& w) -> Vec { return w + c; }, cone_at(q));
  }});
  prob->extra_linearizing_maps.push_back(NamedLinearizingMap{"S02", false, [alpha](const Point& q) {
    const Vec c = q.x;
    return LinearizingMap(
        "S02@" + center_tag(c), q, 2, kInf,
        [c, alpha](const Vec& y) -> Vec {
          const Vec d = y - c;
          return Vec{{d(0) + alpha * d(1) * d(1), d(1)}};
        },
        [c, alpha](const Vec& w) -> Vec { return c + Vec{{w(0) - alpha * w(1) * w(1), w(1)}}; });
  }});
  prob->extra_linearizing_maps.push_back(NamedLinearizingMap{"S03", true, [cone_at](const Point& q) {
    const Vec c = q.x;
    return LinearizingMap(
        "S03@" + center_tag(c), q, 2, 1.0,
        [c](const Vec& y) -> Vec {
          const Vec d = y - c;
          return Vec{{d(0) + d(0) * d(1), d(1)}};
        },
        [c](const Vec& w) -> Vec { return c + Vec{{w(0) / (1.0 + w(1)), w(1)}}; }, cone_at(q));
  }});

  prob->analytic_hessian = [alpha](const Point&, const std::string& rk, const std::string& lm,
                                   const Vec& mu) -> std::optional<Mat> {
    if (rk != "translation" && rk != "quadratic") return std::nullopt;
    Mat h = Mat::Zero(2, 2);
    if (lm == "S02") {
      h(1, 1) = 2.0 * alpha * mu(0);
    } else if (lm == "S03") {
      h(0, 1) = h(1, 0) = mu(0);
    } else if (lm != "S01" && lm != "adapted:0") {
      return std::nullopt;
    }
    if (rk == "quadratic") h += (mu(0) - 1.0) * Mat::Identity(2, 2);
    return h;
  };
  return prob;
}

namespace {

using nlohmann::json;

const json& classical_defaults() {
  static const json d = {{"Q", {{1.0, 0.0}, {0.0, 1.0}}},
                                {"c", {-1.0, -2.0}},
                                {"d", 2.5},
                                {"P", json::array()},
                                {"A", {{1.0, 1.0}, {-1.0, 0.0}}},
                                {"b", {-1.0, -1.0}},
                                {"n_I", 2},
                                {"n_E", 0}};
  return d;
}

const json& indefinite_defaults() {
  static const json d = {{"bound", 10.0}};
  return d;
}

const json& remark_defaults() {
  static const json d = {{"alpha", 1.0}};
  return d;
}

const json& sphere_defaults() {
  static const json d = {{"beta", 0.3}, {"target", nullptr}, {"vertices", nullptr}};
  return d;
}

const json& diagonal_defaults() {
  static const json d = {
      {"variant", "rotation"}, {"angle", 0.7}, {"q0", {1.0, 1.0, 1.0}}, {"target", {0.3, 0.2, 1.0}}};
  return d;
}

const json& control_defaults() {
  static const json d = {{"nodes", 20}, {"controls", -1}, {"alpha", 0.1}, {"beta", 0.0},
                                {"stiffness", 1.0}, {"anchored", true}, {"y_target", nullptr}};
  return d;
}

const json& circle_defaults() {
  static const json d = {{"nodes", 6}, {"kappa", 1.0}, {"alpha", 0.5}, {"target_angles", nullptr}};
  return d;
}

ClassicalNlpData classical_from_json(const json& p, const json& defaults) {
  auto get = [&](const std::string& key) -> const json& { return p.contains(key) ? p.at(key) : defaults.at(key); };
  ClassicalNlpData d;
  d.Q = detail::to_mat(get("Q"), "Q");
  d.c = detail::to_vec(get("c"), "c");
  d.d = detail::get_number(p, defaults, "d");
  for (const json& pi : get("P")) d.P.push_back(detail::to_mat(pi, "P"));
  d.n_I = detail::get_int(p, defaults, "n_I");
  d.n_E = detail::get_int(p, defaults, "n_E");
  d.A = detail::to_mat(get("A"), "A");
  if (d.A.size() == 0) d.A = Mat(0, d.Q.rows());
  d.b = detail::to_vec(get("b"), "b");
  return d;
}

Model classical_model(const json& params) {
  const json& defaults = classical_defaults();
  detail::check_keys(params, defaults, "classical-nlp");
  const ClassicalNlpData d = classical_from_json(params, defaults);
  Model m;
  m.name = "classical-nlp";
  m.problem = build_classical_nlp(d);
  m.start = Point(Vec::Zero(d.Q.rows()));
  if (params.empty()) {
    m.start = Point(Vec{{-0.5, -0.5}});
    m.reference_point = Point(Vec{{0.0, 1.0}});
    m.reference_mu_frame = Vec{{1.0, 0.0}};
    m.provenance = "closed form: projection of (1, 2) onto x1 + x2 <= 1";
  }
  return m;
}

Model indefinite_model(const json& params) {
  const json& defaults = indefinite_defaults();
  detail::check_keys(params, defaults, "indefinite-qp");
  ClassicalNlpData d;
  d.Q = Vec{{1.0, -1.0}}.asDiagonal();
  d.c = Vec::Zero(2);
  d.A = Mat::Ones(1, 2);
  d.b = Vec::Constant(1, -detail::get_number(params, defaults, "bound"));
  d.n_I = 1;
  Model m;
  m.name = "indefinite-qp";
  auto prob = std::const_pointer_cast<ProblemInstance>(build_classical_nlp(d));
  prob->name = m.name;
  m.problem = prob;
  m.start = Point(Vec{{0.3, 0.2}});
  m.reference_point = Point(Vec::Zero(2));
  m.reference_mu_frame = Vec::Zero(1);
  m.provenance = "closed form: stationary point of a saddle";
  return m;
}

Model remark_model(const json& params) {
  const json& defaults = remark_defaults();
  detail::check_keys(params, defaults, "remark-counterexample");
  Model m;
  m.name = "remark-counterexample";
  m.problem = build_remark_counterexample(detail::get_number(params, defaults, "alpha"));
  m.start = Point(Vec{{-0.5, 0.0}});
  m.reference_point = Point(Vec::Zero(2));
  m.reference_mu_frame = Vec{{1.0, 0.0}};
  m.provenance = "closed form";
  return m;
}

Vec vec_or(const json& params, const std::string& key, const Vec& fallback) {
  return params.contains(key) ? detail::to_vec(params.at(key), key) : fallback;
}

Model sphere_model(const json& params) {
  const json& defaults = sphere_defaults();
  detail::check_keys(params, defaults, "sphere-polygon");
  SpherePolygonData d = default_sphere_polygon(detail::get_number(params, defaults, "beta"));
  if (params.contains("vertices") && !params.at("vertices").is_null()) {
    const Mat v = detail::to_mat(params.at("vertices"), "vertices");
    if (v.rows() != 3 || v.cols() != 3) throw BadParams("sphere-polygon: vertices must be three points in R^3");
    d.vertices.clear();
    for (Eigen::Index i = 0; i < 3; ++i) d.vertices.push_back(v.row(i).transpose().normalized());
  }
  if (params.contains("target") && !params.at("target").is_null()) d.target = detail::to_vec(params.at("target"), "target");
  Model m;
  m.name = "sphere-polygon";
  m.problem = build_sphere_polygon(d);
  m.start = Point((d.vertices[0] + d.vertices[1] + d.vertices[2]).normalized());
  return m;
}

Model diagonal_model(const json& params) {
  const json& defaults = diagonal_defaults();
  detail::check_keys(params, defaults, "diagonal-constraint");
  DiagonalData d;
  const json& v = params.contains("variant") ? params.at("variant") : defaults.at("variant");
  const std::string variant = v.is_string() ? v.get<std::string>() : "";
  if (variant == "rotation")
    d.variant = DiagonalVariant::rotation;
  else if (variant == "constant")
    d.variant = DiagonalVariant::constant;
  else if (variant == "identical")
    d.variant = DiagonalVariant::identical;
  else
    throw BadParams("diagonal-constraint: variant must be rotation, constant or identical");
  d.angle = detail::get_number(params, defaults, "angle");
  d.q0 = vec_or(params, "q0", detail::to_vec(defaults.at("q0"), "q0"));
  d.target = vec_or(params, "target", detail::to_vec(defaults.at("target"), "target"));
  if (d.q0.size() != 3 || d.target.size() != 3 || d.q0.norm() == 0.0 || d.target.norm() == 0.0)
    throw BadParams("diagonal-constraint: q0 and target must be non-zero vectors in R^3");
  d.q0.normalize();
  Model m;
  m.name = "diagonal-constraint";
  m.problem = build_diagonal_constraint(d);
  const Vec t = d.target.normalized();
  switch (d.variant) {
    case DiagonalVariant::rotation:
      m.start = Point(Vec{{0.2, -0.1, 1.0}}.normalized());
      if (t(2) > 0.0 && std::abs(std::sin(0.5 * d.angle)) > 1e-6) {
        m.reference_point = Point(Vec::Unit(3, 2));
        m.provenance = "closed form: the fixed points of the rotation are +-e3";
      }
      break;
    case DiagonalVariant::constant:
      m.start = Point(d.q0);
      m.reference_point = Point(d.q0);
      m.provenance = "closed form: the feasible set is {q0}";
      break;
    case DiagonalVariant::identical:
      m.start = Point(Vec::Unit(3, 2));
      m.reference_point = Point(t);
      m.reference_mu_frame = Vec::Zero(4);
      m.provenance = "closed form: every point is feasible";
      break;
  }
  return m;
}

Model control_model(const json& params) {
  const json& defaults = control_defaults();
  detail::check_keys(params, defaults, "control-model");
  ControlData d;
  d.nodes = detail::get_int(params, defaults, "nodes");
  d.controls = detail::get_int(params, defaults, "controls");
  d.alpha = detail::get_number(params, defaults, "alpha");
  d.beta = detail::get_number(params, defaults, "beta");
  d.stiffness = detail::get_number(params, defaults, "stiffness");
  if (params.contains("anchored")) {
    if (!params.at("anchored").is_boolean()) throw BadParams("parameter 'anchored' must be a boolean");
    d.anchored = params.at("anchored").get<bool>();
  }
  if (params.contains("y_target") && !params.at("y_target").is_null())
    d.y_target = detail::to_vec(params.at("y_target"), "y_target");
  const ControlModel cm = build_control_model(d);
  Model m;
  m.name = "control-model";
  m.problem = cm.problem;
  m.start = Point(Vec::Zero(cm.Q.rows() + cm.B.cols()));
  if (d.beta == 0.0) {
    try {
      const AdjointSolution s = solve_adjoint_system(cm, d.alpha);
      Vec x(s.y.size() + s.u.size());
      x << s.y, s.u;
      m.reference_point = Point(x);
      Vec mu = Vec::Zero(2 * s.y.size());
      mu.tail(s.y.size()) = s.lambda;
      m.reference_mu_frame = mu;
      m.provenance = "derived: adjoint linear system solved directly";
    } catch (const Error&) {
    }
  }
  return m;
}

Model circle_model(const json& params) {
  const json& defaults = circle_defaults();
  detail::check_keys(params, defaults, "control-circle");
  CircleControlData d;
  d.nodes = detail::get_int(params, defaults, "nodes");
  d.kappa = detail::get_number(params, defaults, "kappa");
  d.alpha = detail::get_number(params, defaults, "alpha");
  if (params.contains("target_angles") && !params.at("target_angles").is_null())
    d.target_angles = detail::to_vec(params.at("target_angles"), "target_angles");
  Model m;
  m.name = "control-circle";
  m.problem = build_circle_control_model(d);
  Vec x = Vec::Zero(3 * d.nodes);
  for (int i = 0; i < d.nodes; ++i) x(2 * i) = 1.0;
  m.start = Point(x);
  return m;
}

}  // namespace

const std::vector<ModelDescriptor>& model_registry() {
  static const std::vector<ModelDescriptor> reg = [] {
    std::vector<ModelDescriptor> r;
    auto add = [&r](std::string name, std::string summary, const json& defaults, bool ref,
                    std::function<Model(const json&)> build) {
      r.push_back(ModelDescriptor{std::move(name), std::move(summary), defaults, ref, std::move(build)});
    };
    add("classical-nlp", "quadratic objective and constraints on R^m, K = orthant x {0}", classical_defaults(), true,
        classical_model);
    add("control-circle", "energy-minimizing state on (S^1)^N with controls, K = zero section of T*Y",
        circle_defaults(), false, circle_model);
    add("control-model", "linear-quadratic control, state equation as a section of T*Y", control_defaults(), true,
        control_model);
    add("diagonal-constraint", "S^2 -> S^2 x S^2, K = diagonal", diagonal_defaults(), true, diagonal_model);
    add("indefinite-qp", "saddle point of an indefinite quadratic", indefinite_defaults(), true, indefinite_model);
    add("remark-counterexample", "R^2 half-plane with adapted and non-adapted linearizing maps", remark_defaults(),
        true, remark_model);
    add("sphere-polygon", "linear objective on S^2 over a geodesic triangle", sphere_defaults(), false, sphere_model);
    return r;
  }();
  return reg;
}

Model build_model(const std::string& name, const nlohmann::json& params) {
  for (const auto& d : model_registry()) {
    if (d.name != name) continue;
    try {
      return d.build(params.is_null() ? nlohmann::json::object() : params);
    } catch (const nlohmann::json::exception& e) {
      throw BadParams(name + ": " + e.what());
    }
  }
  throw BadParams("unknown model '" + name + "'");
}

}  // namespace mcopt
