#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "mcopt/models.hpp"
#include "model_util.hpp"

namespace mcopt {

namespace {

Mat laplacian(int n, double stiffness, bool anchored) {
  Mat q = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    q(i, i) = 2.0;
    if (i > 0) q(i, i - 1) = -1.0;
    if (i + 1 < n) q(i, i + 1) = -1.0;
  }
  if (!anchored) {
    q(0, 0) = 1.0;
    q(n - 1, n - 1) = 1.0;
    if (n == 1) q(0, 0) = 0.0;
  }
  return stiffness * q;
}

/// Inverse of v -> y* + v + 0.5 |v|^2 e1 for d = y - y*.
Vec quadratic_retraction_inverse(const Vec& d) {
  const double a = 1.0 + d(0);
  const double disc = a * a - d.squaredNorm();
  if (disc < 0.0) throw DomainError("cotangent map: point outside the retraction image");
  const double s = a - std::sqrt(disc);
  Vec v = d;
  v(0) -= s;
  return v;
}

}  // namespace

ControlModel build_control_model(const ControlData& data) {
  const int n = data.nodes;
  if (n < 1) throw BadParams("control-model: nodes must be positive");
  const int nu = data.controls < 0 ? n : data.controls;
  if (nu > n) throw BadParams("control-model: more controls than nodes");
  if (!(data.alpha > 0.0)) throw BadParams("control-model: alpha must be positive");

  ControlModel cm;
  cm.Q = laplacian(n, data.stiffness, data.anchored);
  cm.B = Mat::Identity(n, nu);
  if (data.y_target.size() > 0) {
    if (data.y_target.size() != n) throw BadParams("control-model: y_target must have one entry per node");
    cm.y_target = data.y_target;
  } else {
    cm.y_target = Vec(n);
    for (int i = 0; i < n; ++i) cm.y_target(i) = std::sin(std::numbers::pi * (i + 1) / (n + 1));
  }

  const Mat q = cm.Q;
  const Mat b = cm.B;
  const Vec yd = cm.y_target;
  const double alpha = data.alpha;
  const double beta = data.beta;

  auto prob = std::make_shared<ProblemInstance>();
  prob->name = "control-model";
  prob->M = std::make_shared<const Euclidean>(n + nu);
  prob->N = std::make_shared<const Euclidean>(2 * n);
  prob->K = polyhedral_cone_set(Mat(0, n), 2 * n);
  prob->f = [n, nu, yd, alpha](const Point& p) {
    return 0.5 * (p.x.head(n) - yd).squaredNorm() + 0.5 * alpha * p.x.tail(nu).squaredNorm();
  };
  prob->f_gradient = [n, nu, yd, alpha](const Point& p) -> Vec {
    Vec out(n + nu);
    out << p.x.head(n) - yd, alpha * p.x.tail(nu);
    return out;
  };
  prob->g = [n, nu, q, b, beta](const Point& p) {
    const Vec y = p.x.head(n);
    Vec out(2 * n);
    out << y, q * y - b * p.x.tail(nu) + beta * y.array().cube().matrix();
    return Point(out);
  };
  prob->g_jacobian = [n, nu, q, b, beta](const Point& p) -> Mat {
    const Vec y = p.x.head(n);
    Mat j = Mat::Zero(2 * n, n + nu);
    j.topLeftCorner(n, n).setIdentity();
    j.bottomLeftCorner(n, n) = q;
    j.bottomLeftCorner(n, n).diagonal() += 3.0 * beta * y.array().square().matrix();
    j.bottomRightCorner(n, nu) = -b;
    return j;
  };

  const CornerSetPtr k = prob->K;
  prob->extra_linearizing_maps.push_back(NamedLinearizingMap{"cotangent", true, [k, n](const Point& base) {
    const Vec ys = base.x.head(n);
    const Vec ws = base.x.tail(n);
    return LinearizingMap(
        "cotangent@" + detail::center_tag(base.x), base, 2 * n, 0.5,
        [ys, ws, n](const Vec& x) -> Vec {
          const Vec v = quadratic_retraction_inverse(x.head(n) - ys);
          const Vec w = x.tail(n) - ws;
          Vec out(2 * n);
          out << v, w + v * w(0);
          return out;
        },
        [ys, ws, n](const Vec& t) -> Vec {
          const Vec v = t.head(n);
          const Vec z = t.tail(n);
          Vec out(2 * n);
          Vec y = ys + v;
          y(0) += 0.5 * v.squaredNorm();
          out << y, ws + z - v * (z(0) / (1.0 + v(0)));
          return out;
        },
        std::make_shared<const PolyhedralCone>(k->adapted_chart(base).cone()));
  }});

  const auto grad_f = prob->f_gradient;
  const auto jac_g = prob->g_jacobian;
  prob->analytic_hessian = [n, nu, alpha, beta, grad_f, jac_g](const Point& p, const std::string& rk,
                                                                const std::string& lm,
                                                                const Vec& mu) -> std::optional<Mat> {
    if (rk != "translation" && rk != "quadratic") return std::nullopt;
    if (lm != "adapted:0" && lm != "cotangent") return std::nullopt;
    const Vec y = p.x.head(n);
    const Vec lam = mu.tail(n);
    Mat h = Mat::Zero(n + nu, n + nu);
    h.topLeftCorner(n, n).setIdentity();
    h.topLeftCorner(n, n).diagonal() += 6.0 * beta * lam.cwiseProduct(y);
    h.bottomRightCorner(nu, nu) = alpha * Mat::Identity(nu, nu);
    const Mat jg = jac_g(p);
    if (lm == "cotangent") {
      h.topLeftCorner(n, n) -= mu(0) * Mat::Identity(n, n);
      Vec a = Vec::Zero(n + nu);
      a.head(n) = lam;
      const Vec c1 = jg.row(n).transpose();
      h += a * c1.transpose() + c1 * a.transpose();
    }
    if (rk == "quadratic") {
      const Vec gl = grad_f(p) + jg.transpose() * mu;
      h += gl(0) * Mat::Identity(n + nu, n + nu);
    }
    return h;
  };
  cm.problem = prob;
  return cm;
}

AdjointSolution solve_adjoint_system(const ControlModel& cm, double alpha) {
  const Eigen::Index n = cm.Q.rows();
  const Eigen::Index nu = cm.B.cols();
  Mat a = Mat::Zero(2 * n + nu, 2 * n + nu);
  Vec rhs = Vec::Zero(2 * n + nu);
  // Unknowns (y, u, lambda).
  a.block(0, 0, n, n) = cm.Q;
  a.block(0, n, n, nu) = -cm.B;
  a.block(n, 0, n, n).setIdentity();
  a.block(n, n + nu, n, n) = cm.Q;
  rhs.segment(n, n) = cm.y_target;
  a.block(2 * n, n, nu, nu) = alpha * Mat::Identity(nu, nu);
  a.block(2 * n, n + nu, nu, n) = -cm.B.transpose();
  const Eigen::FullPivLU<Mat> lu(a);
  if (!lu.isInvertible()) throw Breakdown("adjoint system is singular");
  const Vec x = lu.solve(rhs);
  return AdjointSolution{x.head(n), x.segment(n, nu), x.tail(n)};
}

ProblemPtr build_circle_control_model(const CircleControlData& data) {
  const int n = data.nodes;
  if (n < 1) throw BadParams("control-circle: nodes must be positive");
  if (!(data.alpha > 0.0)) throw BadParams("control-circle: alpha must be positive");
  Vec theta = data.target_angles;
  if (theta.size() == 0) {
    theta = Vec(n);
    for (int i = 0; i < n; ++i) theta(i) = 0.5 * std::sin(std::numbers::pi * (i + 1) / (n + 1));
  }
  if (theta.size() != n) throw BadParams("control-circle: target_angles must have one entry per node");
  Vec yd(2 * n);
  for (int i = 0; i < n; ++i) yd.segment(2 * i, 2) = Vec{{std::cos(theta(i)), std::sin(theta(i))}};

  auto s1 = std::make_shared<const Sphere>(1);
  std::vector<ManifoldPtr> factors(static_cast<std::size_t>(n), s1);
  factors.push_back(std::make_shared<const Euclidean>(n));
  auto m = std::make_shared<const ProductManifold>(factors);
  auto nm = std::make_shared<const ProductManifold>(factors);

  auto membership = [n](const Point& q, double tol) { return q.x.tail(n).lpNorm<Eigen::Infinity>() <= tol; };
  auto variant = [nm, n](std::size_t kind) {
    return [nm, n, kind](const Point& q) {
      AdaptedChartData d;
      d.n = 2 * n;
      d.k = n;
      d.ell = 0;
      d.A_hat = Mat(0, n);
      d.chart = nm->chart(q, nm->chart_kinds()[kind]);
      return d;
    };
  };
  auto polyhedron = [nm, n](const Point& q) {
    LocalPolyhedron p;
    p.chart = nm->default_chart(q);
    p.A_I = Mat(0, 2 * n);
    p.b_I = Vec(0);
    p.A_E = Mat::Zero(n, 2 * n);
    p.A_E.rightCols(n).setIdentity();
    p.b_E = -q.x.tail(n);
    return p;
  };

  auto prob = std::make_shared<ProblemInstance>();
  prob->name = "control-circle";
  prob->M = m;
  prob->N = nm;
  prob->K = std::make_shared<const CornerSet>("zero-section", nm, n, membership,
                                              std::vector<CornerSet::AdaptedSupplier>{variant(0), variant(3)},
                                              polyhedron);
  const double alpha = data.alpha;
  const double kappa = data.kappa;
  prob->f = [n, yd, alpha](const Point& p) {
    return 0.5 * (p.x.head(2 * n) - yd).squaredNorm() + 0.5 * alpha * p.x.tail(n).squaredNorm();
  };
  prob->f_gradient = [n, yd, alpha](const Point& p) -> Vec {
    Vec out(3 * n);
    out << p.x.head(2 * n) - yd, alpha * p.x.tail(n);
    return out;
  };
  prob->g = [n, kappa](const Point& p) {
    const Vec e1 = Vec::Unit(2, 0);
    Vec out(3 * n);
    out.head(2 * n) = p.x.head(2 * n);
    for (int i = 0; i < n; ++i) {
      const Vec yi = p.x.segment(2 * i, 2).normalized();
      const Vec prev = i > 0 ? Vec(p.x.segment(2 * (i - 1), 2)) : e1;
      const Vec next = i + 1 < n ? Vec(p.x.segment(2 * (i + 1), 2)) : e1;
      Vec grad = -kappa * (prev + next);
      grad(1) -= p.x(2 * n + i);
      out(2 * n + i) = -grad(0) * yi(1) + grad(1) * yi(0);
    }
    return Point(out);
  };
  return prob;
}

}  // namespace mcopt
