#include "mcopt/solver.hpp"

#include <cmath>

#include "mcopt/linalg.hpp"

namespace mcopt {

const char* to_string(HessianMode m) {
  switch (m) {
    case HessianMode::fd_lagrangian:
      return "fd-lagrangian";
    case HessianMode::bfgs:
      return "bfgs";
    case HessianMode::identity:
      break;
  }
  return "identity";
}

HessianMode hessian_mode_from_string(const std::string& s) {
  if (s == "fd-lagrangian") return HessianMode::fd_lagrangian;
  if (s == "bfgs") return HessianMode::bfgs;
  if (s == "identity") return HessianMode::identity;
  throw BadParams("unknown hessian mode '" + s + "'");
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::max_iter:
      return "max_iter";
    case SolveStatus::breakdown:
      break;
  }
  return "breakdown";
}

SqpLocalProblem::SqpLocalProblem(const ProblemPtr& prob, const Point& p, const std::string& retraction_kind)
    : prob_(prob),
      retraction_(prob->M->retraction(p, retraction_kind)),
      poly_(prob->K->local_polyhedron(prob->g(p))) {
  grad_ = frame_gradient(*prob, p);
  jac_ = prob->N->frame_to_chart(poly_.chart) * frame_jacobian(*prob, p);
}

double SqpLocalProblem::f_bar(const Vec& v) const { return prob_->f(retraction_(v)); }

Vec SqpLocalProblem::c_bar(const Vec& v) const { return poly_.chart.forward(prob_->g(retraction_(v))); }

double SqpLocalProblem::violation(const Vec& c) const {
  double out = 0.0;
  if (poly_.A_I.rows() > 0) out += (poly_.A_I * c - poly_.b_I).cwiseMax(0.0).sum();
  if (poly_.A_E.rows() > 0) out += (poly_.A_E * c - poly_.b_E).cwiseAbs().sum();
  return out;
}

double SqpLocalProblem::merit(const Vec& v, double rho) const {
  try {
    if (!retraction_.in_domain(v)) return kInf;
    const double val = f_bar(v) + rho * violation(c_bar(v));
    return std::isfinite(val) ? val : kInf;
  } catch (const DomainError&) {
    return kInf;
  }
}

QPProblem SqpLocalProblem::qp(const Mat& h) const {
  return QPProblem{h, grad_, poly_.A_I * jac_, poly_.b_I, poly_.A_E * jac_, poly_.b_E};
}

LineSearchResult merit_and_linesearch(const SqpLocalProblem& lp, const Vec& v, double rho, double directional,
                                      int max_halvings) {
  LineSearchResult r;
  r.merit_before = lp.merit(Vec::Zero(v.size()), rho);
  double t = 1.0;
  for (int k = 0; k <= max_halvings; ++k) {
    const double m = lp.merit(t * v, rho);
    const bool armijo = directional < 0.0 ? m <= r.merit_before + 1e-4 * t * directional : m < r.merit_before;
    if (std::isfinite(m) && armijo) {
      r.t = t;
      r.merit_after = m;
      r.halvings = k;
      return r;
    }
    t *= 0.5;
  }
  throw LineSearchFailure("no merit decrease after " + std::to_string(max_halvings) + " halvings");
}

namespace {

Vec multiplier_mu(const LocalPolyhedron& poly, const std::map<int, double>& lam_i, const Vec& lam_e) {
  Vec mu = Vec::Zero(poly.chart.dim());
  for (std::size_t j = 0; j < poly.row_ids.size(); ++j) {
    auto it = lam_i.find(poly.row_ids[j]);
    if (it != lam_i.end()) mu += it->second * poly.A_I.row(static_cast<Eigen::Index>(j)).transpose();
  }
  if (lam_e.size() == poly.A_E.rows() && lam_e.size() > 0) mu += poly.A_E.transpose() * lam_e;
  return mu;
}

Vec lagrangian_gradient_at(const SqpLocalProblem& lp, const Vec& mu, const Vec& v) {
  return numdiff::gradient([&](const Vec& w) { return lp.f_bar(w) + mu.dot(lp.c_bar(w)); }, v);
}

}  // namespace

SolveResult solve(const ProblemPtr& prob, const Point& p0, const SolveOptions& opts) {
  if (opts.max_iter < 0 || !(opts.tol_kkt > 0.0) || !(opts.tol_step > 0.0) || !(opts.merit_penalty > 0.0))
    throw BadParams("solver tolerances and penalty must be positive");
  if (!prob->M->contains(p0, 1e-6)) throw BadParams("start point is not on " + prob->M->name());

  const std::string rk = opts.retraction.empty() ? prob->M->retraction_kinds().front() : opts.retraction;
  const double contain_tol = std::max(Tolerances::feasibility, opts.tol_kkt);
  SolveResult res;
  Point p = p0;
  std::map<int, double> lam_i;
  Vec lam_e;
  double rho = opts.merit_penalty;
  Mat bfgs = Mat::Identity(prob->M->dim(), prob->M->dim());

  auto finish = [&](SolveStatus st, std::string msg) {
    res.point = p;
    res.status = st;
    res.message = std::move(msg);
    res.qp_multipliers = lam_i;
    if (!res.certificate && prob->feasible(p, contain_tol)) {
      try {
        KKTCertificate c = fit_multiplier(local_model(*prob, p, opts.chart, contain_tol));
        c.choice = opts.chart;
        res.certificate = c;
      } catch (const Error&) {
      }
    }
    return res;
  };

  for (int k = 0;; ++k) {
    std::optional<SqpLocalProblem> lp;
    try {
      lp.emplace(prob, p, rk);
    } catch (const Error& e) {
      return finish(SolveStatus::breakdown, std::string("local model unavailable: ") + e.what());
    }
    const Vec zero = Vec::Zero(lp->dim());
    IterationRecord rec;
    rec.iteration = k;
    rec.f = prob->f(p);
    rec.feasibility = lp->violation(zero);
    const Vec mu = multiplier_mu(lp->polyhedron(), lam_i, lam_e);
    rec.kkt_residual = (lp->gradient() + lp->jacobian().transpose() * mu).norm();

    if (rec.feasibility <= opts.tol_kkt && prob->feasible(p, contain_tol)) {
      try {
        KKTCertificate c = fit_multiplier(local_model(*prob, p, opts.chart, contain_tol));
        rec.kkt_residual = c.residual;
        if (c.is_kkt(opts.tol_kkt)) {
          c.choice = opts.chart;
          res.certificate = c;
          return finish(SolveStatus::converged, "KKT conditions satisfied");
        }
      } catch (const Error&) {
      }
    }
    if (k >= opts.max_iter) return finish(SolveStatus::max_iter, "iteration limit reached");

    Mat h;
    switch (opts.hessian_mode) {
      case HessianMode::fd_lagrangian:
        try {
          h = numdiff::hessian([&](const Vec& v) { return lp->f_bar(v) + mu.dot(lp->c_bar(v)); }, zero);
        } catch (const DomainError&) {
          h = Mat::Identity(lp->dim(), lp->dim());
        }
        break;
      case HessianMode::bfgs:
        h = bfgs;
        break;
      case HessianMode::identity:
        h = Mat::Identity(lp->dim(), lp->dim());
        break;
    }

    const QPProblem qp = lp->qp(h);
    Vec v;
    QPResult qr;
    try {
      qr = solve_qp(qp);
      v = qr.v;
    } catch (const QPInfeasible&) {
      rec.restoration = true;
      const double radius = std::min(0.5, 0.25 * lp->retraction().domain_radius());
      v = elastic_step(qp, radius);
      if (v.norm() <= opts.tol_step) return finish(SolveStatus::breakdown, "feasibility restoration failed");
    }

    double directional = lp->gradient().dot(v) - rho * rec.feasibility;
    if (!rec.restoration) {
      double lmax = 0.0;
      if (qr.lambda_I.size() > 0) lmax = std::max(lmax, qr.lambda_I.lpNorm<Eigen::Infinity>());
      if (qr.lambda_E.size() > 0) lmax = std::max(lmax, qr.lambda_E.lpNorm<Eigen::Infinity>());
      rho = std::max(rho, 2.0 * lmax);
      directional = lp->gradient().dot(v) - rho * rec.feasibility;
    } else {
      const double lin_viol = lp->violation(lp->jacobian() * v);
      directional = lp->gradient().dot(v) - rho * (rec.feasibility - lin_viol);
    }

    Vec step;
    LineSearchResult ls;
    const double m0 = lp->merit(zero, rho);
    const double m1 = lp->merit(v, rho);
    if (std::isfinite(m1) && m1 <= m0 + 1e-4 * std::min(directional, 0.0)) {
      ls = LineSearchResult{1.0, m0, m1, 0};
      step = v;
    } else {
      bool done = false;
      if (!rec.restoration && std::isfinite(m1)) {
        // Second-order correction on the working rows.
        const LocalPolyhedron& poly = lp->polyhedron();
        const Vec cv = lp->c_bar(v);
        std::vector<Eigen::Index> rows;
        Mat aw(0, poly.chart.dim());
        Vec bw(0);
        for (Eigen::Index i = 0; i < poly.A_I.rows(); ++i) {
          const double lin = (poly.A_I.row(i) * lp->jacobian() * v)(0) - poly.b_I(i);
          if (qr.lambda_I(i) > 0.0 || std::abs(lin) <= 1e-9) {
            aw.conservativeResize(aw.rows() + 1, Eigen::NoChange);
            aw.row(aw.rows() - 1) = poly.A_I.row(i);
            bw.conservativeResize(bw.size() + 1);
            bw(bw.size() - 1) = poly.b_I(i);
          }
        }
        aw = vstack(aw, poly.A_E);
        Vec b2(bw.size() + poly.b_E.size());
        b2 << bw, poly.b_E;
        if (aw.rows() > 0) {
          const Vec d = min_norm_solve(aw * lp->jacobian(), -(aw * cv - b2));
          const double mc = lp->merit(v + d, rho);
          if (std::isfinite(mc) && mc <= m0 + 1e-4 * std::min(directional, 0.0)) {
            ls = LineSearchResult{1.0, m0, mc, 0};
            step = v + d;
            rec.second_order_correction = true;
            done = true;
          }
        }
      }
      if (!done) {
        try {
          ls = merit_and_linesearch(*lp, v, rho, directional);
          step = ls.t * v;
        } catch (const LineSearchFailure& e) {
          if (v.norm() * (1.0 + lp->gradient().norm()) <= 1e-7 && std::isfinite(m1)) {
            ls = LineSearchResult{1.0, m0, m1, 0};
            step = v;
          } else {
            return finish(SolveStatus::breakdown, e.what());
          }
        }
      }
    }
    rec.step_length = ls.t;
    rec.merit_before = ls.merit_before;
    rec.merit_after = ls.merit_after;
    rec.step_norm = step.norm();

    if (opts.hessian_mode == HessianMode::bfgs && step.norm() > 0.0) {
      try {
        const Vec y = lagrangian_gradient_at(*lp, mu, step) - lagrangian_gradient_at(*lp, mu, zero);
        const Vec bs = bfgs * step;
        const double sbs = step.dot(bs);
        double sy = step.dot(y);
        Vec yy = y;
        if (sy < 0.2 * sbs) {
          const double theta = 0.8 * sbs / (sbs - sy);
          yy = theta * y + (1.0 - theta) * bs;
          sy = step.dot(yy);
        }
        if (sbs > 0.0 && sy > 0.0) bfgs += yy * yy.transpose() / sy - bs * bs.transpose() / sbs;
      } catch (const DomainError&) {
      }
    }

    if (!rec.restoration) {
      lam_i.clear();
      for (std::size_t j = 0; j < lp->polyhedron().row_ids.size(); ++j)
        lam_i[lp->polyhedron().row_ids[j]] = qr.lambda_I(static_cast<Eigen::Index>(j));
      lam_e = qr.lambda_E;
    }
    res.iterations.push_back(rec);
    try {
      p = lp->retraction()(step);
    } catch (const DomainError& e) {
      return finish(SolveStatus::breakdown, e.what());
    }
  }
}

}  // namespace mcopt
