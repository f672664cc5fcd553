#include "mcopt_cli/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mcopt/models.hpp"
#include "mcopt/secondorder.hpp"

namespace mcopt::cli {

namespace {

using nlohmann::json;

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

json mat_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

json cone_json(const PolyhedralCone& c) {
  return json{{"dim", c.dim()}, {"A_I", mat_json(c.A_I())}, {"A_E", mat_json(c.A_E())}, {"ineq_ids", c.ineq_ids()}};
}

json header(const std::string& command, const RunConfig& cfg) {
  return json{{"schema_version", 1}, {"command", command}, {"model", cfg.model}, {"params", cfg.params},
              {"seed", cfg.seed},    {"tol", cfg.tol}};
}

Model load_model(const RunConfig& cfg) {
  if (cfg.model.empty()) throw ConfigError("no model given (--model or model.name)");
  try {
    return build_model(cfg.model, cfg.params);
  } catch (const BadParams& e) {
    throw ConfigError(e.what());
  }
}

Point require_point(const RunConfig& cfg, const Model& m, const std::optional<Point>& fallback) {
  Point p;
  if (cfg.point)
    p = Point(*cfg.point);
  else if (fallback)
    p = *fallback;
  else
    throw ConfigError("no point given (--point or point)");
  if (p.size() != m.problem->M->ambient_dim())
    throw ConfigError("point has " + std::to_string(p.size()) + " coordinates, model expects " +
                      std::to_string(m.problem->M->ambient_dim()));
  return p;
}

void check_chart_choice(const RunConfig& cfg, const Model& m) {
  const ChartChoice& c = cfg.solver.chart;
  if (c.k_variant < 0 || c.k_variant >= m.problem->K->variant_count())
    throw ConfigError("chart.k_variant out of range for " + m.name);
  if (!c.m_chart.empty()) {
    const auto kinds = m.problem->M->chart_kinds();
    if (std::find(kinds.begin(), kinds.end(), c.m_chart) == kinds.end())
      throw ConfigError("unknown chart kind '" + c.m_chart + "' for " + m.problem->M->name());
  }
}

json certificate_json(const KKTCertificate& c) {
  json sa = json::array();
  for (bool b : c.strongly_active) sa.push_back(b);
  return json{{"mu_chart", vec_json(c.mu_chart)},
              {"mu_frame", vec_json(c.mu_frame)},
              {"lambda_I", vec_json(c.lambda_I)},
              {"lambda_E", vec_json(c.lambda_E)},
              {"residual", num(c.residual)},
              {"grad_norm", num(c.grad_norm)},
              {"strongly_active", sa},
              {"row_ids", c.row_ids}};
}

json cq_json(const CQReport& r) {
  json j{{"transversal", r.transversal},
         {"mfcq", r.mfcq},
         {"zkrcq", r.zkrcq},
         {"licq", r.licq},
         {"mfcq_margin", num(r.mfcq_margin)},
         {"rank_transversal", r.rank_transversal},
         {"rank_WG", r.rank_WG},
         {"rank_BG", r.rank_BG},
         {"n", r.n},
         {"k", r.k},
         {"ell", r.ell}};
  if (r.mfcq_witness) j["mfcq_witness"] = vec_json(*r.mfcq_witness);
  return j;
}

json verdict_json(const Verdict& v) {
  json j{{"verdict", to_string(v.kind)}, {"min_value", num(v.min_value)}};
  if (v.witness) j["witness"] = vec_json(*v.witness);
  return j;
}

struct FirstOrder {
  std::optional<LocalModel> lm;
  std::optional<KKTCertificate> cert;
  int code = exit_code::ok;
};

/// Shared by check and certify: feasibility, CQs, multiplier.
FirstOrder first_order(const RunConfig& cfg, const Model& m, const Point& p, json& report) {
  FirstOrder fo;
  const ProblemInstance& prob = *m.problem;
  report["point"] = vec_json(p.x);
  const double feas_tol = std::max(Tolerances::feasibility, cfg.tol);
  if (!prob.M->contains(p, 1e-8) || !prob.feasible(p, feas_tol)) {
    report["feasible"] = false;
    report["status"] = "infeasible";
    fo.code = exit_code::infeasible;
    return fo;
  }
  report["feasible"] = true;
  try {
    fo.lm = local_model(prob, p, cfg.solver.chart, feas_tol);
  } catch (const NotInSet&) {
    report["feasible"] = false;
    report["status"] = "infeasible";
    fo.code = exit_code::infeasible;
    return fo;
  }
  report["q"] = vec_json(fo.lm->q.x);
  report["corner_index"] = fo.lm->ell();
  report["cq"] = cq_json(constraint_qualifications(*fo.lm));
  const KKTCertificate fit = fit_multiplier(*fo.lm);
  if (fit.is_kkt(cfg.tol)) {
    fo.cert = fit;
    fo.cert->choice = cfg.solver.chart;
    report["status"] = "kkt";
    report["kkt"] = certificate_json(fit);
    const MultiplierSetProbe probe = multiplier_set_probe(*fo.lm, fit);
    report["multiplier_set"] = json{{"unique", probe.unique}, {"dim_estimate", probe.dim_estimate}};
    if (prob.euclidean_nlp) {
      const ClassicalKKT ck = classical_report(fit, prob, p);
      json act = json::array();
      for (bool b : ck.active) act.push_back(b);
      report["classical"] = json{{"eta_I", vec_json(ck.eta_I)},
                                 {"eta_E", vec_json(ck.eta_E)},
                                 {"active", act},
                                 {"stationarity", num(ck.stationarity)},
                                 {"complementarity", num(ck.complementarity)}};
    }
  } else {
    report["status"] = "no_multiplier";
    report["best_residual"] = num(fit.residual);
    fo.code = exit_code::not_certified;
  }
  return fo;
}

struct MapChoice {
  std::string retraction;
  std::string linmap;
};

/// The default pair and the "other" pair: last retraction kind with the last
/// adapted map different from adapted:0.
std::pair<MapChoice, MapChoice> representation_pair(const ProblemInstance& prob) {
  const auto rks = prob.M->retraction_kinds();
  std::string other = "adapted:0";
  for (const auto& m : linearizing_maps(prob))
    if (m.adapted && m.name != "adapted:0") other = m.name;
  return {MapChoice{rks.front(), "adapted:0"}, MapChoice{rks.back(), other}};
}

json invariance_json(const MapChoice& a, const MapChoice& b, const InvarianceReport& r, double tol) {
  return json{{"first", json{{"retraction", a.retraction}, {"linmap", a.linmap}, {"analytic", r.h1.analytic}}},
              {"second", json{{"retraction", b.retraction}, {"linmap", b.linmap}, {"analytic", r.h2.analytic}}},
              {"both_adapted", r.both_adapted},
              {"on_cone_max", num(r.on_cone_max)},
              {"off_cone_max", num(r.off_cone_max)},
              {"on_cone_samples", r.on_cone_samples},
              {"tol", tol},
              {"pass", r.pass}};
}

}  // namespace

json cmd_list_models(const std::string& filter) {
  json models = json::array();
  for (const auto& d : model_registry()) {
    if (!filter.empty() && d.name.find(filter) == std::string::npos) continue;
    models.push_back(json{{"name", d.name}, {"summary", d.summary}, {"params", d.defaults}, {"has_reference", d.has_reference}});
  }
  return json{{"schema_version", 1}, {"command", "list-models"}, {"filter", filter}, {"models", models}};
}

int cmd_check(const RunConfig& cfg, json& report) {
  report = header("check", cfg);
  const Model m = load_model(cfg);
  check_chart_choice(cfg, m);
  const Point p = require_point(cfg, m, std::nullopt);
  const FirstOrder fo = first_order(cfg, m, p, report);
  report["exit_code"] = fo.code;
  return fo.code;
}

int cmd_certify(const RunConfig& cfg, json& report) {
  report = header("certify", cfg);
  const Model m = load_model(cfg);
  check_chart_choice(cfg, m);
  const Point p = require_point(cfg, m, std::nullopt);
  const FirstOrder fo = first_order(cfg, m, p, report);
  if (fo.code != exit_code::ok) {
    report["exit_code"] = fo.code;
    return fo.code;
  }
  const ProblemPtr& prob = m.problem;
  const CriticalCone cc = critical_cone(*fo.lm, *fo.cert);
  report["critical_cone"] = json{{"phi", cone_json(cc.cone_M)},
                                 {"frame", cone_json(cc.cone_M_frame)},
                                 {"multiplier_form", cone_json(cc.cone_M_mult)},
                                 {"in_N", cone_json(cc.cone_N)}};
  const auto [first, second] = representation_pair(*prob);
  int code = exit_code::ok;
  try {
    const PulledBackProblem pb1 = pull_back(prob, p, first.retraction, first.linmap);
    const HessianForm h = lagrangian_hessian(pb1, fo.cert->mu_frame);
    report["hessian"] = json{{"matrix", mat_json(h.matrix)},
                             {"chart_id", h.chart_id},
                             {"analytic", h.analytic},
                             {"richardson_gap", num(h.richardson_gap)},
                             {"ill_conditioned", h.ill_conditioned}};
    const Verdict sosc = sosc_check(h.matrix, cc.cone_M_frame);
    const Verdict sonc = sonc_check(h.matrix, cc.cone_M_frame);
    report["sosc"] = verdict_json(sosc);
    report["sonc"] = verdict_json(sonc);
    if (sonc.kind != VerdictKind::holds) code = exit_code::not_certified;

    if (first.retraction != second.retraction || first.linmap != second.linmap) {
      const PulledBackProblem pb2 = pull_back(prob, p, second.retraction, second.linmap);
      const InvarianceReport inv = invariance_check(*fo.lm, *fo.cert, pb1, pb2, 0.0, cfg.samples, cfg.seed);
      const double tol = inv.h1.analytic && inv.h2.analytic ? 1e-9 : 1e-5;
      InvarianceReport judged = inv;
      judged.pass = inv.on_cone_max <= tol;
      report["invariance"] = invariance_json(first, second, judged, tol);
    } else {
      report["invariance"] = json{{"skipped", "model has a single retraction and linearizing map"}};
    }
  } catch (const NotStationary& e) {
    report["second_order_error"] = e.what();
    code = exit_code::not_certified;
  }
  report["exit_code"] = code;
  return code;
}

int cmd_solve(const RunConfig& cfg, json& report) {
  report = header("solve", cfg);
  const Model m = load_model(cfg);
  check_chart_choice(cfg, m);
  const Point p0 = require_point(cfg, m, m.start);
  SolveOptions opts = cfg.solver;
  opts.seed = cfg.seed;
  if (!opts.retraction.empty()) {
    const auto kinds = m.problem->M->retraction_kinds();
    if (std::find(kinds.begin(), kinds.end(), opts.retraction) == kinds.end())
      throw ConfigError("unknown retraction kind '" + opts.retraction + "'");
  }
  report["start"] = vec_json(p0.x);
  SolveResult r;
  try {
    r = solve(m.problem, p0, opts);
  } catch (const BadParams& e) {
    throw ConfigError(e.what());
  }
  json trace = json::array();
  for (const IterationRecord& it : r.iterations) {
    trace.push_back(json{{"iteration", it.iteration},
                         {"f", num(it.f)},
                         {"kkt_residual", num(it.kkt_residual)},
                         {"feasibility", num(it.feasibility)},
                         {"step_norm", num(it.step_norm)},
                         {"step_length", num(it.step_length)},
                         {"merit_before", num(it.merit_before)},
                         {"merit_after", num(it.merit_after)},
                         {"restoration", it.restoration},
                         {"second_order_correction", it.second_order_correction}});
  }
  report["iterations"] = trace;
  report["status"] = to_string(r.status);
  report["message"] = r.message;
  report["point"] = vec_json(r.point.x);
  report["f"] = num(m.problem->f(r.point));
  if (r.certificate) report["kkt"] = certificate_json(*r.certificate);
  const int code = r.status == SolveStatus::converged  ? exit_code::ok
                   : r.status == SolveStatus::max_iter ? exit_code::not_certified
                                                       : exit_code::breakdown;
  report["exit_code"] = code;
  return code;
}

int cmd_invariance(const RunConfig& cfg, json& report) {
  report = header("invariance", cfg);
  const Model m = load_model(cfg);
  check_chart_choice(cfg, m);
  const Point p = require_point(cfg, m, m.reference_point);
  const FirstOrder fo = first_order(cfg, m, p, report);
  if (fo.code != exit_code::ok) {
    report["exit_code"] = fo.code;
    return fo.code;
  }
  const ProblemPtr& prob = m.problem;
  const MapChoice base{prob->M->retraction_kinds().front(), "adapted:0"};
  const PulledBackProblem pb0 = pull_back(prob, p, base.retraction, base.linmap);
  json pairs = json::array();
  bool all_adapted_pass = true;
  for (const auto& rk : prob->M->retraction_kinds()) {
    for (const auto& lmap : linearizing_maps(*prob)) {
      const MapChoice other{rk, lmap.name};
      if (other.retraction == base.retraction && other.linmap == base.linmap) continue;
      try {
        const PulledBackProblem pb = pull_back(prob, p, rk, lmap.name);
        const InvarianceReport inv = invariance_check(*fo.lm, *fo.cert, pb0, pb, 0.0, cfg.samples, cfg.seed);
        const double tol = inv.h1.analytic && inv.h2.analytic ? 1e-9 : 1e-5;
        InvarianceReport judged = inv;
        judged.pass = inv.on_cone_max <= tol;
        if (judged.both_adapted && !judged.pass) all_adapted_pass = false;
        pairs.push_back(invariance_json(base, other, judged, tol));
      } catch (const Error& e) {
        pairs.push_back(json{{"second", json{{"retraction", rk}, {"linmap", lmap.name}}}, {"error", e.what()}});
        if (lmap.adapted) all_adapted_pass = false;
      }
    }
  }
  report["pairs"] = pairs;
  const int code = all_adapted_pass ? exit_code::ok : exit_code::not_certified;
  report["exit_code"] = code;
  return code;
}

namespace {

void print_value(const json& v, std::ostream& out, int indent);

bool scalar_array(const json& v) {
  for (const auto& e : v)
    if (e.is_structured()) return false;
  return true;
}

void print_scalar(const json& v, std::ostream& out) {
  if (v.is_string())
    out << v.get<std::string>();
  else if (v.is_number_float()) {
    std::ostringstream s;
    s.precision(10);
    s << v.get<double>();
    out << s.str();
  } else
    out << v.dump();
}

void print_value(const json& v, std::ostream& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (v.is_object()) {
    for (const auto& [k, e] : v.items()) {
      out << pad << k << ":";
      if (e.is_structured() && !(e.is_array() && scalar_array(e))) {
        out << "\n";
        print_value(e, out, indent + 2);
      } else {
        out << " ";
        print_value(e, out, 0);
        out << "\n";
      }
    }
  } else if (v.is_array()) {
    if (scalar_array(v)) {
      out << "[";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ", ";
        print_scalar(v[i], out);
      }
      out << "]";
      return;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].is_array()) {
        out << pad;
        print_value(v[i], out, 0);
        out << "\n";
      } else {
        out << pad << "- [" << i << "]\n";
        print_value(v[i], out, indent + 2);
      }
    }
  } else {
    print_scalar(v, out);
  }
}

}  // namespace

void print_text(const json& report, std::ostream& out) { print_value(report, out, 0); }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimization on manifolds with constraints in submanifolds with corners", "mcopt"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path, model, point_csv, output, filter;
  std::uint64_t seed = 0;
  double tol = 0.0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file (dotted.key = JSON value)");
    sub->add_option("--model", model, "model name");
    sub->add_option("--point", point_csv, "comma-separated ambient coordinates");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--output", output, "text or json")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--tol", tol, "KKT tolerance (also the solver's)")->check(CLI::PositiveNumber);
  };
  CLI::App* list = app.add_subcommand("list-models", "list built-in models");
  list->add_option("filter", filter, "substring filter on model names");
  list->add_option("--output", output, "text or json")->check(CLI::IsMember({"text", "json"}));
  CLI::App* check = app.add_subcommand("check", "constraint qualifications and KKT certificate at a point");
  CLI::App* certify = app.add_subcommand("certify", "first- and second-order certification at a point");
  CLI::App* solvec = app.add_subcommand("solve", "run the SQP solver");
  CLI::App* inv = app.add_subcommand("invariance", "compare Hessians across retractions and linearizing maps");
  for (CLI::App* s : {check, certify, solvec, inv}) common(s);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : exit_code::config_error;
  }

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot read config file " + config_path);
      std::stringstream buf;
      buf << in.rdbuf();
      apply_config_text(cfg, buf.str());
    }
    if (!model.empty()) cfg.model = model;
    if (!point_csv.empty()) cfg.point = parse_point_csv(point_csv);
    if (!output.empty()) cfg.output = output;
    for (CLI::App* s : {check, certify, solvec, inv}) {
      if (s->count("--seed")) cfg.seed = seed;
      if (s->count("--tol")) cfg.tol = cfg.solver.tol_kkt = tol;
    }

    json report;
    int code = exit_code::ok;
    if (*list)
      report = cmd_list_models(filter);
    else if (*check)
      code = cmd_check(cfg, report);
    else if (*certify)
      code = cmd_certify(cfg, report);
    else if (*solvec)
      code = cmd_solve(cfg, report);
    else
      code = cmd_invariance(cfg, report);

    if (cfg.output == "json")
      out << report.dump(2) << "\n";
    else
      print_text(report, out);
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::config_error;
  } catch (const BadParams& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::config_error;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::breakdown;
  }
}

}  // namespace mcopt::cli
