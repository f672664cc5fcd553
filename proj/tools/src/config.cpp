#include <cmath>
#include <sstream>

#include "mcopt_cli/cli.hpp"

namespace mcopt::cli {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key + ": expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError(key + ": expected an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key + ": expected a string");
  return v.get<std::string>();
}

Vec as_vec(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError(key + ": expected an array of numbers");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = as_number(v[i], key);
  return out;
}

void apply(RunConfig& cfg, const std::string& key, const json& v) {
  const std::string params_prefix = "model.params.";
  if (key == "model.name") {
    cfg.model = as_string(v, key);
  } else if (key == "model.params") {
    if (!v.is_object()) throw ConfigError(key + ": expected an object");
    for (const auto& [k, val] : v.items()) cfg.params[k] = val;
  } else if (key.rfind(params_prefix, 0) == 0 && key.size() > params_prefix.size()) {
    cfg.params[key.substr(params_prefix.size())] = v;
  } else if (key == "point") {
    cfg.point = as_vec(v, key);
  } else if (key == "seed") {
    if (!v.is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
    cfg.seed = v.get<std::uint64_t>();
  } else if (key == "output") {
    cfg.output = as_string(v, key);
    if (cfg.output != "text" && cfg.output != "json") throw ConfigError("output must be text or json");
  } else if (key == "tol") {
    cfg.tol = as_number(v, key);
  } else if (key == "invariance.samples") {
    cfg.samples = as_int(v, key);
  } else if (key == "chart.m_chart") {
    cfg.solver.chart.m_chart = as_string(v, key);
  } else if (key == "chart.k_variant") {
    cfg.solver.chart.k_variant = as_int(v, key);
  } else if (key == "solver.max_iter") {
    cfg.solver.max_iter = as_int(v, key);
  } else if (key == "solver.tol_kkt") {
    cfg.solver.tol_kkt = as_number(v, key);
  } else if (key == "solver.tol_step") {
    cfg.solver.tol_step = as_number(v, key);
  } else if (key == "solver.merit_penalty") {
    cfg.solver.merit_penalty = as_number(v, key);
  } else if (key == "solver.retraction") {
    cfg.solver.retraction = as_string(v, key);
  } else if (key == "solver.hessian_mode") {
    try {
      cfg.solver.hessian_mode = hessian_mode_from_string(as_string(v, key));
    } catch (const BadParams& e) {
      throw ConfigError(e.what());
    }
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace

void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    json v;
    try {
      v = json::parse(trim(t.substr(eq + 1)));
    } catch (const json::parse_error&) {
      throw ConfigError("line " + std::to_string(lineno) + ": value is not valid JSON");
    }
    apply(cfg, key, v);
  }
}

std::string emit_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  auto line = [&out](const std::string& key, const json& v) { out << key << " = " << v.dump() << "\n"; };
  line("model.name", cfg.model);
  for (const auto& [k, v] : cfg.params.items()) line("model.params." + k, v);
  if (cfg.point) line("point", std::vector<double>(cfg.point->data(), cfg.point->data() + cfg.point->size()));
  line("seed", cfg.seed);
  line("output", cfg.output);
  line("tol", cfg.tol);
  line("invariance.samples", cfg.samples);
  line("chart.m_chart", cfg.solver.chart.m_chart);
  line("chart.k_variant", cfg.solver.chart.k_variant);
  line("solver.max_iter", cfg.solver.max_iter);
  line("solver.tol_kkt", cfg.solver.tol_kkt);
  line("solver.tol_step", cfg.solver.tol_step);
  line("solver.merit_penalty", cfg.solver.merit_penalty);
  line("solver.retraction", cfg.solver.retraction);
  line("solver.hessian_mode", to_string(cfg.solver.hessian_mode));
  return out.str();
}

Vec parse_point_csv(const std::string& csv) {
  std::vector<double> vals;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw ConfigError("point: '" + t + "' is not a number");
    }
    if (used != t.size() || !std::isfinite(v)) throw ConfigError("point: '" + t + "' is not a finite number");
    vals.push_back(v);
  }
  if (vals.empty()) throw ConfigError("point: no coordinates");
  return Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace mcopt::cli
