#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcopt/solver.hpp"

namespace mcopt::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int not_certified = 1;  ///< check/certify: condition fails; solve: max_iter
inline constexpr int infeasible = 2;
inline constexpr int config_error = 3;
inline constexpr int breakdown = 4;
}  // namespace exit_code

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string model;
  nlohmann::json params = nlohmann::json::object();
  std::optional<Vec> point;
  std::uint64_t seed = 0;
  std::string output = "text";
  double tol = Tolerances::kkt;
  int samples = 200;
  SolveOptions solver;
};

/// Lines "dotted.key = <JSON value>"; blank lines and lines starting with '#'
/// are ignored. Recognized keys: model.name, model.params, model.params.<name>,
/// point, seed, output, tol, invariance.samples, chart.m_chart,
/// chart.k_variant, solver.{max_iter, tol_kkt, tol_step, hessian_mode,
/// merit_penalty, retraction}.
void apply_config_text(RunConfig& cfg, const std::string& text);
/// The same keys as apply_config_text, rendered in that format.
std::string emit_config_text(const RunConfig& cfg);

Vec parse_point_csv(const std::string& csv);

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

nlohmann::json cmd_list_models(const std::string& filter);
/// Each command fills `report` and returns the exit code.
int cmd_check(const RunConfig& cfg, nlohmann::json& report);
int cmd_certify(const RunConfig& cfg, nlohmann::json& report);
int cmd_solve(const RunConfig& cfg, nlohmann::json& report);
int cmd_invariance(const RunConfig& cfg, nlohmann::json& report);

/// Plain-text rendering of a report.
void print_text(const nlohmann::json& report, std::ostream& out);

}  // namespace mcopt::cli
