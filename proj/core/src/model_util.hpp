#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "mcopt/geometry.hpp"

namespace mcopt::detail {

std::string center_tag(const Vec& c);
/// Same maps and differentials, smaller domain.
Chart with_radius(const Chart& c, double radius);

void check_keys(const nlohmann::json& params, const nlohmann::json& defaults, const std::string& model);
Vec to_vec(const nlohmann::json& j, const std::string& what);
Mat to_mat(const nlohmann::json& j, const std::string& what);
double get_number(const nlohmann::json& params, const nlohmann::json& defaults, const std::string& key);
int get_int(const nlohmann::json& params, const nlohmann::json& defaults, const std::string& key);

}  // namespace mcopt::detail
