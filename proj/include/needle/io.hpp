#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "needle/curvature.hpp"
#include "needle/disint.hpp"
#include "needle/isoperim.hpp"
#include "needle/mmspace.hpp"
#include "needle/monge1d.hpp"
#include "needle/rays.hpp"
#include "needle/w1solve.hpp"

namespace needle {

using Json = nlohmann::json;

/// A space read from a space-spec document. Interval specs also carry their
/// model density and parameters.
struct LoadedSpace {
  MMSpace space;
  std::optional<Density1D> density;
  std::optional<ModelProfileSpec> model;
};

/// Throws io.ConfigError for malformed specs (plus the mmspace errors of the
/// constructors).
LoadedSpace parse_space(const Json& spec);
/// Throws io.IOError when the file cannot be read or parsed.
LoadedSpace load_space(const std::string& path);

/// {"mu0": ..., "mu1": ...}; each either an object keyed by point id (missing
/// ids are 0) or an array in point order. Throws io.ConfigError.
std::pair<std::vector<double>, std::vector<double>> parse_marginals(const Json& doc, const MMSpace& space);
std::pair<std::vector<double>, std::vector<double>> load_marginals(const std::string& path, const MMSpace& space);

/// CSV with a header row naming columns t and h.
Density1D load_density_csv(const std::string& path);
std::string density_csv(const Density1D& h);

Json read_json(const std::string& path);
/// Writes through a temporary file in the same directory and renames it.
void write_text_atomic(const std::string& path, const std::string& text);
void write_json_atomic(const std::string& path, const Json& doc);

/// Finite values as numbers; +inf, -inf and NaN as the strings "inf", "-inf", "nan".
Json number(double x);
Json numbers(const std::vector<double>& xs);
/// Shortest text that reads back to the same double.
std::string format_number(double x);

Json solution_json(const MMSpace& space, const W1Solution& sol);
Json coupling_json(const MMSpace& space, const MongeResult& result);
Json decomposition_json(const MMSpace& space, const TransportStructure& ts, const RayDecomposition& dec);
Json disintegration_json(const Disintegration& dis, const ConsistencyReport& consistency, const BalanceReport& balance);
Json cd_report_json(const CDReport& r);
Json mcp_report_json(const MCPReport& r);
Json levy_gromov_json(const LevyGromovReport& r);
/// v, empirical, model rows for plotting.
std::string levy_gromov_csv(const LevyGromovReport& r);

}  // namespace needle
