#include "needle/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unistd.h>

#include "needle/errors.hpp"

namespace needle {
namespace {

[[noreturn]] void config_error(const std::string& msg) { fail("io", "ConfigError", msg); }

double get_number(const Json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_number()) config_error(std::string("missing numeric field '") + key + "'");
  return obj[key].get<double>();
}

std::vector<std::string> point_ids(const Json& spec, std::size_t n) {
  if (!spec.contains("points")) {
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
    return ids;
  }
  const auto& pts = spec["points"];
  if (!pts.is_array()) config_error("'points' must be an array");
  std::vector<std::string> ids;
  for (const auto& p : pts) ids.push_back(p.is_string() ? p.get<std::string>() : p.dump());
  if (n != 0 && ids.size() != n) config_error("'points' length does not match the metric");
  return ids;
}

std::vector<double> optional_weights(const Json& spec) {
  if (!spec.contains("weights")) return {};
  try {
    return spec["weights"].get<std::vector<double>>();
  } catch (const Json::exception&) {
    config_error("'weights' must be an array of numbers");
  }
}

std::vector<double> vector_for(const Json& v, const MMSpace& space, const char* name) {
  std::vector<double> out(space.size(), 0.0);
  if (v.is_array()) {
    if (v.size() != space.size()) config_error(std::string(name) + " has the wrong length");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) config_error(std::string(name) + " entries must be numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }
  if (!v.is_object()) config_error(std::string(name) + " must be an object keyed by point id or an array");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < space.size(); ++i) index.emplace(space.ids()[i], i);
  for (const auto& [key, value] : v.items()) {
    const auto it = index.find(key);
    if (it == index.end()) config_error(std::string(name) + " names unknown point '" + key + "'");
    if (!value.is_number()) config_error(std::string(name) + " entries must be numbers");
    out[it->second] = value.get<double>();
  }
  return out;
}

Json ids_of(const MMSpace& space, const std::vector<int>& points) {
  Json out = Json::array();
  for (int p : points) out.push_back(space.ids()[p]);
  return out;
}

}  // namespace

LoadedSpace parse_space(const Json& spec) {
  if (!spec.is_object() || !spec.contains("metric") || !spec["metric"].is_object()) {
    config_error("space spec needs a 'metric' object");
  }
  const auto& metric = spec["metric"];
  const std::string type = metric.value("type", "");
  LoadedSpace out;
  if (type == "matrix") {
    std::vector<std::vector<double>> data;
    try {
      data = metric.at("data").get<std::vector<std::vector<double>>>();
    } catch (const Json::exception&) {
      config_error("matrix metric needs 'data' as an array of numeric rows");
    }
    out.space = build_space(point_ids(spec, data.size()), MatrixMetric{std::move(data)}, optional_weights(spec));
  } else if (type == "graph") {
    if (!metric.contains("edges") || !metric["edges"].is_array()) config_error("graph metric needs 'edges'");
    auto ids = point_ids(spec, 0);
    GraphMetric g;
    for (const auto& e : metric["edges"]) {
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() || !e[2].is_number()) {
        config_error("graph edges are [i, j, w] with integer endpoints");
      }
      const int u = e[0].get<int>(), v = e[1].get<int>();
      if (u < 0 || v < 0 || u >= static_cast<int>(ids.size()) || v >= static_cast<int>(ids.size())) {
        config_error("graph edge endpoint out of range");
      }
      g.edges.push_back({u, v, e[2].get<double>()});
    }
    out.space = build_space(std::move(ids), g, optional_weights(spec));
  } else if (type == "interval") {
    const double K = get_number(metric, "K"), N = get_number(metric, "N"), D = get_number(metric, "D");
    const double n = get_number(metric, "n");
    if (n != std::floor(n) || n > 1e6) config_error("interval 'n' must be an integer");
    auto model = generate_interval_model(K, N, D, static_cast<int>(n));
    out.space = std::move(model.space);
    out.density = std::move(model.density);
    out.model = ModelProfileSpec{K, N, D};
  } else if (type == "sphere2") {
    const double n = get_number(metric, "n");
    const double seed = metric.contains("seed") ? get_number(metric, "seed") : 1.0;
    if (n != std::floor(n) || n > 1e6 || seed < 0 || seed != std::floor(seed)) {
      config_error("sphere2 'n' and 'seed' must be nonnegative integers");
    }
    out.space = generate_sphere_sample(2, static_cast<int>(n), static_cast<std::uint64_t>(seed));
  } else {
    config_error("unknown metric type '" + type + "'");
  }
  return out;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("io", "IOError", "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail("io", "IOError", path + ": " + e.what());
  }
}

LoadedSpace load_space(const std::string& path) { return parse_space(read_json(path)); }

std::pair<std::vector<double>, std::vector<double>> parse_marginals(const Json& doc, const MMSpace& space) {
  if (!doc.is_object() || !doc.contains("mu0") || !doc.contains("mu1")) config_error("marginals need 'mu0' and 'mu1'");
  return {vector_for(doc["mu0"], space, "mu0"), vector_for(doc["mu1"], space, "mu1")};
}

std::pair<std::vector<double>, std::vector<double>> load_marginals(const std::string& path, const MMSpace& space) {
  return parse_marginals(read_json(path), space);
}

Density1D load_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("io", "IOError", "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail("io", "IOError", path + " is empty");
  int col_t = -1, col_h = -1, cols = 0;
  {
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) {
      name.erase(0, name.find_first_not_of(" \t\r"));
      name.erase(name.find_last_not_of(" \t\r") + 1);
      if (name == "t") col_t = cols;
      if (name == "h") col_h = cols;
      ++cols;
    }
  }
  if (col_t < 0 || col_h < 0) config_error(path + ": header must name columns t and h");
  std::vector<double> grid, values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != cols) config_error(path + ":" + std::to_string(lineno) + ": wrong column count");
    try {
      grid.push_back(std::stod(cells[col_t]));
      values.push_back(std::stod(cells[col_h]));
    } catch (const std::exception&) {
      config_error(path + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  return Density1D(std::move(grid), std::move(values));
}

std::string density_csv(const Density1D& h) {
  std::ostringstream out;
  out << "t,h\n";
  for (std::size_t i = 0; i < h.size(); ++i) out << format_number(h.grid[i]) << ',' << format_number(h.values[i]) << '\n';
  return out.str();
}

void write_text_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail("io", "IOError", "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) fail("io", "IOError", "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail("io", "IOError", "cannot rename onto " + path);
  }
}

void write_json_atomic(const std::string& path, const Json& doc) { write_text_atomic(path, doc.dump(2) + "\n"); }

Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

std::string format_number(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json numbers(const std::vector<double>& xs) {
  Json out = Json::array();
  for (double x : xs) out.push_back(number(x));
  return out;
}

Json solution_json(const MMSpace& space, const W1Solution& sol) {
  Json plan = Json::array();
  for (const auto& e : sol.plan) {
    plan.push_back({{"from", space.ids()[e.source]}, {"to", space.ids()[e.target]}, {"mass", number(e.mass())}});
  }
  Json potential = Json::object();
  for (std::size_t i = 0; i < space.size(); ++i) potential[space.ids()[i]] = number(sol.potential[i]);
  return {{"plan", plan},
          {"potential", potential},
          {"primal_value", number(sol.primal_value)},
          {"dual_value", number(sol.dual_value)},
          {"residuals", {{"duality_gap", number(sol.duality_gap)}, {"lipschitz", number(sol.lipschitz_residual)}}},
          {"pivots", sol.pivots}};
}

Json coupling_json(const MMSpace& space, const MongeResult& result) {
  Json coupling = Json::array();
  for (const auto& e : result.coupling) {
    coupling.push_back({{"from", space.ids()[e.source]}, {"to", space.ids()[e.target]}, {"mass", number(e.mass())}});
  }
  return {{"coupling", coupling},
          {"cost", number(result.cost)},
          {"w1", number(result.w1)},
          {"defect", number(result.defect)},
          {"is_map", result.is_map},
          {"per_ray_costs", numbers(result.per_ray_cost)},
          {"max_ray_marginal_defect", number(static_cast<double>(result.max_ray_marginal_defect) / kMassUnits)}};
}

Json decomposition_json(const MMSpace& space, const TransportStructure& ts, const RayDecomposition& dec) {
  Json rays = Json::array();
  for (std::size_t r = 0; r < dec.rays.size(); ++r) {
    std::vector<double> params;
    for (int p : dec.rays[r]) params.push_back(dec.param[p]);
    rays.push_back({{"id", r},
                    {"points", ids_of(space, dec.rays[r])},
                    {"params", numbers(params)},
                    {"representative", space.ids()[dec.representatives[r]]},
                    {"mass", number(dec.ray_mass[r])}});
  }
  return {{"rays", rays},
          {"orphans", ids_of(space, dec.orphan_points)},
          {"orphan_mass", number(dec.orphan_mass)},
          {"non_chain_components", dec.non_chain_components},
          {"branching",
           {{"A_plus", ids_of(space, ts.branching_fwd)},
            {"A_minus", ids_of(space, ts.branching_bwd)},
            {"mass", number(ts.branching_mass)},
            {"fraction", number(ts.branching_fraction())}}},
          {"initial_points", ids_of(space, ts.initial_points)},
          {"final_points", ids_of(space, ts.final_points)}};
}

Json disintegration_json(const Disintegration& dis, const ConsistencyReport& consistency, const BalanceReport& balance) {
  return {{"consistency_max_err", number(consistency.max_abs_error)},
          {"consistency_pairs", consistency.pairs_tested},
          {"balance",
           {{"per_ray", numbers(balance.per_ray)},
            {"per_ray_conditional", numbers(balance.per_ray_conditional)},
            {"max_abs", number(balance.max_abs)},
            {"max_abs_conditional", number(balance.max_abs_conditional)},
            {"weighted_mean", number(balance.weighted_mean)}}},
          {"residual_mass", number(dis.residual_mass)},
          {"zero_mass_rays", dis.zero_mass_rays}};
}

Json cd_report_json(const CDReport& r) {
  return {{"verdict", r.pass ? "pass" : "fail"},
          {"margin", number(r.margin)},
          {"worst_triple", {number(r.worst.t0), number(r.worst.t1), number(r.worst.s)}},
          {"tested", r.tested},
          {"reason", r.reason}};
}

Json mcp_report_json(const MCPReport& r) {
  return {{"verdict", r.pass ? "pass" : "fail"},
          {"margin", number(r.margin)},
          {"worst_quadruple",
           {{"s", number(r.worst.s)},
            {"tau", number(r.worst.tau)},
            {"sigma_minus", number(r.worst.sigma_minus)},
            {"sigma_plus", number(r.worst.sigma_plus)}}},
          {"tested", r.tested},
          {"reason", r.reason}};
}

Json levy_gromov_json(const LevyGromovReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"v", number(row.v)},
                    {"attained", number(row.attained)},
                    {"empirical", number(row.empirical)},
                    {"model", number(row.model)},
                    {"slack", number(row.slack)},
                    {"relative_slack", number(row.relative_slack)},
                    {"allowance", number(row.allowance)},
                    {"pass", row.pass},
                    {"candidate", row.kind}});
  }
  return {{"verdict", r.pass ? "pass" : "fail"},
          {"rows", rows},
          {"allowance", number(kLevyGromovAllowance)},
          {"D_used", number(r.D_used)},
          {"mesh", number(r.mesh)},
          {"K", number(r.K)},
          {"N", number(r.N)}};
}

std::string levy_gromov_csv(const LevyGromovReport& r) {
  std::ostringstream out;
  out << "v,empirical,model\n";
  for (const auto& row : r.rows)
    out << format_number(row.v) << ',' << format_number(row.empirical) << ',' << format_number(row.model) << '\n';
  return out.str();
}

}  // namespace needle
