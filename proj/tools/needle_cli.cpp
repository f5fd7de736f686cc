#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "needle/acceptance.hpp"
#include "needle/errors.hpp"
#include "needle/io.hpp"
#include "needle/parallel.hpp"

using namespace needle;

namespace {

constexpr double kMongeRelTol = 1e-6;
constexpr double kDualityRelTol = 1e-9;
constexpr double kConsistencyTol = 1e-12;

struct Config {
  std::string command;
  std::string space_path;
  std::string marginals_path;
  std::string density_path;
  std::optional<double> K, N, D, tol;
  std::vector<double> v_grid{0.25, 0.5, 0.75};
  std::uint64_t seed = 1;
  std::size_t budget = 64;
  std::size_t samples = 0;  // 0: per-command default
  int threads = 1;
  std::string out;
};

struct Outcome {
  Json report;
  bool pass = true;
  std::string csv;  // sidecar, written next to --out when non-empty
};

Json optional_number(const std::optional<double>& x) { return x ? number(*x) : Json(nullptr); }

Json config_echo(const Config& c) {
  return {{"command", c.command},
          {"space", c.space_path},
          {"marginals", c.marginals_path},
          {"density", c.density_path},
          {"K", optional_number(c.K)},
          {"N", optional_number(c.N)},
          {"D", optional_number(c.D)},
          {"tol", optional_number(c.tol)},
          {"v_grid", numbers(c.v_grid)},
          {"seed", c.seed},
          {"budget", c.budget},
          {"samples", c.samples},
          {"threads", thread_count()},
          {"out", c.out}};
}

Json versions() {
  return {{"needle", NEEDLE_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"cli11", CLI11_VERSION}};
}

[[noreturn]] void config_error(const std::string& msg) { fail("io", "ConfigError", msg); }

LoadedSpace require_space(const Config& c) {
  if (c.space_path.empty()) config_error(c.command + " needs --space");
  return load_space(c.space_path);
}

std::pair<std::vector<double>, std::vector<double>> require_marginals(const Config& c, const MMSpace& s) {
  if (c.marginals_path.empty()) config_error(c.command + " needs --marginals");
  return load_marginals(c.marginals_path, s);
}

double require(const std::optional<double>& x, const std::optional<double>& fallback, const char* flag,
               const std::string& command) {
  if (x) return *x;
  if (fallback) return *fallback;
  config_error(command + " needs " + flag);
}

Outcome solve_monge(const Config& c) {
  const auto loaded = require_space(c);
  const auto& s = loaded.space;
  const auto [mu0, mu1] = require_marginals(c, s);
  const auto sol = solve_w1(s, mu0, mu1);
  const auto ts = build_transport_structure(s, gamma_set(s, sol, c.tol.value_or(default_gamma_tol(s))));
  const auto dec = partition_rays(s, ts);
  const auto r = assemble_monge_map(s, dec, sol);
  Outcome o;
  o.pass = std::abs(r.cost - r.w1) <= kMongeRelTol * (1.0 + r.w1) &&
           std::abs(sol.duality_gap) <= kDualityRelTol * (1.0 + r.w1);
  o.report = {{"w1", solution_json(s, sol)}, {"monge", coupling_json(s, r)}};
  return o;
}

Outcome decompose(const Config& c) {
  const auto loaded = require_space(c);
  const auto& s = loaded.space;
  const auto [mu0, mu1] = require_marginals(c, s);
  const auto sol = solve_w1(s, mu0, mu1);
  const auto ts = build_transport_structure(s, gamma_set(s, sol, c.tol.value_or(default_gamma_tol(s))));
  const auto dec = partition_rays(s, ts);
  const auto w = s.weights();
  const auto dis = disintegrate(dec, w);
  std::mt19937_64 rng(c.seed);
  const auto consistency = check_consistency_random(dec, w, dis, c.samples ? c.samples : 100, rng);
  // Balance of the density of mu0 - mu1 with respect to m.
  std::vector<double> f(s.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (w[i] > 0) f[i] = (mu0[i] - mu1[i]) / w[i];
  const auto balance = check_balance(s, dec, f);
  Outcome o;
  o.pass = consistency.max_abs_error <= kConsistencyTol;
  o.report = {{"decomposition", decomposition_json(s, ts, dec)},
              {"disintegration", disintegration_json(dis, consistency, balance)}};
  return o;
}

struct DensityInput {
  Density1D h;
  std::optional<double> K, N;  // from an interval space spec
};

DensityInput require_density(const Config& c) {
  if (!c.density_path.empty()) return {load_density_csv(c.density_path), {}, {}};
  if (!c.space_path.empty()) {
    auto loaded = load_space(c.space_path);
    if (!loaded.density) config_error(c.command + ": --space must be an interval spec when no --density is given");
    return {std::move(*loaded.density), loaded.model->K, loaded.model->N};
  }
  config_error(c.command + " needs --density or an interval --space");
}

Outcome check_cd(const Config& c) {
  const auto in = require_density(c);
  const double K = require(c.K, in.K, "--K", c.command), N = require(c.N, in.N, "--N", c.command);
  std::mt19937_64 rng(c.seed);
  const auto triples = grid_triples(in.h, c.samples ? c.samples : 1000, rng);
  const auto r = cd_density_check(in.h, K, N, triples, c.tol.value_or(kCurvatureRelTol));
  return {cd_report_json(r), r.pass, {}};
}

Outcome check_mcp(const Config& c) {
  const auto in = require_density(c);
  const double K = require(c.K, in.K, "--K", c.command), N = require(c.N, in.N, "--N", c.command);
  std::mt19937_64 rng(c.seed);
  const auto quads = grid_quads(in.h, c.samples ? c.samples : 10000, rng);
  const auto r = mcp_density_check(in.h, K, N, quads, c.tol.value_or(kCurvatureRelTol));
  return {mcp_report_json(r), r.pass, {}};
}

Outcome profile(const Config& c) {
  const auto loaded = require_space(c);
  const auto& s = loaded.space;
  const auto candidates = profile_candidates(s, c.budget, c.seed);
  const std::optional<double> K = c.K ? c.K : (loaded.model ? std::optional(loaded.model->K) : std::nullopt);
  const std::optional<double> N = c.N ? c.N : (loaded.model ? std::optional(loaded.model->N) : std::nullopt);
  const double D = c.D.value_or(s.max_distance());
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "v,empirical,model\n";
  for (double v : c.v_grid) {
    Json row{{"v", number(v)}};
    double model = std::nan("");
    if (v <= 0.0 || v >= 1.0) {
      row["empirical"] = 0.0;
      if (K && N) model = model_profile({*K, *N, D}, v);
    } else {
      const auto p = empirical_profile(s, candidates, v);
      row["empirical"] = number(p.content);
      row["attained"] = number(p.attained);
      row["mass_defect"] = number(p.mass_defect);
      row["candidate"] = p.kind;
      row["set_size"] = p.set_size;
      if (K && N) model = model_profile({*K, *N, D}, p.attained);
    }
    if (K && N) {
      row["model"] = number(model);
      row["slack"] = number(row["empirical"].get<double>() - model);
    }
    csv << format_number(v) << ',' << format_number(row["empirical"].get<double>()) << ',';
    if (K && N) csv << format_number(model);
    csv << '\n';
    rows.push_back(std::move(row));
  }
  Json report{{"rows", rows}, {"D_used", number(D)}, {"mesh", number(s.mesh())}};
  return {report, true, csv.str()};
}

Outcome levy_gromov(const Config& c) {
  const auto loaded = require_space(c);
  const std::optional<double> fK = loaded.model ? std::optional(loaded.model->K) : std::nullopt;
  const std::optional<double> fN = loaded.model ? std::optional(loaded.model->N) : std::nullopt;
  const double K = require(c.K, fK, "--K", c.command), N = require(c.N, fN, "--N", c.command);
  if (c.D) config_error("levy-gromov compares against the diameter of the space; --D is not accepted");
  const auto r = levy_gromov_check(loaded.space, K, N, c.v_grid, c.budget, c.seed);
  return {levy_gromov_json(r), r.pass, levy_gromov_csv(r)};
}

Outcome selftest(const Config& c) {
  Outcome o;
  Json criteria = Json::array();
  for (const auto& r : run_acceptance(c.seed)) {
    std::cout << format_result(r) << '\n';
    criteria.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    o.pass = o.pass && r.pass;
  }
  o.report = {{"criteria", criteria}};
  return o;
}

std::string sidecar_path(const std::string& out) {
  return std::filesystem::path(out).replace_extension(".csv").string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"needle: needle decompositions, Monge maps and isoperimetric checks on metric measure spaces"};
  app.require_subcommand(1);
  Config c;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "Seed for all random draws");
    sub->add_option("--out", c.out, "Report JSON path (stdout when omitted)");
    sub->add_option("--threads", c.threads, "Worker threads (NEEDLE_THREADS overrides)")->check(CLI::PositiveNumber);
  };
  auto space = [&](CLI::App* sub) { sub->add_option("--space", c.space_path, "Space spec JSON")->check(CLI::ExistingFile); };
  auto marginals = [&](CLI::App* sub) {
    sub->add_option("--marginals", c.marginals_path, "Marginals JSON {mu0, mu1}")->check(CLI::ExistingFile);
  };
  auto curvature = [&](CLI::App* sub) {
    sub->add_option("--K", c.K, "Curvature bound");
    sub->add_option("--N", c.N, "Dimension bound");
  };
  auto tol = [&](CLI::App* sub, const char* what) { sub->add_option("--tol", c.tol, what); };
  auto profile_opts = [&](CLI::App* sub) {
    sub->add_option("--v-grid", c.v_grid, "Volumes, comma separated")->delimiter(',');
    sub->add_option("--budget", c.budget, "Candidate budget")->check(CLI::PositiveNumber);
  };
  auto density = [&](CLI::App* sub) {
    sub->add_option("--density", c.density_path, "Density CSV with columns t,h")->check(CLI::ExistingFile);
    sub->add_option("--samples", c.samples, "Number of sampled triples or quadruples");
  };

  auto* monge = app.add_subcommand("solve-monge", "Optimal plan, potential and assembled Monge coupling");
  common(monge), space(monge), marginals(monge), tol(monge, "Gamma tolerance");
  auto* dec = app.add_subcommand("decompose", "Transport rays, branching sets and disintegration");
  common(dec), space(dec), marginals(dec), tol(dec, "Gamma tolerance");
  dec->add_option("--samples", c.samples, "Random (B, C) pairs for the consistency check");
  auto* cd = app.add_subcommand("check-cd", "CD(K,N) check of a 1D density");
  common(cd), space(cd), curvature(cd), density(cd), tol(cd, "Relative tolerance");
  auto* mcp = app.add_subcommand("check-mcp", "MCP(K,N) check of a 1D density");
  common(mcp), space(mcp), curvature(mcp), density(mcp), tol(mcp, "Relative tolerance");
  auto* prof = app.add_subcommand("profile", "Empirical isoperimetric profile");
  common(prof), space(prof), curvature(prof), profile_opts(prof);
  prof->add_option("--D", c.D, "Model diameter (default: diameter of the space)");
  auto* lg = app.add_subcommand("levy-gromov", "Empirical profile against the model profile");
  common(lg), space(lg), curvature(lg), profile_opts(lg);
  lg->add_option("--D", c.D, "Not accepted; the diameter of the space is used");
  auto* self = app.add_subcommand("selftest", "Run the acceptance suite");
  common(self);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  c.command = app.get_subcommands().front()->get_name();
  set_thread_count(c.threads);

  const auto start = std::chrono::steady_clock::now();
  Json manifest{{"versions", versions()}, {"seed", c.seed}, {"config", config_echo(c)}};
  Outcome outcome;
  int status = 0;
  try {
    if (c.command == "solve-monge") outcome = solve_monge(c);
    else if (c.command == "decompose") outcome = decompose(c);
    else if (c.command == "check-cd") outcome = check_cd(c);
    else if (c.command == "check-mcp") outcome = check_mcp(c);
    else if (c.command == "profile") outcome = profile(c);
    else if (c.command == "levy-gromov") outcome = levy_gromov(c);
    else outcome = selftest(c);
    status = outcome.pass ? 0 : 2;
    outcome.report["verdict"] = outcome.pass ? "pass" : "fail";
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    outcome = {};
    outcome.report = {{"verdict", "error"}, {"error", {{"code", e.code()}, {"message", e.what()}}}};
    status = 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    outcome = {};
    outcome.report = {{"verdict", "error"}, {"error", {{"code", "internal"}, {"message", e.what()}}}};
    status = 1;
  }
  manifest["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  outcome.report["manifest"] = manifest;

  try {
    if (c.out.empty()) {
      std::cout << outcome.report.dump(2) << '\n';
    } else {
      write_json_atomic(c.out, outcome.report);
      if (!outcome.csv.empty()) write_text_atomic(sidecar_path(c.out), outcome.csv);
      std::cout << c.command << ": " << outcome.report["verdict"].get<std::string>() << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return status;
}
