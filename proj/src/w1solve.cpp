#include "needle/w1solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "needle/errors.hpp"
#include "needle/network_simplex.hpp"

namespace needle {
namespace {

constexpr double kBalanceTol = 1e-10;
// Integer cost units per unit of the largest distance.
constexpr double kCostResolution = 1e12;

void check_marginal(std::span<const double> mu, std::size_t n, const char* name) {
  if (mu.size() != n) {
    fail("w1solve", "BadMarginal", std::string(name) + " has wrong length");
  }
  for (double x : mu) {
    if (!(x >= 0.0) || !std::isfinite(x)) fail("w1solve", "BadMarginal", std::string(name) + " must be nonnegative");
  }
}

}  // namespace

std::vector<std::int64_t> quantize_mass(std::span<const double> p) {
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(total > 0.0)) fail("w1solve", "BadMarginal", "marginal has zero mass");
  std::vector<std::int64_t> units(p.size());
  std::vector<std::pair<double, std::size_t>> remainders(p.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double exact = p[i] / total * static_cast<double>(kMassUnits);
    const double fl = std::floor(exact);
    units[i] = static_cast<std::int64_t>(fl);
    assigned += units[i];
    remainders[i] = {exact - fl, i};
  }
  std::int64_t missing = kMassUnits - assigned;
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; missing > 0; k = (k + 1) % remainders.size(), --missing) {
    ++units[remainders[k].second];
  }
  while (missing < 0) {
    // Floating rounding can overshoot by a few units; take them from the largest entries.
    auto it = std::max_element(units.begin(), units.end());
    --*it;
    ++missing;
  }
  return units;
}

double lipschitz_residual(const MMSpace& space, std::span<const double> phi) {
  const std::size_t n = space.size();
  double worst = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const auto row = space.row(x);
    for (std::size_t y = x + 1; y < n; ++y) worst = std::max(worst, std::abs(phi[x] - phi[y]) - row[y]);
  }
  return worst;
}

W1Solution solve_w1(const MMSpace& space, std::span<const double> mu0, std::span<const double> mu1) {
  const std::size_t n = space.size();
  check_marginal(mu0, n, "mu0");
  check_marginal(mu1, n, "mu1");
  const double s0 = std::accumulate(mu0.begin(), mu0.end(), 0.0);
  const double s1 = std::accumulate(mu1.begin(), mu1.end(), 0.0);
  if (std::abs(s0 - s1) > kBalanceTol) {
    fail("w1solve", "UnbalancedMarginals", "total masses differ by " + std::to_string(s0 - s1));
  }

  W1Solution sol;
  sol.mu0_units = quantize_mass(mu0);
  sol.mu1_units = quantize_mass(mu1);
  std::vector<std::int64_t> excess(n);
  for (std::size_t i = 0; i < n; ++i) excess[i] = sol.mu0_units[i] - sol.mu1_units[i];

  const double maxd = space.max_distance();
  sol.cost_scale = maxd > 0.0 ? kCostResolution / maxd : 1.0;
  auto icost = [&](std::size_t x, std::size_t y) {
    return static_cast<NetworkSimplex::Cost>(std::llround(space.distance(x, y) * sol.cost_scale));
  };

  std::vector<double> phi(n, 0.0);
  std::map<std::pair<int, int>, std::int64_t> moved;
  const bool graph_like = !space.edges().empty();

  std::vector<int> supplies, demands;
  for (std::size_t i = 0; i < n; ++i) {
    if (excess[i] > 0) supplies.push_back(static_cast<int>(i));
    if (excess[i] < 0) demands.push_back(static_cast<int>(i));
  }

  if (!supplies.empty()) {
    if (graph_like) {
      NetworkSimplex ns(static_cast<int>(n));
      ns.reserve_arcs(2 * space.edges().size());
      for (const auto& e : space.edges()) {
        const auto c = icost(e.u, e.v);
        ns.add_arc(e.u, e.v, c);
        ns.add_arc(e.v, e.u, c);
      }
      for (std::size_t i = 0; i < n; ++i) ns.set_supply(static_cast<int>(i), excess[i]);
      if (ns.solve() != NetworkSimplex::Status::kOptimal) {
        fail("w1solve", "SolverFailure", "transshipment problem not solved to optimality");
      }
      sol.pivots = ns.pivots();
      for (std::size_t i = 0; i < n; ++i) phi[i] = -static_cast<double>(ns.potential(static_cast<int>(i))) / sol.cost_scale;

      // Collapse transshipment paths into direct source -> sink pairs.
      std::vector<std::vector<int>> out(n);
      std::vector<std::int64_t> rest(ns.arc_count());
      for (int a = 0; a < ns.arc_count(); ++a) {
        rest[a] = ns.flow(a);
        if (rest[a] > 0) out[ns.source(a)].push_back(a);
      }
      std::vector<std::size_t> cursor(n, 0);
      std::vector<std::int64_t> left = excess;
      std::vector<int> path;
      for (int s : supplies) {
        while (left[s] > 0) {
          path.clear();
          int cur = s;
          while (cur == s || left[cur] >= 0) {
            auto& c = cursor[cur];
            while (c < out[cur].size() && rest[out[cur][c]] == 0) ++c;
            if (c == out[cur].size()) fail("w1solve", "SolverFailure", "flow decomposition stalled");
            const int a = out[cur][c];
            path.push_back(a);
            cur = ns.target(a);
          }
          std::int64_t amount = std::min(left[s], -left[cur]);
          for (int a : path) amount = std::min(amount, rest[a]);
          for (int a : path) rest[a] -= amount;
          left[s] -= amount;
          left[cur] += amount;
          moved[{s, cur}] += amount;
        }
      }
    } else {
      // Transportation form: every supply point to every demand point.
      NetworkSimplex ns(static_cast<int>(supplies.size() + demands.size()));
      ns.reserve_arcs(supplies.size() * demands.size());
      const int offset = static_cast<int>(supplies.size());
      for (std::size_t a = 0; a < supplies.size(); ++a)
        for (std::size_t b = 0; b < demands.size(); ++b)
          ns.add_arc(static_cast<int>(a), offset + static_cast<int>(b), icost(supplies[a], demands[b]));
      for (std::size_t a = 0; a < supplies.size(); ++a) ns.set_supply(static_cast<int>(a), excess[supplies[a]]);
      for (std::size_t b = 0; b < demands.size(); ++b) ns.set_supply(offset + static_cast<int>(b), excess[demands[b]]);
      if (ns.solve() != NetworkSimplex::Status::kOptimal) {
        fail("w1solve", "SolverFailure", "transportation problem not solved to optimality");
      }
      sol.pivots = ns.pivots();
      for (int a = 0; a < ns.arc_count(); ++a) {
        if (ns.flow(a) > 0) moved[{supplies[ns.source(a)], demands[ns.target(a) - offset]}] += ns.flow(a);
      }
      // Demand potentials, extended to all points by the c-transform
      // phi(x) = min_t psi(t) + d(x, t), which is 1-Lipschitz and keeps every
      // transported pair saturated.
      std::vector<double> psi(demands.size());
      for (std::size_t b = 0; b < demands.size(); ++b)
        psi[b] = -static_cast<double>(ns.potential(offset + static_cast<int>(b))) / sol.cost_scale;
      for (std::size_t x = 0; x < n; ++x) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < demands.size(); ++b) best = std::min(best, psi[b] + space.distance(x, demands[b]));
        phi[x] = best;
      }
    }
  }

  // 1-Lipschitz envelope: removes the residual left by integer cost rounding.
  if (graph_like && !supplies.empty()) {
    std::vector<double> env(n);
    for (std::size_t x = 0; x < n; ++x) {
      double best = phi[x];
      const auto row = space.row(x);
      for (std::size_t y = 0; y < n; ++y) best = std::min(best, phi[y] + row[y]);
      env[x] = best;
    }
    phi = std::move(env);
  }
  const double lo = n ? *std::min_element(phi.begin(), phi.end()) : 0.0;
  for (double& v : phi) v -= lo;

  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t stay = std::min(sol.mu0_units[i], sol.mu1_units[i]);
    if (stay > 0) sol.plan.push_back({static_cast<int>(i), static_cast<int>(i), stay});
  }
  for (const auto& [key, units] : moved) {
    if (units > 0) sol.plan.push_back({key.first, key.second, units});
  }
  std::sort(sol.plan.begin(), sol.plan.end(), [](const PlanEntry& a, const PlanEntry& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });

  sol.primal_value = 0.0;
  for (const auto& e : sol.plan)
    if (e.source != e.target) sol.primal_value += e.mass() * space.distance(e.source, e.target);
  sol.dual_value = 0.0;
  for (std::size_t i = 0; i < n; ++i) sol.dual_value += phi[i] * (mu0[i] - mu1[i]);
  sol.duality_gap = sol.primal_value - sol.dual_value;
  sol.potential = std::move(phi);
  sol.lipschitz_residual = lipschitz_residual(space, sol.potential);
  return sol;
}

double default_gamma_tol(const MMSpace& space) { return 1e-6 * space.max_distance(); }

GammaSet::GammaSet(const MMSpace& space, std::vector<double> potential, double tol)
    : n_(space.size()), tol_(tol), phi_(std::move(potential)), member_(n_ * n_, 0) {
  if (phi_.size() != n_) fail("w1solve", "BadPotential", "potential has wrong length");
  for (std::size_t x = 0; x < n_; ++x) {
    const auto row = space.row(x);
    for (std::size_t y = 0; y < n_; ++y) {
      if (x == y || phi_[x] - phi_[y] >= row[y] - tol_) {
        member_[x * n_ + y] = 1;
        if (x != y) ++strict_count_;
      }
    }
  }
}

std::vector<std::pair<int, int>> GammaSet::strict_pairs() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(strict_count_);
  for (std::size_t x = 0; x < n_; ++x)
    for (std::size_t y = 0; y < n_; ++y)
      if (x != y && member_[x * n_ + y]) out.emplace_back(static_cast<int>(x), static_cast<int>(y));
  return out;
}

GammaSet gamma_set(const MMSpace& space, std::vector<double> potential, double tol) {
  return GammaSet(space, std::move(potential), tol);
}

GammaSet gamma_set(const MMSpace& space, const W1Solution& solution, double tol) {
  if (solution.lipschitz_residual > tol) {
    fail("w1solve", "TolTooSmall", "tolerance below the potential's Lipschitz residual");
  }
  GammaSet g(space, solution.potential, tol);
  for (const auto& e : solution.plan) {
    if (e.source != e.target && e.units > 0 && !g.contains(e.source, e.target)) {
      fail("w1solve", "TolTooSmall",
           "plan pair (" + std::to_string(e.source) + "," + std::to_string(e.target) + ") not in Gamma");
    }
  }
  return g;
}

CyclicReport check_cyclic_monotonicity(const MMSpace& space,
                                       std::span<const std::pair<int, int>> pairs, int k,
                                       std::size_t trials, std::mt19937_64& rng) {
  CyclicReport report;
  if (k < 2) fail("w1solve", "BadCycleLength", "k must be at least 2");
  if (pairs.empty()) return report;
  std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
  std::vector<std::pair<int, int>> cycle(k);
  report.worst_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    for (int i = 0; i < k; ++i) cycle[i] = pairs[pick(rng)];
    double matched = 0.0;
    double shifted = 0.0;
    for (int i = 0; i < k; ++i) {
      matched += space.distance(cycle[i].first, cycle[i].second);
      shifted += space.distance(cycle[i].first, cycle[(i + 1) % k].second);
    }
    const double violation = matched - shifted;
    if (violation > report.worst_violation) {
      report.worst_violation = violation;
      report.worst_cycle = cycle;
    }
    ++report.cycles_tested;
  }
  return report;
}

CyclicReport check_cyclic_monotonicity(const MMSpace& space, const GammaSet& gamma, int k,
                                       std::size_t trials, std::mt19937_64& rng) {
  auto pairs = gamma.strict_pairs();
  return check_cyclic_monotonicity(space, pairs, k, trials, rng);
}

GeodesicStabilityReport check_geodesic_stability(const MMSpace& space, const GammaSet& gamma,
                                                 double tol, std::size_t max_pairs,
                                                 std::mt19937_64& rng) {
  GeodesicStabilityReport report;
  auto pairs = gamma.strict_pairs();
  if (pairs.empty()) return report;
  std::shuffle(pairs.begin(), pairs.end(), rng);
  if (pairs.size() > max_pairs) pairs.resize(max_pairs);
  const auto& phi = gamma.potential();
  for (const auto& [x, y] : pairs) {
    const auto chain = space.geodesic(x, y);
    ++report.pairs_tested;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      for (std::size_t j = i + 1; j < chain.size(); ++j) {
        const int u = chain[i];
        const int v = chain[j];
        ++report.subpairs_tested;
        if (phi[u] - phi[v] < space.distance(u, v) - tol) ++report.failures;
      }
    }
  }
  report.failure_fraction = report.subpairs_tested
                                ? static_cast<double>(report.failures) / report.subpairs_tested
                                : 0.0;
  return report;
}

}  // namespace needle
