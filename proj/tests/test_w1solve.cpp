#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "needle/network_simplex.hpp"
#include "needle/w1solve.hpp"

using namespace needle;
using needle::testing::error_kind;

namespace {

MMSpace random_matrix_space(int n, std::mt19937_64& rng) {
  // Euclidean points in the plane give a valid metric.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::array<double, 2>> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d[i][j] = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
  std::vector<std::string> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = "p" + std::to_string(i);
  return build_space(ids, MatrixMetric{d});
}

MMSpace random_graph_space(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.2, 1.5);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<WeightedEdge> edges;
  for (int i = 1; i < n; ++i) edges.push_back({i, std::uniform_int_distribution<int>(0, i - 1)(rng), w(rng)});
  for (int k = 0; k < 2 * n; ++k) {
    const int a = pick(rng), b = pick(rng);
    if (a != b) edges.push_back({a, b, w(rng)});
  }
  std::vector<std::string> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = std::to_string(i);
  return build_space(ids, GraphMetric{edges});
}

std::vector<double> random_probability(int n, std::mt19937_64& rng, double zero_fraction = 0.3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(n);
  for (auto& x : p) x = u(rng) < zero_fraction ? 0.0 : u(rng);
  if (std::accumulate(p.begin(), p.end(), 0.0) == 0.0) p[0] = 1.0;
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= s;
  return p;
}

// Plan marginals, in units.
void check_marginals(const W1Solution& sol, std::size_t n) {
  std::vector<std::int64_t> r0(n, 0), r1(n, 0);
  for (const auto& e : sol.plan) {
    CHECK(e.units > 0);
    r0[e.source] += e.units;
    r1[e.target] += e.units;
  }
  CHECK(r0 == sol.mu0_units);
  CHECK(r1 == sol.mu1_units);
}

}  // namespace

TEST_CASE("network simplex on a tiny transportation problem") {
  // Supplies 3, 2; demands 4, 1. Costs chosen so the optimum is unique.
  NetworkSimplex ns(4);
  ns.add_arc(0, 2, 1);
  ns.add_arc(0, 3, 5);
  ns.add_arc(1, 2, 4);
  ns.add_arc(1, 3, 2);
  ns.set_supply(0, 3);
  ns.set_supply(1, 2);
  ns.set_supply(2, -4);
  ns.set_supply(3, -1);
  REQUIRE(ns.solve() == NetworkSimplex::Status::kOptimal);
  // Enumerating x = flow(0->2) in [2, 3]: cost = x + 5(3-x) + 4(4-x) + 2(x-2) = 27 - 6x.
  CHECK(static_cast<long long>(ns.objective()) == 9);
  CHECK(ns.flow(0) == 3);
  for (int a = 0; a < ns.arc_count(); ++a) {
    const auto rc = ns.cost(a) + ns.potential(ns.source(a)) - ns.potential(ns.target(a));
    CHECK(rc >= 0);
    if (ns.flow(a) > 0) CHECK(rc == 0);
  }
}

TEST_CASE("network simplex reports infeasible supplies") {
  NetworkSimplex ns(3);
  ns.add_arc(0, 1, 1);
  ns.set_supply(0, 1);
  ns.set_supply(2, -1);
  CHECK(ns.solve() == NetworkSimplex::Status::kInfeasible);
}

TEST_CASE("two point transport") {
  auto s = build_space({"a", "b"}, MatrixMetric{{{0, 1}, {1, 0}}});
  const std::vector<double> mu0{1.0, 0.0}, mu1{0.5, 0.5};
  auto sol = solve_w1(s, mu0, mu1);
  // Brute force over the one free parameter of couplings with these marginals:
  // pi(a,b) = t in [0, 0.5], cost t, forced t = 0.5.
  double best = 1e9;
  for (int k = 0; k <= 1000; ++k) {
    const double t = 0.5 * k / 1000.0;
    if (std::abs(1.0 - t - 0.5) < 1e-12) best = std::min(best, t);
  }
  CHECK(sol.primal_value == doctest::Approx(best).epsilon(1e-12));
  CHECK(std::abs(sol.duality_gap) <= 1e-9);
  CHECK(sol.potential[0] - sol.potential[1] == doctest::Approx(1.0).epsilon(1e-12));
  check_marginals(sol, 2);
}

TEST_CASE("dirac to dirac on a path") {
  auto s = build_space({"0", "1", "2"}, GraphMetric{{{0, 1, 1.0}, {1, 2, 1.0}}});
  const std::vector<double> mu0{1, 0, 0}, mu1{0, 0, 1};
  auto sol = solve_w1(s, mu0, mu1);
  CHECK(sol.primal_value == doctest::Approx(2.0).epsilon(1e-12));
  REQUIRE(sol.plan.size() == 1);
  CHECK(sol.plan[0].source == 0);
  CHECK(sol.plan[0].target == 2);
  CHECK(sol.plan[0].units == kMassUnits);
  CHECK(sol.potential[0] - sol.potential[2] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("identical marginals cost nothing") {
  std::mt19937_64 rng(3);
  auto s = random_matrix_space(12, rng);
  auto mu = random_probability(12, rng);
  auto sol = solve_w1(s, mu, mu);
  CHECK(sol.primal_value == 0.0);
  CHECK(sol.dual_value == 0.0);
  for (const auto& e : sol.plan) CHECK(e.source == e.target);
}

TEST_CASE("marginal errors") {
  auto s = build_space({"a", "b"}, MatrixMetric{{{0, 1}, {1, 0}}});
  CHECK(error_kind([&] { solve_w1(s, std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 0.6}); }) ==
        "UnbalancedMarginals");
  CHECK(error_kind([&] { solve_w1(s, std::vector<double>{1.5, -0.5}, std::vector<double>{0.5, 0.5}); }) ==
        "BadMarginal");
  CHECK(error_kind([&] { solve_w1(s, std::vector<double>{1.0}, std::vector<double>{1.0}); }) == "BadMarginal");
}

TEST_CASE("quantized masses sum exactly") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 20; ++t) {
    auto p = random_probability(1 + t * 7, rng);
    auto q = quantize_mass(p);
    CHECK(std::accumulate(q.begin(), q.end(), std::int64_t{0}) == kMassUnits);
    for (std::size_t i = 0; i < p.size(); ++i)
      CHECK(std::abs(static_cast<double>(q[i]) / kMassUnits - p[i]) < 1e-11);
  }
}

TEST_CASE("random instances: duality, Lipschitz bound, complementary slackness") {
  std::mt19937_64 rng(20);
  for (int t = 0; t < 20; ++t) {
    const bool graph = t % 2 == 1;
    auto s = graph ? random_graph_space(30, rng) : random_matrix_space(30, rng);
    auto mu0 = random_probability(30, rng), mu1 = random_probability(30, rng);
    auto sol = solve_w1(s, mu0, mu1);
    CAPTURE(t);
    CHECK(std::abs(sol.duality_gap) <= 1e-9);
    CHECK(sol.lipschitz_residual <= 1e-9);
    check_marginals(sol, 30);
    CHECK(*std::min_element(sol.potential.begin(), sol.potential.end()) == 0.0);
    for (const auto& e : sol.plan) {
      if (e.source == e.target) continue;
      CHECK(std::abs(sol.potential[e.source] - sol.potential[e.target] - s.distance(e.source, e.target)) <= 1e-8);
    }
    auto g = gamma_set(s, sol, 1e-10 * s.max_distance());
    for (const auto& e : sol.plan) CHECK(g.contains(e.source, e.target));
  }
}

TEST_CASE("value is symmetric under swapping the marginals") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 6; ++t) {
    auto s = t % 2 ? random_graph_space(25, rng) : random_matrix_space(25, rng);
    auto mu0 = random_probability(25, rng), mu1 = random_probability(25, rng);
    const double a = solve_w1(s, mu0, mu1).primal_value;
    const double b = solve_w1(s, mu1, mu0).primal_value;
    CHECK(std::abs(a - b) <= 1e-9);
  }
}

TEST_CASE("graph and dense forms agree") {
  std::mt19937_64 rng(22);
  auto g = random_graph_space(40, rng);
  std::vector<std::vector<double>> d(40, std::vector<double>(40));
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j) d[i][j] = g.distance(i, j);
  auto dense = build_space(g.ids(), MatrixMetric{d});
  for (int t = 0; t < 5; ++t) {
    auto mu0 = random_probability(40, rng), mu1 = random_probability(40, rng);
    CHECK(std::abs(solve_w1(g, mu0, mu1).primal_value - solve_w1(dense, mu0, mu1).primal_value) <= 1e-9);
  }
}

TEST_CASE("line transport matches the CDF formula") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<double> pos(60);
  for (auto& p : pos) p = u(rng);
  std::sort(pos.begin(), pos.end());
  auto s = line_space(pos);
  auto mu0 = random_probability(60, rng), mu1 = random_probability(60, rng);
  auto sol = solve_w1(s, mu0, mu1);
  // Independent oracle: W1 = integral |F0 - F1| on the real line.
  double f0 = 0, f1 = 0, oracle = 0;
  for (int i = 0; i + 1 < 60; ++i) {
    f0 += mu0[i];
    f1 += mu1[i];
    oracle += std::abs(f0 - f1) * (pos[i + 1] - pos[i]);
  }
  CHECK(std::abs(sol.primal_value - oracle) <= 1e-9);
}

TEST_CASE("gamma set basics") {
  auto s = build_space({"0", "1", "2"}, GraphMetric{{{0, 1, 1.0}, {1, 2, 1.0}}});
  auto g = gamma_set(s, std::vector<double>{2.0, 1.0, 0.0}, 1e-12);
  CHECK(g.contains(0, 2));
  CHECK(g.contains(0, 1));
  CHECK(!g.contains(2, 0));
  CHECK(g.related(2, 0));
  CHECK(g.contains(1, 1));
  CHECK(g.strict_count() == 3);
}

TEST_CASE("tolerance below the residual is rejected") {
  std::mt19937_64 rng(24);
  auto s = random_matrix_space(10, rng);
  auto sol = solve_w1(s, random_probability(10, rng), random_probability(10, rng));
  sol.lipschitz_residual = 1e-3;
  CHECK(error_kind([&] { gamma_set(s, sol, 1e-6); }) == "TolTooSmall");
}

TEST_CASE("gamma is cyclically monotone and geodesically stable") {
  std::mt19937_64 rng(25);
  for (int t = 0; t < 4; ++t) {
    auto s = t % 2 ? random_graph_space(35, rng) : random_matrix_space(35, rng);
    auto sol = solve_w1(s, random_probability(35, rng), random_probability(35, rng));
    const double tol = 1e-9 * s.max_distance();
    auto g = gamma_set(s, sol, tol);
    for (int k = 2; k <= 4; ++k) {
      auto rep = check_cyclic_monotonicity(s, g, k, 3000, rng);
      CHECK(rep.cycles_tested == 3000);
      // Each matched pair can lose up to tol against the potential.
      CHECK(rep.worst_violation <= k * tol + 1e-12);
    }
    auto geo = check_geodesic_stability(s, g, 3 * tol, 200, rng);
    CHECK(geo.failures == 0);
  }
}

TEST_CASE("cyclic check edge cases") {
  auto s = build_space({"a", "b"}, MatrixMetric{{{0, 1}, {1, 0}}});
  std::mt19937_64 rng(1);
  std::vector<std::pair<int, int>> none;
  auto rep = check_cyclic_monotonicity(s, none, 3, 10, rng);
  CHECK(rep.cycles_tested == 0);
  CHECK(error_kind([&] { check_cyclic_monotonicity(s, none, 1, 10, rng); }) == "BadCycleLength");
}

TEST_CASE("larger dense instance stays exact") {
  std::mt19937_64 rng(26);
  auto s = random_matrix_space(300, rng);
  auto sol = solve_w1(s, random_probability(300, rng, 0.0), random_probability(300, rng, 0.0));
  CHECK(std::abs(sol.duality_gap) <= 1e-9);
  CHECK(sol.lipschitz_residual <= 1e-9);
  check_marginals(sol, 300);
}

TEST_CASE("two point transport with a free plan parameter") {
  auto s = build_space({"a", "b"}, MatrixMetric{{{0, 1}, {1, 0}}});
  const std::vector<double> mu0{0.7, 0.3}, mu1{0.2, 0.8};
  // With t = pi(b,a) in [0, 0.2]: pi(a,a) = 0.2 - t, pi(a,b) = 0.5 + t,
  // pi(b,b) = 0.3 - t, cost 0.5 + 2t. Exhaustive search over a fine grid.
  double best = 1e9;
  for (int k = 0; k <= 2000; ++k) {
    const double t = 0.2 * k / 2000.0;
    best = std::min(best, (0.5 + t) + t);
  }
  auto sol = solve_w1(s, mu0, mu1);
  CHECK(std::abs(sol.primal_value - best) <= 1e-12);
  CHECK(std::abs(sol.primal_value - 0.5) <= 1e-12);
}

TEST_CASE("distance to the target certifies a Dirac pair") {
  std::mt19937_64 rng(27);
  auto s = random_matrix_space(15, rng);
  std::vector<double> mu0(15, 0.0), mu1(15, 0.0);
  mu0[3] = 1.0;
  mu1[11] = 1.0;
  auto sol = solve_w1(s, mu0, mu1);
  CHECK(sol.primal_value == doctest::Approx(s.distance(3, 11)).epsilon(1e-12));
  std::vector<double> phi(15);
  for (int z = 0; z < 15; ++z) phi[z] = s.distance(z, 11);
  CHECK(lipschitz_residual(s, phi) <= 1e-15);
  CHECK(phi[3] - phi[11] == doctest::Approx(sol.primal_value).epsilon(1e-12));
  CHECK(gamma_set(s, sol, default_gamma_tol(s)).contains(3, 11));
}

TEST_CASE("an adversarial pair breaks cyclic monotonicity") {
  auto s = line_space({0.0, 1.0, 2.0, 3.0});
  // Gamma of phi = -x plus the pair (3, 0), far from saturated.
  auto g = gamma_set(s, std::vector<double>{0, -1, -2, -3}, 1e-12);
  auto pairs = g.strict_pairs();
  std::mt19937_64 rng(4);
  CHECK(check_cyclic_monotonicity(s, pairs, 3, 2000, rng).worst_violation <= 1e-12);
  pairs.emplace_back(3, 0);
  auto rep = check_cyclic_monotonicity(s, pairs, 2, 2000, rng);
  CHECK(rep.worst_violation > 0.0);
  // Direct sum on the cycle (0,3), (3,0): 3 + 3 against 0 + 0.
  CHECK(rep.worst_violation == doctest::Approx(6.0));
}

TEST_CASE("sphere chains stay in gamma at mesh scale") {
  auto s = generate_sphere_sample(2, 500, 1);
  std::vector<double> mu0(500, 0.0), mu1(500, 0.0);
  for (int i = 0; i < 500; ++i) (s.sphere_points()[i][2] > 0 ? mu0 : mu1)[i] = 1.0;
  for (auto* mu : {&mu0, &mu1}) {
    const double t = std::accumulate(mu->begin(), mu->end(), 0.0);
    for (auto& x : *mu) x /= t;
  }
  auto sol = solve_w1(s, mu0, mu1);
  auto g = gamma_set(s, sol, default_gamma_tol(s));
  std::mt19937_64 rng(6);
  auto rep = check_geodesic_stability(s, g, 2 * s.mesh(), 400, rng);
  CHECK(rep.pairs_tested > 0);
  CHECK(rep.failure_fraction <= 0.01);
}
