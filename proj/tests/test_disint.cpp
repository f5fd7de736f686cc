#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "needle/disint.hpp"

using namespace needle;
using needle::testing::error_kind;

namespace {

struct GridCase {
  MMSpace space;
  std::vector<double> f;
  RayDecomposition dec;
  double primal = 0.0;
  double dual = 0.0;
};

// Left half of each row sends to the right half; the potential -x is
// certified optimal when its dual value matches the solver's primal value.
GridCase grid_case(int width, int height) {
  GridCase c{generate_grid_space(width, height), {}, {}};
  const std::size_t n = c.space.size();
  c.f.resize(n);
  std::vector<double> phi(n);
  for (std::size_t p = 0; p < n; ++p) {
    const int i = static_cast<int>(p % width);
    c.f[p] = i < width / 2 ? 1.0 : -1.0;
    phi[p] = -double(i);
  }
  auto [mu0, mu1] = balance_marginals(c.space, c.f);
  c.primal = solve_w1(c.space, mu0, mu1).primal_value;
  for (std::size_t p = 0; p < n; ++p) c.dual += phi[p] * (mu0[p] - mu1[p]);
  c.dec = partition_rays(c.space, build_transport_structure(c.space, gamma_set(c.space, phi, 1e-9)));
  return c;
}

}  // namespace

TEST_CASE("single ray on the interval carries all of m") {
  auto m = generate_interval_model(1.0, 2.0, 3.0, 200);
  const auto w = m.space.weights();
  RayDecomposition dec;
  dec.rays = {std::vector<int>(200)};
  std::iota(dec.rays[0].begin(), dec.rays[0].end(), 0);
  dec.ray_of.assign(200, 0);
  dec.ray_mass = {1.0};
  auto dis = disintegrate(dec, w);
  CHECK(dis.quotient_weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < 200; ++i) CHECK(std::abs(dis.conditionals[0][i] - w[i]) <= 1e-12);
  CHECK(dis.residual_mass == 0.0);

  // f = indicator of [0, r] minus its mass balances on the single ray.
  std::vector<double> f(200);
  double v = 0.0;
  for (int i = 0; i < 200; ++i)
    if (m.density.grid[i] <= 1.2) v += w[i];
  for (int i = 0; i < 200; ++i) f[i] = (m.density.grid[i] <= 1.2 ? 1.0 : 0.0) - v;
  auto bal = check_balance(m.space, dec, f);
  CHECK(std::abs(bal.per_ray[0]) <= 1e-15);
}

TEST_CASE("grid rows: disintegration by direct counting") {
  const int width = 10, height = 7;
  auto c = grid_case(width, height);
  CHECK(c.dual == doctest::Approx(c.primal).epsilon(1e-9));
  REQUIRE(c.dec.rays.size() == static_cast<std::size_t>(height));
  const auto w = c.space.weights();
  auto dis = disintegrate(c.dec, w);
  for (int j = 0; j < height; ++j) {
    CHECK(dis.quotient_weights[j] == doctest::Approx(double(width) / (width * height)).epsilon(1e-12));
    for (double mq : dis.conditionals[j]) CHECK(mq == doctest::Approx(1.0 / width).epsilon(1e-12));
  }
  CHECK(dis.residual_mass == 0.0);
  double total = 0.0;
  for (double q : dis.quotient_weights) total += q;
  CHECK(std::abs(total - 1.0) <= 1e-12);

  auto bal = check_balance(c.space, c.dec, c.f);
  CHECK(bal.max_abs <= 1e-12);
  CHECK(bal.max_abs_conditional <= 1e-12);

  std::mt19937_64 rng(3);
  auto rep = check_consistency_random(c.dec, w, dis, 100, rng);
  CHECK(rep.pairs_tested == 100);
  CHECK(rep.max_abs_error <= 1e-12);

  for (double a : max_atoms(dis)) CHECK(a == doctest::Approx(1.0 / width));
}

TEST_CASE("consistency edge cases") {
  auto c = grid_case(6, 4);
  const auto w = c.space.weights();
  auto dis = disintegrate(c.dec, w);
  std::vector<int> all_points(c.space.size()), all_rays(c.dec.rays.size());
  std::iota(all_points.begin(), all_points.end(), 0);
  std::iota(all_rays.begin(), all_rays.end(), 0);
  auto whole = check_consistency(c.dec, w, dis, {all_points}, {all_rays});
  CHECK(whole.max_abs_error <= 1e-12);
  auto none = check_consistency(c.dec, w, dis, {{}}, {all_rays});
  CHECK(none.max_abs_error == 0.0);
}

TEST_CASE("measure off the transport set is residual") {
  auto c = grid_case(6, 3);
  // Every point is on a row ray here, so use a decomposition with one ray only.
  RayDecomposition dec = c.dec;
  dec.rays.resize(1);
  dec.ray_mass.resize(1);
  for (auto& r : dec.ray_of)
    if (r > 0) r = -1;
  std::vector<double> mu(c.space.size(), 0.0);
  mu[6] = 0.5;
  mu[17] = 0.5;
  auto dis = disintegrate(dec, mu);
  CHECK(dis.residual_mass == 1.0);
  CHECK(dis.zero_mass_rays == std::vector<int>{0});
  CHECK(dis.conditionals[0].empty());
  CHECK(reconstruct(dec, dis) == mu);
}

TEST_CASE("reconstruction is pointwise exact") {
  std::mt19937_64 rng(9);
  auto m = generate_interval_model(2.0, 3.0, 2.0, 150);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> mu0(150), mu1(150);
  for (int i = 0; i < 150; ++i) {
    mu0[i] = u(rng) < 0.4 ? u(rng) : 0.0;
    mu1[i] = u(rng) < 0.4 ? u(rng) : 0.0;
  }
  for (auto* mu : {&mu0, &mu1}) {
    const double t = std::accumulate(mu->begin(), mu->end(), 0.0);
    for (auto& x : *mu) x /= t;
  }
  auto sol = solve_w1(m.space, mu0, mu1);
  auto dec = partition_rays(m.space, build_transport_structure(m.space, gamma_set(m.space, sol, default_gamma_tol(m.space))));
  const auto w = m.space.weights();
  auto dis = disintegrate(dec, w);
  auto back = reconstruct(dec, dis);
  for (int i = 0; i < 150; ++i) CHECK(std::abs(back[i] - w[i]) <= 1e-12);
  for (const auto& cond : dis.conditionals) {
    if (cond.empty()) continue;
    CHECK(std::abs(std::accumulate(cond.begin(), cond.end(), 0.0) - 1.0) <= 1e-12);
  }
  double q = std::accumulate(dis.quotient_weights.begin(), dis.quotient_weights.end(), 0.0);
  CHECK(std::abs(q + dis.residual_mass - 1.0) <= 1e-12);
  auto rep = check_consistency_random(dec, w, dis, 100, rng);
  CHECK(rep.max_abs_error <= 1e-12);
}

TEST_CASE("balance errors and the zero function") {
  auto c = grid_case(4, 2);
  std::vector<double> zero(c.space.size(), 0.0);
  auto bal = check_balance(c.space, c.dec, zero);
  for (double v : bal.per_ray) CHECK(v == 0.0);
  std::vector<double> ones(c.space.size(), 1.0);
  CHECK(error_kind([&] { check_balance(c.space, c.dec, ones); }) == "NotMeanZero");
  CHECK(error_kind([&] { balance_marginals(c.space, ones); }) == "NotMeanZero");
  CHECK(error_kind([&] { disintegrate(c.dec, std::vector<double>{1.0}); }) == "BadMeasure");
}

TEST_CASE("balance on refined interval models") {
  // f = indicator of [0, r] minus v; a single ray forms at every resolution.
  double previous = 1.0;
  for (int n : {250, 500, 1000, 2000}) {
    auto m = generate_interval_model(1.0, 2.0, 3.0, n);
    const auto w = m.space.weights();
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      if (m.density.grid[i] <= 1.0) v += w[i];
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) f[i] = (m.density.grid[i] <= 1.0 ? 1.0 : 0.0) - v;
    auto [mu0, mu1] = balance_marginals(m.space, f);
    auto sol = solve_w1(m.space, mu0, mu1);
    auto dec = partition_rays(m.space, build_transport_structure(m.space, gamma_set(m.space, sol, default_gamma_tol(m.space))));
    CHECK(dec.rays.size() == 1);
    auto bal = check_balance(m.space, dec, f);
    CHECK(bal.max_abs <= previous + 1e-15);
    previous = bal.max_abs;
  }
}
