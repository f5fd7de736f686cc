#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "needle/mmspace.hpp"

using namespace needle;
using needle::testing::error_kind;

TEST_CASE("two point space") {
  auto s = build_space({"a", "b"}, MatrixMetric{{{0, 1}, {1, 0}}}, {0.5, 0.5});
  CHECK(s.size() == 2);
  CHECK(s.distance(0, 1) == 1.0);
  CHECK(s.weight(0) == doctest::Approx(0.5));
  CHECK(s.mesh() == 1.0);
}

TEST_CASE("graph metric is expanded by shortest paths") {
  auto s = build_space({"0", "1", "2"}, GraphMetric{{{0, 1, 1.0}, {1, 2, 1.0}}});
  CHECK(s.distance(0, 2) == 2.0);
  CHECK(s.geodesic(0, 2) == std::vector<int>{0, 1, 2});
  CHECK(s.geodesic(2, 0) == std::vector<int>{2, 1, 0});
  CHECK(s.weight(1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("construction errors") {
  CHECK(error_kind([] {
          build_space({"x", "y", "z"}, MatrixMetric{{{0, 1, 3}, {1, 0, 1}, {3, 1, 0}}});
        }) == "MetricViolation");
  CHECK(error_kind([] { build_space({"a", "b", "c"}, GraphMetric{{{0, 1, 1.0}}}); }) ==
        "DisconnectedGraph");
  CHECK(error_kind([] { build_space({}, MatrixMetric{}); }) == "EmptySpace");
  CHECK(error_kind([] {
          build_space({"a", "b"}, MatrixMetric{{{0, 1}, {2, 0}}});
        }) == "MetricViolation");
  CHECK(error_kind([] {
          build_space({"a", "b"}, MatrixMetric{{{0, 1}, {1, 0}}}, {-1.0, 2.0});
        }) == "BadWeights");
}

TEST_CASE("weights are normalized") {
  auto s = build_space({"a", "b"}, MatrixMetric{{{0, 2}, {2, 0}}}, {3.0, 1.0});
  CHECK(s.weight(0) == doctest::Approx(0.75));
  CHECK(std::abs(s.weight(0) + s.weight(1) - 1.0) < 1e-12);
}

TEST_CASE("flat interval model") {
  auto m = generate_interval_model(0.0, 3.0, 1.0, 100);
  for (double h : m.density.values) CHECK(h == 1.0);
  // Trapezoid masses: equal in the interior, half at the two ends.
  const auto w = m.space.weights();
  for (std::size_t i = 2; i + 1 < w.size(); ++i) CHECK(w[i] == doctest::Approx(w[1]).epsilon(1e-12));
  CHECK(w[0] == doctest::Approx(0.5 * w[1]).epsilon(1e-12));
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spherical interval model integrates like sin") {
  const int n = 1000;
  auto m = generate_interval_model(1.0, 2.0, std::numbers::pi, n);
  // Antiderivative 1 - cos t gives 2 on [0, pi]; trapezoid error is D h^2 / 12 * max|h''|.
  const double step = std::numbers::pi / (n - 1);
  CHECK(std::abs(m.density.trapezoid_integral() - 2.0) < std::numbers::pi * step * step / 12.0 * 1.0001);
  const auto w = m.space.weights();
  CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) < 1e-12);
  // Cumulative mass of [0, pi/3] against (1 - cos)/2.
  double cum = 0.0;
  for (int i = 0; i < n; ++i)
    if (m.density.grid[i] <= std::numbers::pi / 3) cum += w[i];
  CHECK(std::abs(cum - 0.25) < 2.0 * step);
  CHECK(m.space.kind() == MetricKind::kLine);
}

TEST_CASE("interval model parameter errors") {
  // pi * sqrt((N-1)/K) = pi/2 < pi.
  CHECK(error_kind([] { generate_interval_model(8.0, 3.0, std::numbers::pi, 64); }) == "BadDiameter");
  CHECK(error_kind([] { generate_interval_model(2.0, 3.0, std::numbers::pi, 64); }).empty());
  CHECK(error_kind([] { generate_interval_model(0.0, 0.5, 1.0, 64); }) == "BadDimension");
  CHECK(error_kind([] { generate_interval_model(0.0, 2.0, 1.0, 8); }) == "BadGrid");
  CHECK(error_kind([] { generate_interval_model(1.0, 1.0, 1.0, 64); }) == "BadDiameter");
}

TEST_CASE("sphere samples") {
  SUBCASE("antipodal pair") {
    auto s = sphere_space({{0, 0, 1}, {0, 0, -1}, {1, 0, 0}});
    CHECK(s.distance(0, 1) == doctest::Approx(std::numbers::pi).epsilon(1e-15));
    CHECK(s.distance(0, 2) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
  }
  SUBCASE("uniform weights") {
    auto s = generate_sphere_sample(2, 1000, 1);
    for (double w : s.weights()) CHECK(w == doctest::Approx(1e-3).epsilon(1e-12));
  }
  SUBCASE("mean pairwise distance") {
    auto s = generate_sphere_sample(2, 2000, 3);
    double total = 0.0;
    for (std::size_t x = 0; x < s.size(); ++x)
      for (std::size_t y = 0; y < s.size(); ++y) total += s.distance(x, y);
    const double mean = total / (2000.0 * 2000.0);
    // Monte-Carlo oracle over uniformly distributed pairs.
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    double mc = 0.0;
    const int trials = 400000;
    for (int k = 0; k < trials; ++k) {
      Vec3 a{g(rng), g(rng), g(rng)};
      Vec3 b{g(rng), g(rng), g(rng)};
      const double na = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
      const double nb = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
      for (int c = 0; c < 3; ++c) {
        a[c] /= na;
        b[c] /= nb;
      }
      mc += great_circle(a, b);
    }
    mc /= trials;
    CHECK(std::abs(mean - mc) < 0.02);
    CHECK(std::abs(mean - std::numbers::pi / 2) < 0.02);
  }
  CHECK(error_kind([] { generate_sphere_sample(3, 100, 1); }) == "UnsupportedDimension");
}

TEST_CASE("sampled triples satisfy the triangle inequality") {
  std::mt19937_64 rng(5);
  for (const auto& s : {generate_sphere_sample(2, 400, 9), generate_interval_model(1.0, 3.0, 2.0, 300).space}) {
    std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
    for (int k = 0; k < 20000; ++k) {
      const auto x = pick(rng), y = pick(rng), z = pick(rng);
      const double via = s.distance(x, y) + s.distance(y, z);
      CHECK_LE(s.distance(x, z), via + 1e-12 * via);
    }
  }
}

TEST_CASE("geodesic chains are metrically straight") {
  std::mt19937_64 rng(2);
  // Random connected graph: a spanning path plus random chords.
  const int n = 40;
  std::vector<WeightedEdge> edges;
  std::uniform_real_distribution<double> w(0.1, 2.0);
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, w(rng)});
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int k = 0; k < 60; ++k) {
    const int a = pick(rng), b = pick(rng);
    if (a != b) edges.push_back({a, b, w(rng)});
  }
  std::vector<std::string> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = std::to_string(i);
  auto g = build_space(ids, GraphMetric{edges});
  auto line = generate_interval_model(0.0, 2.0, 1.0, 50).space;
  for (const auto* s : {&g, &line}) {
    std::uniform_int_distribution<int> p(0, static_cast<int>(s->size()) - 1);
    for (int k = 0; k < 300; ++k) {
      const int x = p(rng), y = p(rng);
      const auto chain = s->geodesic(x, y);
      REQUIRE(chain.front() == x);
      REQUIRE(chain.back() == y);
      double len = 0.0;
      for (std::size_t i = 0; i + 1 < chain.size(); ++i) len += s->distance(chain[i], chain[i + 1]);
      CHECK(std::abs(len - s->distance(x, y)) < 1e-9);
    }
  }
  CHECK(g.geodesic(3, 3) == std::vector<int>{3});
}

TEST_CASE("sphere chains stay near the great circle") {
  auto s = generate_sphere_sample(2, 500, 4);
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> p(0, 499);
  for (int k = 0; k < 50; ++k) {
    const int x = p(rng), y = p(rng);
    const auto chain = s.geodesic(x, y);
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) len += s.distance(chain[i], chain[i + 1]);
    // Each interior point sits within mesh/2 of the arc.
    CHECK(len - s.distance(x, y) <= static_cast<double>(chain.size()) * s.mesh());
  }
}

TEST_CASE("density basics") {
  Density1D d({0.0, 1.0, 2.0}, {1.0, 3.0, 1.0});
  CHECK(d.trapezoid_integral() == 4.0);
  CHECK(d.at(0.5) == 2.0);
  CHECK(d.at(-1.0) == 0.0);
  CHECK(d.at(2.0) == 1.0);
  CHECK(error_kind([] { Density1D({0.0, 0.0}, {1.0, 1.0}); }) == "BadGrid");
  CHECK(error_kind([] { Density1D({0.0, 1.0}, {0.0, 0.0}); }) == "BadGrid");
}
