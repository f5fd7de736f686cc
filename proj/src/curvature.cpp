#include "needle/curvature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "needle/errors.hpp"
#include "needle/parallel.hpp"

namespace needle {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sinh(t a) / sinh(a) without overflow for large a.
double sinh_ratio(double t, double a) {
  if (a < 20.0) return std::sinh(t * a) / std::sinh(a);
  return std::exp((t - 1.0) * a) * (-std::expm1(-2.0 * t * a)) / (-std::expm1(-2.0 * a));
}

// Linear interpolation on a sorted grid; zero outside.
double interpolate(std::span<const double> grid, std::span<const double> values, double t) {
  if (t < grid.front() || t > grid.back()) return 0.0;
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  if (it == grid.end()) return values.back();
  const std::size_t j = static_cast<std::size_t>(it - grid.begin());
  const std::size_t i = j - 1;
  const double w = (t - grid[i]) / (grid[j] - grid[i]);
  return (1.0 - w) * values[i] + w * values[j];
}

void check_degenerate(const Density1D& h) {
  for (std::size_t i = 1; i + 1 < h.size(); ++i) {
    if (h.values[i] == 0.0 && h.values[i - 1] > 0.0 && h.values[i + 1] > 0.0) {
      fail("curvature", "DegenerateDensity",
           "density vanishes at interior point t = " + std::to_string(h.grid[i]) + " between positive values");
    }
  }
}

// Relative deviation from a constant, as a nonpositive margin.
double constancy_margin(const Density1D& h, double& t_min, double& t_max) {
  auto [lo, hi] = std::minmax_element(h.values.begin(), h.values.end());
  t_min = h.grid[lo - h.values.begin()];
  t_max = h.grid[hi - h.values.begin()];
  return *hi > 0.0 ? *lo / *hi - 1.0 : 0.0;
}

// Comparison function of the MCP bounds, up to a constant factor.
double comparison(double K, double k, double x) {
  if (K > 0.0) return std::sin(k * x);
  if (K < 0.0) return std::sinh(k * x);
  return x;
}

template <typename Item>
struct ShardWorst {
  double margin = kInf;
  Item worst{};
  std::string reason;
};

}  // namespace

double sigma(double K, double N, double t, double theta) {
  const double k_theta2 = K * theta * theta;
  if (k_theta2 == 0.0) return t;
  if (k_theta2 >= N * std::numbers::pi * std::numbers::pi) return kInf;
  if (k_theta2 > 0.0) {
    const double a = theta * std::sqrt(K / N);
    return std::sin(t * a) / std::sin(a);
  }
  if (N == 0.0) return t;
  return sinh_ratio(t, theta * std::sqrt(-K / N));
}

double tau(double K, double N, double t, double theta) {
  if (N == 1.0) return K * theta * theta <= 0.0 ? t : kInf;
  const double s = sigma(K, N - 1.0, t, theta);
  if (std::isinf(s)) return kInf;
  return std::pow(t, 1.0 / N) * std::pow(s, (N - 1.0) / N);
}

double sigma_ode_residual(double K, double N, double theta, double ds) {
  const int steps = static_cast<int>(std::lround(1.0 / ds));
  const double h = 1.0 / steps;
  const double c = theta * theta * K / N;
  double worst = 0.0;
  for (int i = 1; i < steps; ++i) {
    const double s = i * h;
    const double f = sigma(K, N, s, theta);
    const double second = (sigma(K, N, s + h, theta) - 2.0 * f + sigma(K, N, s - h, theta)) / (h * h);
    worst = std::max(worst, std::abs(second + c * f));
  }
  return worst;
}

CDReport cd_density_check(const Density1D& h, double K, double N, std::span<const CDTriple> triples,
                          double rel_tol) {
  if (!(N >= 1.0)) fail("curvature", "BadDimension", "N must be >= 1");
  CDReport report;
  report.tested = triples.size();
  if (N == 1.0) {
    double t_min = 0.0, t_max = 0.0;
    report.margin = constancy_margin(h, t_min, t_max);
    report.worst = {t_min, t_max, 0.0};
    report.pass = report.margin >= -rel_tol;
    if (!report.pass) report.reason = "N = 1 requires a constant density";
    return report;
  }
  check_degenerate(h);

  const double exponent = 1.0 / (N - 1.0);
  std::vector<double> root(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) root[i] = std::pow(h.values[i], exponent);

  const int shards = std::max(1, thread_count());
  std::vector<ShardWorst<CDTriple>> partial(shards);
  parallel_shards(triples.size(), [&](int shard, std::size_t begin, std::size_t end) {
    auto& acc = partial[shard];
    for (std::size_t k = begin; k < end; ++k) {
      CDTriple tr = triples[k];
      if (tr.t0 > tr.t1) {
        std::swap(tr.t0, tr.t1);
        tr.s = 1.0 - tr.s;
      }
      const double theta = tr.t1 - tr.t0;
      const double a = sigma(K, N - 1.0, 1.0 - tr.s, theta);
      const double b = sigma(K, N - 1.0, tr.s, theta);
      if (std::isinf(a) || std::isinf(b)) {
        if (acc.margin > -kInf) {
          acc.margin = -kInf;
          acc.worst = triples[k];
          acc.reason = "K theta^2 >= (N-1) pi^2: interval longer than the curvature bound allows";
        }
        continue;
      }
      const double lhs = interpolate(h.grid, root, (1.0 - tr.s) * tr.t0 + tr.s * tr.t1);
      const double rhs = a * interpolate(h.grid, root, tr.t0) + b * interpolate(h.grid, root, tr.t1);
      const double rel = rhs > 0.0 ? (lhs - rhs) / rhs : 0.0;
      if (rel < acc.margin) {
        acc.margin = rel;
        acc.worst = triples[k];
      }
    }
  });
  report.margin = kInf;
  for (const auto& acc : partial) {
    if (acc.margin < report.margin) {
      report.margin = acc.margin;
      report.worst = acc.worst;
      report.reason = acc.reason;
    }
  }
  if (triples.empty()) report.margin = 0.0;
  report.pass = report.reason.empty() && report.margin >= -rel_tol;
  return report;
}

MCPReport mcp_density_check(const Density1D& h, double K, double N, std::span<const MCPQuad> quads,
                            double rel_tol) {
  if (!(N >= 1.0)) fail("curvature", "BadDimension", "N must be >= 1");
  MCPReport report;
  report.tested = quads.size();
  if (N == 1.0) {
    double t_min = 0.0, t_max = 0.0;
    report.margin = constancy_margin(h, t_min, t_max);
    report.worst = {t_min, t_max, h.a(), h.b()};
    report.pass = report.margin >= -rel_tol;
    if (!report.pass) report.reason = "N = 1 requires a constant density";
    return report;
  }
  check_degenerate(h);
  const double k = std::sqrt(std::abs(K) / (N - 1.0));

  const int shards = std::max(1, thread_count());
  std::vector<ShardWorst<MCPQuad>> partial(shards);
  parallel_shards(quads.size(), [&](int shard, std::size_t begin, std::size_t end) {
    auto& acc = partial[shard];
    auto record = [&](double rel, const MCPQuad& q, const char* why) {
      if (rel < acc.margin) {
        acc.margin = rel;
        acc.worst = q;
        acc.reason = why;
      }
    };
    for (std::size_t i = begin; i < end; ++i) {
      const MCPQuad& q = quads[i];
      if (K > 0.0 && k * std::max(q.sigma_plus - q.s, q.tau - q.sigma_minus) >= std::numbers::pi) {
        record(-kInf, q, "sine argument reaches pi: interval longer than the curvature bound allows");
        continue;
      }
      const double hs = h.at(q.s);
      const double ht = h.at(q.tau);
      if (hs == 0.0) {
        if (ht > 0.0) record(-kInf, q, "density vanishes at s but not at tau");
        continue;
      }
      const double ratio = ht / hs;
      const double lower = std::pow(comparison(K, k, q.sigma_plus - q.tau) / comparison(K, k, q.sigma_plus - q.s), N - 1.0);
      const double upper = std::pow(comparison(K, k, q.tau - q.sigma_minus) / comparison(K, k, q.s - q.sigma_minus), N - 1.0);
      record((ratio - lower) / lower, q, "");
      record((upper - ratio) / upper, q, "");
    }
  });
  report.margin = kInf;
  for (const auto& acc : partial) {
    if (acc.margin < report.margin) {
      report.margin = acc.margin;
      report.worst = acc.worst;
      report.reason = acc.reason;
    }
  }
  if (quads.empty()) report.margin = 0.0;
  report.pass = report.reason.empty() && report.margin >= -rel_tol;
  return report;
}

std::vector<CDTriple> grid_triples(const Density1D& h, std::size_t count, std::mt19937_64& rng, double lo,
                                   double hi) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h.grid[i] >= lo && h.grid[i] <= hi) idx.push_back(static_cast<int>(i));
  if (idx.size() < 3) fail("curvature", "BadGrid", "need three grid points in the sampling range");
  auto make = [&](int i, int k, int j) {
    return CDTriple{h.grid[i], h.grid[j], (h.grid[k] - h.grid[i]) / (h.grid[j] - h.grid[i])};
  };
  std::vector<CDTriple> out;
  out.reserve(count);
  if (count == 0) return out;
  out.push_back(make(idx.front(), idx[idx.size() / 2], idx.back()));
  std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
  while (out.size() < count) {
    std::array<std::size_t, 3> c{pick(rng), pick(rng), pick(rng)};
    std::sort(c.begin(), c.end());
    if (c[0] == c[1] || c[1] == c[2]) continue;
    out.push_back(make(idx[c[0]], idx[c[1]], idx[c[2]]));
  }
  return out;
}

std::vector<MCPQuad> grid_quads(const Density1D& h, std::size_t count, std::mt19937_64& rng) {
  if (h.size() < 4) fail("curvature", "BadGrid", "need four grid points");
  std::uniform_int_distribution<std::size_t> pick(0, h.size() - 1);
  std::vector<MCPQuad> out;
  out.reserve(count);
  while (out.size() < count) {
    const bool equal = out.size() % 10 == 9;
    std::array<std::size_t, 4> c{pick(rng), pick(rng), pick(rng), pick(rng)};
    if (equal) c[2] = c[1];
    std::sort(c.begin(), c.end());
    if (c[0] == c[1] || c[2] == c[3] || (!equal && c[1] == c[2])) continue;
    out.push_back({h.grid[c[1]], h.grid[c[2]], h.grid[c[0]], h.grid[c[3]]});
  }
  return out;
}

Density1D mollify_density(const Density1D& h, double N, double eps) {
  if (!(N > 1.0)) fail("curvature", "BadDimension", "mollification needs N > 1");
  if (!(eps > 0.0) || !std::isfinite(eps)) fail("curvature", "BadEpsilon", "eps must be positive");
  const double a = h.a();
  const double b = h.b();
  const double step = (b - a) / static_cast<double>(h.size() - 1);

  std::vector<double> grid;
  std::vector<double> left;
  for (int k = 1; a - k * step > a - eps + 1e-9 * step; ++k) left.push_back(a - k * step);
  grid.push_back(a - eps);
  grid.insert(grid.end(), left.rbegin(), left.rend());
  grid.insert(grid.end(), h.grid.begin(), h.grid.end());
  for (int k = 1; b + k * step < b + eps - 1e-9 * step; ++k) grid.push_back(b + k * step);
  grid.push_back(b + eps);

  // Composite Simpson nodes over the bump's support [0, eps], spacing ~ step / 10.
  int panels = std::max(2, static_cast<int>(std::ceil(10.0 * eps / step)));
  if (panels % 2) ++panels;
  std::vector<double> offsets(panels + 1), weights(panels + 1);
  double total = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double x = static_cast<double>(i) / panels;
    const double z = 2.0 * x - 1.0;
    const double bump = std::abs(z) < 1.0 ? std::exp(-1.0 / (1.0 - z * z)) : 0.0;
    const double simpson = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    offsets[i] = eps * x;
    weights[i] = simpson * bump;
    total += weights[i];
  }
  for (auto& w : weights) w /= total;

  const double exponent = 1.0 / (N - 1.0);
  std::vector<double> root(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) root[i] = std::pow(h.values[i], exponent);
  std::vector<double> values(grid.size());
  parallel_shards(grid.size(), [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      double acc = 0.0;
      for (int i = 0; i <= panels; ++i)
        if (weights[i] > 0.0) acc += weights[i] * interpolate(h.grid, root, grid[g] - offsets[i]);
      values[g] = std::pow(acc, N - 1.0);
    }
  });
  return Density1D(std::move(grid), std::move(values));
}

double l1_distance(const Density1D& a, const Density1D& b) {
  std::vector<double> grid(a.grid);
  grid.insert(grid.end(), b.grid.begin(), b.grid.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double total = 0.0;
  double prev = std::abs(a.at(grid[0]) - b.at(grid[0]));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = std::abs(a.at(grid[i]) - b.at(grid[i]));
    total += 0.5 * (prev + cur) * (grid[i] - grid[i - 1]);
    prev = cur;
  }
  return total;
}

}  // namespace needle
