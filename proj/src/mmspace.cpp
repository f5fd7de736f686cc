#include "needle/mmspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <sstream>

#include "needle/errors.hpp"

namespace needle {
namespace {

constexpr double kMetricRelTol = 1e-12;
constexpr std::size_t kExhaustiveTripleLimit = 300;
constexpr std::size_t kSampledTriples = 1000000;

std::vector<std::string> index_ids(std::size_t n, const char* prefix) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = prefix + std::to_string(i);
  return ids;
}

std::vector<double> normalize_weights(std::vector<double> w, std::size_t n) {
  if (w.empty()) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  if (w.size() != n) {
    fail("mmspace", "BadWeights",
         "expected " + std::to_string(n) + " weights, got " + std::to_string(w.size()));
  }
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) fail("mmspace", "BadWeights", "weights must be finite and nonnegative");
    total += x;
  }
  if (!(total > 0.0)) fail("mmspace", "BadWeights", "weights have zero total mass");
  for (double& x : w) x /= total;
  return w;
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

void check_triple(std::span<const double> d, std::size_t n, std::size_t x, std::size_t y,
                  std::size_t z) {
  const double dxz = d[x * n + z];
  const double via = d[x * n + y] + d[y * n + z];
  if (dxz > via + kMetricRelTol * via) {
    std::ostringstream os;
    os.precision(17);
    os << "triangle inequality fails: d(" << x << "," << z << ")=" << dxz << " > d(" << x
       << "," << y << ")+d(" << y << "," << z << ")=" << via;
    fail("mmspace", "MetricViolation", os.str());
  }
}

}  // namespace

double great_circle(const Vec3& a, const Vec3& b) {
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

void validate_metric(std::size_t n, std::span<const double> d, std::uint64_t seed) {
  for (std::size_t x = 0; x < n; ++x) {
    if (d[x * n + x] != 0.0) fail("mmspace", "MetricViolation", "nonzero diagonal at " + std::to_string(x));
    for (std::size_t y = x + 1; y < n; ++y) {
      const double a = d[x * n + y];
      const double b = d[y * n + x];
      if (!std::isfinite(a) || a < 0.0) {
        fail("mmspace", "MetricViolation", "distance must be finite and nonnegative");
      }
      if (std::abs(a - b) > kMetricRelTol * std::max(a, b)) {
        fail("mmspace", "MetricViolation",
             "asymmetric distance between " + std::to_string(x) + " and " + std::to_string(y));
      }
    }
  }
  if (n <= kExhaustiveTripleLimit) {
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t z = 0; z < n; ++z) check_triple(d, n, x, y, z);
    return;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t k = 0; k < kSampledTriples; ++k) check_triple(d, n, pick(rng), pick(rng), pick(rng));
}

void MMSpace::finalize(std::vector<double> weights) {
  const std::size_t n = size();
  weights_ = normalize_weights(std::move(weights), n);
  max_distance_ = 0.0;
  mesh_ = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < n; ++y) {
      const double dxy = dist_[x * n + y];
      max_distance_ = std::max(max_distance_, dxy);
      if (y != x) nearest = std::min(nearest, dxy);
    }
    if (n > 1) mesh_ = std::max(mesh_, nearest);
  }
}

MMSpace build_space(std::vector<std::string> ids, const MetricSpec& metric,
                    std::vector<double> weights) {
  const std::size_t n = ids.size();
  if (n == 0) fail("mmspace", "EmptySpace", "a space needs at least one point");
  MMSpace s;
  s.ids_ = std::move(ids);
  s.dist_.assign(n * n, 0.0);

  if (const auto* m = std::get_if<MatrixMetric>(&metric)) {
    if (m->data.size() != n) fail("mmspace", "MetricViolation", "matrix row count differs from point count");
    for (std::size_t x = 0; x < n; ++x) {
      if (m->data[x].size() != n) fail("mmspace", "MetricViolation", "matrix is not square");
      std::copy(m->data[x].begin(), m->data[x].end(), s.dist_.begin() + x * n);
    }
    s.kind_ = MetricKind::kMatrix;
  } else {
    const auto& g = std::get<GraphMetric>(metric);
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (const auto& e : g.edges) {
      if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= n || static_cast<std::size_t>(e.v) >= n) {
        fail("mmspace", "MetricViolation", "edge endpoint out of range");
      }
      if (!(e.w > 0.0) || !std::isfinite(e.w)) fail("mmspace", "MetricViolation", "edge weights must be positive");
      adj[e.u].emplace_back(e.v, e.w);
      adj[e.v].emplace_back(e.u, e.w);
    }
    s.next_hop_.assign(n * n, -1);
    using Item = std::pair<double, int>;
    std::vector<double> dist(n);
    for (std::size_t src = 0; src < n; ++src) {
      std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      dist[src] = 0.0;
      s.next_hop_[src * n + src] = static_cast<std::int32_t>(src);
      heap.emplace(0.0, static_cast<int>(src));
      while (!heap.empty()) {
        auto [du, u] = heap.top();
        heap.pop();
        if (du > dist[u]) continue;
        for (auto [v, w] : adj[u]) {
          if (du + w < dist[v]) {
            dist[v] = du + w;
            // Walking from v toward src, the first hop is u.
            s.next_hop_[static_cast<std::size_t>(v) * n + src] = u;
            heap.emplace(dist[v], v);
          }
        }
      }
      for (std::size_t v = 0; v < n; ++v) {
        if (!std::isfinite(dist[v])) fail("mmspace", "DisconnectedGraph", "graph is not connected");
        s.dist_[src * n + v] = dist[v];
      }
    }
    // Dijkstra from each side can differ in the last ulp; symmetrize.
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = x + 1; y < n; ++y) {
        const double d = std::min(s.dist_[x * n + y], s.dist_[y * n + x]);
        s.dist_[x * n + y] = s.dist_[y * n + x] = d;
      }
    s.edges_ = g.edges;
    s.kind_ = MetricKind::kGraph;
  }
  validate_metric(n, s.dist_);
  s.finalize(std::move(weights));
  return s;
}

MMSpace line_space(std::vector<double> positions, std::vector<double> weights) {
  const std::size_t n = positions.size();
  if (n == 0) fail("mmspace", "EmptySpace", "a space needs at least one point");
  MMSpace s;
  s.kind_ = MetricKind::kLine;
  s.ids_ = index_ids(n, "t");
  s.dist_.assign(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) s.dist_[x * n + y] = std::abs(positions[x] - positions[y]);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return positions[a] < positions[b]; });
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const int u = order[k];
    const int v = order[k + 1];
    const double w = positions[v] - positions[u];
    if (!(w > 0.0)) fail("mmspace", "MetricViolation", "line positions must be distinct");
    s.edges_.push_back({u, v, w});
  }
  s.line_ = std::move(positions);
  s.finalize(std::move(weights));
  return s;
}

MMSpace sphere_space(std::vector<Vec3> points, std::vector<double> weights) {
  const std::size_t n = points.size();
  if (n == 0) fail("mmspace", "EmptySpace", "a space needs at least one point");
  for (auto& p : points) {
    const double r = norm(p);
    if (!(r > 0.0)) fail("mmspace", "MetricViolation", "sphere points must be nonzero");
    for (double& c : p) c /= r;
  }
  MMSpace s;
  s.kind_ = MetricKind::kSphere;
  s.ids_ = index_ids(n, "p");
  s.dist_.assign(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y)
      s.dist_[x * n + y] = s.dist_[y * n + x] = great_circle(points[x], points[y]);
  s.sphere_ = std::move(points);
  validate_metric(n, s.dist_);
  s.finalize(std::move(weights));
  return s;
}

std::vector<int> MMSpace::geodesic(int x, int y) const {
  if (x == y) return {x};
  const std::size_t n = size();
  switch (kind_) {
    case MetricKind::kMatrix:
      return {x, y};
    case MetricKind::kGraph: {
      std::vector<int> chain{x};
      int cur = x;
      while (cur != y) {
        cur = next_hop_[static_cast<std::size_t>(cur) * n + y];
        chain.push_back(cur);
      }
      return chain;
    }
    case MetricKind::kLine: {
      const double lo = std::min(line_[x], line_[y]);
      const double hi = std::max(line_[x], line_[y]);
      std::vector<int> chain;
      for (std::size_t p = 0; p < n; ++p)
        if (line_[p] >= lo && line_[p] <= hi) chain.push_back(static_cast<int>(p));
      const bool forward = line_[x] < line_[y];
      std::sort(chain.begin(), chain.end(), [&](int a, int b) {
        return forward ? line_[a] < line_[b] : line_[a] > line_[b];
      });
      return chain;
    }
    case MetricKind::kSphere: {
      const Vec3& a = sphere_[x];
      const Vec3& b = sphere_[y];
      Vec3 normal = cross(a, b);
      const double nn = norm(normal);
      if (nn < 1e-12) return {x, y};
      for (double& c : normal) c /= nn;
      const double theta = distance(x, y);
      const double band = 0.5 * mesh_;
      std::vector<std::pair<double, int>> inner;
      for (std::size_t p = 0; p < n; ++p) {
        if (static_cast<int>(p) == x || static_cast<int>(p) == y) continue;
        const Vec3& q = sphere_[p];
        const double off = std::asin(std::clamp(dot(q, normal), -1.0, 1.0));
        if (std::abs(off) > band) continue;
        // Angle of the projection of q onto the great circle, measured from a.
        const Vec3 tangent = cross(normal, a);
        const double along = std::atan2(dot(q, tangent), dot(q, a));
        if (along > 0.0 && along < theta) inner.emplace_back(along, static_cast<int>(p));
      }
      std::sort(inner.begin(), inner.end());
      std::vector<int> chain{x};
      for (const auto& [_, p] : inner) chain.push_back(p);
      chain.push_back(y);
      return chain;
    }
  }
  return {x, y};
}

MMSpace MMSpace::with_weights(std::vector<double> weights) const {
  MMSpace copy = *this;
  copy.weights_ = normalize_weights(std::move(weights), size());
  return copy;
}

double MMSpace::total_weight(std::span<const int> points) const {
  double total = 0.0;
  for (int p : points) total += weights_[p];
  return total;
}

Density1D::Density1D(std::vector<double> g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (grid.size() < 2 || grid.size() != values.size()) {
    fail("mmspace", "BadGrid", "density needs at least two grid points and matching values");
  }
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (!(grid[i] < grid[i + 1])) fail("mmspace", "BadGrid", "grid must be strictly increasing");
  }
  for (double h : values) {
    if (!(h >= 0.0) || !std::isfinite(h)) fail("mmspace", "BadGrid", "density values must be finite and nonnegative");
  }
  if (!(trapezoid_integral() > 0.0)) fail("mmspace", "BadGrid", "density has zero integral");
}

double Density1D::trapezoid_integral() const {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    total += 0.5 * (values[i] + values[i + 1]) * (grid[i + 1] - grid[i]);
  return total;
}

double Density1D::at(double t) const {
  if (t < grid.front() || t > grid.back()) return 0.0;
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  if (it == grid.end()) return values.back();
  const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  const std::size_t lo = hi - 1;
  const double lambda = (t - grid[lo]) / (grid[hi] - grid[lo]);
  return (1.0 - lambda) * values[lo] + lambda * values[hi];
}

std::vector<double> Density1D::point_masses() const {
  const std::size_t n = size();
  std::vector<double> m(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double half = 0.5 * (grid[i + 1] - grid[i]);
    m[i] += half * values[i];
    m[i + 1] += half * values[i + 1];
  }
  const double total = std::accumulate(m.begin(), m.end(), 0.0);
  for (double& x : m) x /= total;
  return m;
}

IntervalModel generate_interval_model(double K, double N, double D, int n) {
  if (!(N >= 1.0)) fail("mmspace", "BadDimension", "N must be >= 1");
  if (n < 16) fail("mmspace", "BadGrid", "need at least 16 grid points");
  if (!(D > 0.0) || !std::isfinite(D)) fail("mmspace", "BadDiameter", "D must be positive and finite");
  if (K > 0.0) {
    const double bound = std::numbers::pi * std::sqrt((N - 1.0) / K);
    if (D > bound * (1.0 + 1e-12)) {
      fail("mmspace", "BadDiameter",
           "D exceeds the Bonnet-Myers bound pi*sqrt((N-1)/K) = " + std::to_string(bound));
    }
  }
  std::vector<double> grid(n);
  std::vector<double> h(n);
  const double step = D / (n - 1);
  for (int i = 0; i < n; ++i) grid[i] = (i == n - 1) ? D : i * step;
  for (int i = 0; i < n; ++i) {
    const double t = grid[i];
    if (N == 1.0 || K == 0.0) {
      h[i] = 1.0;
    } else if (K > 0.0) {
      const double arg = t * std::sqrt(K / (N - 1.0));
      h[i] = std::pow(std::max(std::sin(arg), 0.0), N - 1.0);
    } else {
      const double arg = t * std::sqrt(-K / (N - 1.0));
      h[i] = std::pow(std::sinh(arg), N - 1.0);
    }
  }
  Density1D density(grid, h);
  MMSpace space = line_space(grid, density.point_masses());
  return {std::move(space), std::move(density)};
}

MMSpace generate_sphere_sample(int dim, int n, std::uint64_t seed) {
  if (dim != 2) fail("mmspace", "UnsupportedDimension", "only the round S^2 is supported");
  if (n < 2) fail("mmspace", "BadGrid", "need at least two sphere points");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double spacing = std::sqrt(4.0 * std::numbers::pi / n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.05 * spacing, 0.05 * spacing);
  std::vector<Vec3> pts(n);
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double az = golden * i;
    Vec3 p{r * std::cos(az), r * std::sin(az), z};
    // Tangent frame: east and north directions at p.
    Vec3 east{-std::sin(az), std::cos(az), 0.0};
    Vec3 north = cross(p, east);
    const double a = jitter(rng);
    const double b = jitter(rng);
    for (int c = 0; c < 3; ++c) p[c] += a * east[c] + b * north[c];
    pts[i] = p;
  }
  return sphere_space(std::move(pts));
}

MMSpace generate_grid_space(int width, int height, double spacing) {
  if (width < 1 || height < 1 || !(spacing > 0.0)) fail("mmspace", "BadGrid", "grid needs positive size and spacing");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<std::string> ids;
  ids.reserve(n);
  for (int j = 0; j < height; ++j)
    for (int i = 0; i < width; ++i) ids.push_back(std::to_string(i) + "," + std::to_string(j));
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const double dx = double(a % width) - double(b % width);
      const double dy = double(a / width) - double(b / width);
      d[a][b] = spacing * std::hypot(dx, dy);
    }
  return build_space(std::move(ids), MatrixMetric{std::move(d)});
}

}  // namespace needle
