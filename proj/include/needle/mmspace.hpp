#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace needle {

enum class MetricKind { kMatrix, kGraph, kLine, kSphere };

struct WeightedEdge {
  int u = 0;
  int v = 0;
  double w = 0.0;
};

struct MatrixMetric {
  std::vector<std::vector<double>> data;
};

struct GraphMetric {
  std::vector<WeightedEdge> edges;
};

using MetricSpec = std::variant<MatrixMetric, GraphMetric>;

using Vec3 = std::array<double, 3>;

/// Finite metric measure space (X, d, m) with m(X) = 1.
///
/// Distances are stored densely. Graph and line spaces additionally keep
/// their edge lists, which the transport solver uses as the arc set, and a
/// shortest-path structure for the geodesic oracle. Instances are immutable
/// after construction.
class MMSpace {
 public:
  MMSpace() = default;

  std::size_t size() const { return ids_.size(); }
  MetricKind kind() const { return kind_; }
  const std::vector<std::string>& ids() const { return ids_; }

  double distance(std::size_t x, std::size_t y) const { return dist_[x * size() + y]; }
  std::span<const double> row(std::size_t x) const {
    return {dist_.data() + x * size(), size()};
  }
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t x) const { return weights_[x]; }

  double max_distance() const { return max_distance_; }
  /// Largest nearest-neighbour distance; the resolution scale of the sample.
  double mesh() const { return mesh_; }

  /// Undirected edges for graph and line spaces; empty for dense metrics.
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  /// Coordinates on the real line (line spaces only).
  std::span<const double> line_positions() const { return line_; }
  /// Unit vectors (sphere spaces only).
  std::span<const Vec3> sphere_points() const { return sphere_; }

  /// Ordered chain of sample points from x to y lying on (or, for sphere
  /// samples, within mesh/2 of) a shortest path. Always starts at x and ends
  /// at y; {x} when x == y.
  std::vector<int> geodesic(int x, int y) const;

  /// Same space with a different (renormalized) reference measure.
  MMSpace with_weights(std::vector<double> weights) const;

  double total_weight(std::span<const int> points) const;

 private:
  friend MMSpace build_space(std::vector<std::string>, const MetricSpec&,
                             std::vector<double>);
  friend MMSpace line_space(std::vector<double>, std::vector<double>);
  friend MMSpace sphere_space(std::vector<Vec3>, std::vector<double>);

  void finalize(std::vector<double> weights);

  MetricKind kind_ = MetricKind::kMatrix;
  std::vector<std::string> ids_;
  std::vector<double> dist_;
  std::vector<double> weights_;
  std::vector<WeightedEdge> edges_;
  std::vector<std::int32_t> next_hop_;  // graph spaces: first hop from x toward y
  std::vector<double> line_;
  std::vector<Vec3> sphere_;
  double max_distance_ = 0.0;
  double mesh_ = 0.0;
};

/// Validates and builds a space. Graph metrics are expanded by all-pairs
/// Dijkstra. Weights are normalized to unit sum; empty weights mean uniform.
/// Throws mmspace.MetricViolation, mmspace.DisconnectedGraph,
/// mmspace.EmptySpace, mmspace.BadWeights.
MMSpace build_space(std::vector<std::string> ids, const MetricSpec& metric,
                    std::vector<double> weights = {});

/// Points on the real line with d = |s - t|; consecutive points are joined by
/// edges so the line is also a path graph.
MMSpace line_space(std::vector<double> positions, std::vector<double> weights = {});

/// Points on the unit sphere S^2 with great-circle distance.
MMSpace sphere_space(std::vector<Vec3> points, std::vector<double> weights = {});

double great_circle(const Vec3& a, const Vec3& b);

/// Checks symmetry, zero diagonal and the triangle inequality. Every triple is
/// checked for n <= 300, otherwise one million random triples.
/// Throws mmspace.MetricViolation.
void validate_metric(std::size_t n, std::span<const double> dist, std::uint64_t seed = 7);

/// Sampled density h on a grid t_0 < ... < t_n.
struct Density1D {
  std::vector<double> grid;
  std::vector<double> values;

  Density1D() = default;
  Density1D(std::vector<double> grid, std::vector<double> values);

  std::size_t size() const { return grid.size(); }
  double a() const { return grid.front(); }
  double b() const { return grid.back(); }
  double trapezoid_integral() const;
  /// Linear interpolation of h; zero outside [a, b].
  double at(double t) const;
  /// Normalized trapezoid masses attached to the grid points.
  std::vector<double> point_masses() const;
};

struct IntervalModel {
  MMSpace space;
  Density1D density;
};

/// Model density of (h^{1/(N-1)})'' + K/(N-1) h^{1/(N-1)} = 0 on a uniform
/// grid of [0, D]: sin^{N-1}(t sqrt(K/(N-1))) for K > 0, constant for K = 0 or
/// N = 1, sinh^{N-1}(t sqrt(-K/(N-1))) for K < 0.
/// Throws mmspace.BadDiameter, mmspace.BadDimension, mmspace.BadGrid.
IntervalModel generate_interval_model(double K, double N, double D, int n);

/// Fibonacci lattice on S^2 with a small seeded jitter and uniform weights.
/// Throws mmspace.UnsupportedDimension unless dim == 2.
MMSpace generate_sphere_sample(int dim, int n, std::uint64_t seed);

/// width x height lattice in the plane with Euclidean distance, stored densely.
/// Point (i, j) has index j * width + i and id "i,j".
MMSpace generate_grid_space(int width, int height, double spacing = 1.0);

}  // namespace needle
