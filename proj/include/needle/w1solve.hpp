#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "needle/mmspace.hpp"

namespace needle {

/// Number of integer mass units per unit of probability.
inline constexpr std::int64_t kMassUnits = 1'000'000'000'000;  // 1e12

struct PlanEntry {
  int source = 0;
  int target = 0;
  std::int64_t units = 0;  // mass in units of 1 / kMassUnits
  double mass() const { return static_cast<double>(units) / static_cast<double>(kMassUnits); }
};

/// Largest-remainder rounding of a probability vector to integer units that
/// sum to exactly kMassUnits. Throws w1solve.BadMarginal.
std::vector<std::int64_t> quantize_mass(std::span<const double> probabilities);

struct W1Solution {
  std::vector<PlanEntry> plan;      // includes diagonal (x, x) entries
  double primal_value = 0.0;        // sum of mass * d over the plan
  std::vector<double> potential;    // Kantorovich potential, min shifted to 0
  double dual_value = 0.0;          // sum of potential * (mu0 - mu1)
  double lipschitz_residual = 0.0;  // max over pairs of (|phi(x)-phi(y)| - d(x,y))^+
  double duality_gap = 0.0;         // primal_value - dual_value
  double cost_scale = 0.0;          // integer cost units per unit distance
  std::int64_t pivots = 0;
  std::vector<std::int64_t> mu0_units;
  std::vector<std::int64_t> mu1_units;
};

/// Exact W1 between mu0 and mu1 via network simplex on the transshipment
/// problem (complete graph for dense metrics, edge set for graph and line
/// metrics). Transshipment paths are collapsed to direct pairs, so the plan
/// has marginals mu0 and mu1. Throws w1solve.UnbalancedMarginals,
/// w1solve.BadMarginal, w1solve.SolverFailure.
W1Solution solve_w1(const MMSpace& space, std::span<const double> mu0,
                    std::span<const double> mu1);

/// Lipschitz residual max (|phi(x)-phi(y)| - d(x,y))^+ over all pairs.
double lipschitz_residual(const MMSpace& space, std::span<const double> phi);

/// The pairs moved by phi with maximal slope, phi(x) - phi(y) >= d(x,y) - tol,
/// stored as a dense boolean matrix. The diagonal is always a member.
class GammaSet {
 public:
  GammaSet() = default;
  GammaSet(const MMSpace& space, std::vector<double> potential, double tol);

  std::size_t size() const { return n_; }
  double tol() const { return tol_; }
  const std::vector<double>& potential() const { return phi_; }
  bool contains(int x, int y) const { return member_[static_cast<std::size_t>(x) * n_ + y] != 0; }
  /// Membership in R = Gamma union Gamma^{-1}.
  bool related(int x, int y) const { return contains(x, y) || contains(y, x); }
  /// Pairs (x, y) with x != y.
  std::vector<std::pair<int, int>> strict_pairs() const;
  std::size_t strict_count() const { return strict_count_; }

 private:
  std::size_t n_ = 0;
  double tol_ = 0.0;
  std::vector<double> phi_;
  std::vector<unsigned char> member_;
  std::size_t strict_count_ = 0;
};

/// Default membership slack: 1e-6 of the largest distance.
double default_gamma_tol(const MMSpace& space);

/// Gamma of the solution's potential. Throws w1solve.TolTooSmall when some
/// positive-mass off-diagonal plan pair falls outside.
GammaSet gamma_set(const MMSpace& space, const W1Solution& solution, double tol);
/// Gamma of an explicitly given 1-Lipschitz potential.
GammaSet gamma_set(const MMSpace& space, std::vector<double> potential, double tol);

struct CyclicReport {
  std::size_t cycles_tested = 0;
  double worst_violation = 0.0;  // max of sum d(x_i,y_i) - sum d(x_i,y_{i+1})
  std::vector<std::pair<int, int>> worst_cycle;
};

/// Random k-cycles through the off-diagonal pairs of gamma (all pairs when
/// gamma has no off-diagonal pair); report only.
CyclicReport check_cyclic_monotonicity(const MMSpace& space, const GammaSet& gamma, int k,
                                       std::size_t trials, std::mt19937_64& rng);
/// Same check over an explicit pair list.
CyclicReport check_cyclic_monotonicity(const MMSpace& space,
                                       std::span<const std::pair<int, int>> pairs, int k,
                                       std::size_t trials, std::mt19937_64& rng);

struct GeodesicStabilityReport {
  std::size_t pairs_tested = 0;
  std::size_t subpairs_tested = 0;
  std::size_t failures = 0;
  double failure_fraction = 0.0;
};

/// For sampled (x, y) in gamma, checks (u, v) in Gamma(tol) for every u
/// before v on the geodesic chain from x to y.
GeodesicStabilityReport check_geodesic_stability(const MMSpace& space, const GammaSet& gamma,
                                                 double tol, std::size_t max_pairs,
                                                 std::mt19937_64& rng);

}  // namespace needle
