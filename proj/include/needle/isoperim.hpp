#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "needle/mmspace.hpp"

namespace needle {

/// Parameters of the one-dimensional model profile I_{K,N,D}. D may be +inf.
struct ModelProfileSpec {
  double K = 0.0;
  double N = 2.0;
  double D = std::numeric_limits<double>::infinity();
};

enum class HalfLine { kLower, kUpper };  // {t <= r} or {t >= r}

/// Minimizer found by model_profile_detail.
///
/// The candidate densities are h = max(J, 0)^{N-1} on [0, D] where J solves
/// J'' + K/(N-1) J = 0, parameterized by a phase alpha:
///   J = cos(alpha) cos(kt) + sin(alpha) sin(kt)        K > 0
///   J = cos(alpha) + sin(alpha) t / D                  K = 0
///   J = cos(alpha) cosh(k u) + sin(alpha) sinh(k u)    K < 0, u = t - D/2
/// with k = sqrt(|K|/(N-1)). `smooth` is false when J changes sign inside
/// (0, D), i.e. the minimizer is a clipped (only continuous) density.
struct ModelProfileResult {
  double value = 0.0;
  double alpha = 0.0;
  HalfLine side = HalfLine::kLower;
  double r = 0.0;
  double support_lo = 0.0;
  double support_hi = 0.0;
  bool smooth = true;
  bool unbounded = false;  // K <= 0 and D = inf: the profile is identically 0
  double D_used = 0.0;     // D, or pi/k when K > 0 and D exceeds it
};

/// Throws isoperim.BadVolume, isoperim.BadDimension, isoperim.BadDiameter,
/// isoperim.BadCurvature.
ModelProfileResult model_profile_detail(const ModelProfileSpec& spec, double v);
double model_profile(const ModelProfileSpec& spec, double v);

/// Content of the half-line set of volume v for one member of the family;
/// +inf when the phase leaves no positive part. Exposed for brute-force checks.
double model_family_content(const ModelProfileSpec& spec, double alpha, double v);

struct MinkowskiEstimate {
  double content = 0.0;  // extrapolated limit, clamped at 0
  double set_mass = 0.0;
  std::vector<double> eps;
  std::vector<double> quotients;  // (m(A^eps) - m(A)) / eps
};

/// A^eps = {x : d(x, A) <= eps}, closed balls with a 1e-9 relative rounding
/// slack. The limit is the least-squares slope of m(A^eps) - m(A) against eps,
/// which is Richardson extrapolation of the quotients under the discrete error
/// model q(eps) = L + a / eps. A single radius returns its raw quotient.
/// Throws isoperim.MeshTooCoarse when min eps < 2 mesh, isoperim.BadEpsilon
/// when eps is not a decreasing positive list, isoperim.BadSet.
MinkowskiEstimate minkowski_content(const MMSpace& space, std::span<const unsigned char> in_set,
                                    std::span<const double> eps_list);

/// Default radii for empirical estimates: {6, 4, 2} * mesh.
std::vector<double> default_eps_list(const MMSpace& space);

/// A candidate family: sublevel sets of some function, given as the point
/// order in which the greedy fill adds points.
struct ProfileCandidate {
  std::string kind;  // "ball", "potential" or "potential-upper"
  int base = -1;     // ball centre, or the source cell's seed point
  std::vector<int> order;
};

/// Metric balls around random base points and sub/superlevel sets of the
/// Kantorovich potential between the two Voronoi cells of random point pairs.
/// One W1 solve per eight units of budget, each giving two candidates.
std::vector<ProfileCandidate> profile_candidates(const MMSpace& space, std::size_t budget,
                                                 std::uint64_t seed);

struct ProfilePoint {
  double v = 0.0;
  double attained = 0.0;     // mass of the chosen set
  double mass_defect = 0.0;  // |attained - v|
  double content = 0.0;
  std::string kind;
  int base = -1;
  std::size_t set_size = 0;
};

/// Smallest estimated Minkowski content among the candidates, each filled
/// greedily to the prefix mass nearest v (at least one point, never all).
/// Throws isoperim.BadVolume unless 0 < v < 1.
ProfilePoint empirical_profile(const MMSpace& space, std::span<const ProfileCandidate> candidates,
                               double v, std::span<const double> eps_list = {});
ProfilePoint empirical_profile(const MMSpace& space, double v, std::size_t budget, std::uint64_t seed);

struct LevyGromovRow {
  double v = 0.0;
  double attained = 0.0;
  double empirical = 0.0;
  double model = 0.0;           // at the attained mass
  double slack = 0.0;           // empirical - model
  double relative_slack = 0.0;  // slack / model, 0 when model == 0
  double allowance = 0.0;       // relative
  bool pass = true;
  std::string kind;
};

struct LevyGromovReport {
  bool pass = true;
  double K = 0.0;
  double N = 0.0;
  double D_used = 0.0;
  double mesh = 0.0;
  std::vector<LevyGromovRow> rows;
};

inline constexpr double kLevyGromovAllowance = 0.05;

/// Empirical profile against I_{K,N,D} with D the diameter of the space.
/// A row passes when relative_slack >= -max(0.05, 4 mesh / model).
LevyGromovReport levy_gromov_check(const MMSpace& space, double K, double N, std::span<const double> v_grid,
                                   std::size_t budget, std::uint64_t seed);

}  // namespace needle
