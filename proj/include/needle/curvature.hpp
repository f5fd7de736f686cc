#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "needle/mmspace.hpp"

namespace needle {

/// Distortion coefficient sigma^{(t)}_{K,N}(theta); +inf when K theta^2 >= N pi^2
/// with K theta^2 != 0.
double sigma(double K, double N, double t, double theta);

/// tau^{(t)}_{K,N}(theta) = t^{1/N} sigma^{(t)}_{K,N-1}(theta)^{(N-1)/N}. For
/// N = 1 this is t when K theta^2 <= 0 and +inf otherwise.
double tau(double K, double N, double t, double theta);

/// Largest |f'' + theta^2 (K/N) f| over s in [ds, 1 - ds], with f(s) =
/// sigma^{(s)}_{K,N}(theta) and f'' the centered second difference.
double sigma_ode_residual(double K, double N, double theta, double ds);

struct CDTriple {
  double t0 = 0.0;
  double t1 = 0.0;
  double s = 0.0;
};

struct MCPQuad {
  double s = 0.0;
  double tau = 0.0;
  double sigma_minus = 0.0;
  double sigma_plus = 0.0;
};

struct CDReport {
  bool pass = true;
  double margin = 0.0;  // smallest relative slack; -inf when a coefficient is infinite
  CDTriple worst;
  std::size_t tested = 0;
  std::string reason;  // set on failures that are not plain inequality violations
};

struct MCPReport {
  bool pass = true;
  double margin = 0.0;
  MCPQuad worst;
  std::size_t tested = 0;
  std::string reason;
};

inline constexpr double kCurvatureRelTol = 1e-7;

/// h((1-s)t0 + s t1)^{1/(N-1)} >= sigma^{(1-s)}_{K,N-1}(t1-t0) h(t0)^{1/(N-1)}
///                               + sigma^{(s)}_{K,N-1}(t1-t0) h(t1)^{1/(N-1)},
/// with h^{1/(N-1)} interpolated linearly between grid points. Slack is
/// measured relative to the right-hand side. For N = 1 the verdict is
/// whether h is constant. Throws curvature.DegenerateDensity,
/// curvature.BadDimension.
CDReport cd_density_check(const Density1D& h, double K, double N, std::span<const CDTriple> triples,
                          double rel_tol = kCurvatureRelTol);

/// Two-sided ratio bounds on h(tau)/h(s) for sigma_- < s <= tau < sigma_+,
/// with sin (K > 0), linear (K = 0) or sinh (K < 0) comparison functions.
MCPReport mcp_density_check(const Density1D& h, double K, double N, std::span<const MCPQuad> quads,
                            double rel_tol = kCurvatureRelTol);

/// Random triples i < k < j on the grid, with s chosen so the intermediate
/// point is the grid point k. The full-span triple through the middle grid
/// point is always included first. Restricted to grid points in [lo, hi].
std::vector<CDTriple> grid_triples(const Density1D& h, std::size_t count, std::mt19937_64& rng,
                                   double lo = -1e300, double hi = 1e300);

/// Random grid quadruples sigma_- < s <= tau < sigma_+; one in ten has s = tau.
std::vector<MCPQuad> grid_quads(const Density1D& h, std::size_t count, std::mt19937_64& rng);

/// h_eps = [h^{1/(N-1)} * psi_eps]^{N-1} with psi a smooth bump on [0, 1].
/// Output grid: the input spacing continued over [-eps, D + eps].
/// Throws curvature.BadDimension (N <= 1), curvature.BadEpsilon.
Density1D mollify_density(const Density1D& h, double N, double eps);

/// Integral of |a - b| with both densities taken as zero outside their grids.
double l1_distance(const Density1D& a, const Density1D& b);

}  // namespace needle
