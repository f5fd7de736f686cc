#pragma once

#include <cstdint>
#include <vector>

#include "needle/rays.hpp"
#include "needle/w1solve.hpp"

namespace needle {

struct Atom {
  double position = 0.0;
  std::int64_t units = 0;  // mass in units of 1 / kMassUnits
  int label = -1;          // caller's point index, carried through
};

struct AtomCoupling {
  int source = 0;  // index into source_atoms
  int target = 0;  // index into target_atoms
  std::int64_t units = 0;
};

/// Order used among atoms sharing a position.
enum class TieBreak { kLabelAscending, kLabelDescending };

struct MonotoneMap1D {
  std::vector<Atom> source_atoms;  // sorted by position
  std::vector<Atom> target_atoms;  // sorted by position
  std::vector<AtomCoupling> assignment;
  double cost = 0.0;  // sum of mass * |t - s|
  bool is_map = true;  // no source atom is split
};

/// Quantile coupling: both atom lists are swept in increasing position and
/// mass is matched greedily. Zero-mass atoms are dropped.
/// Throws monge1d.MassMismatch when the totals differ.
MonotoneMap1D monotone_rearrangement(std::vector<Atom> source, std::vector<Atom> target,
                                     TieBreak tie = TieBreak::kLabelAscending);

/// Cost of the coupling in `a` through the CDF identity: integral of |F - H|.
double cdf_transport_cost(const std::vector<Atom>& source, const std::vector<Atom>& target);

struct MongeResult {
  std::vector<PlanEntry> coupling;  // (source point, target point, units), diagonal included
  double cost = 0.0;
  double w1 = 0.0;
  double defect = 0.0;  // cost - w1
  bool is_map = true;
  std::vector<double> per_ray_cost;
  /// Largest |mu0(ray) - mu1(ray)| in units, with mu1 read directly on the ray points.
  std::int64_t max_ray_marginal_defect = 0;
};

/// Monotone rearrangement along every ray in the coordinate phi(rep) - phi,
/// with the targets of each ray given by the solver plan restricted to
/// sources on that ray. Sources on no ray keep their plan rows.
/// Throws monge1d.RayMarginalMismatch when a ray's target mass differs from
/// its source mass.
MongeResult assemble_monge_map(const MMSpace& space, const RayDecomposition& dec, const W1Solution& solution,
                               TieBreak tie = TieBreak::kLabelAscending);

}  // namespace needle
