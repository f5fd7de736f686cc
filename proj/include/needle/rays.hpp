#pragma once

#include <cstdint>
#include <vector>

#include "needle/mmspace.hpp"
#include "needle/w1solve.hpp"

namespace needle {

/// Point sets derived from Gamma. Every list is sorted by point index; the
/// `in_*` masks hold the same sets for O(1) lookup.
struct TransportStructure {
  GammaSet gamma;
  std::vector<int> initial_points;   // no strict Gamma-predecessor
  std::vector<int> final_points;     // no strict Gamma-successor
  std::vector<int> transport_set_e;  // touched by some strict pair of Gamma
  std::vector<int> branching_fwd;    // A+
  std::vector<int> branching_bwd;    // A-
  std::vector<int> transport_set;    // T_e minus (A+ union A-)
  std::vector<unsigned char> in_transport_e, in_branching, in_transport;

  double transport_e_mass = 0.0;
  double branching_mass = 0.0;  // m(A+ union A-)
  /// m(A+ union A-) / m(T_e); zero when T_e is empty.
  double branching_fraction() const {
    return transport_e_mass > 0.0 ? branching_mass / transport_e_mass : 0.0;
  }
};

TransportStructure build_transport_structure(const MMSpace& space, const GammaSet& gamma);

struct RayDecomposition {
  /// Each ray ordered by decreasing potential (direction of transport).
  std::vector<std::vector<int>> rays;
  std::vector<int> representatives;  // one point per ray
  std::vector<double> ray_mass;      // m(ray)
  std::vector<int> ray_of;           // per point, -1 off the rays
  std::vector<double> param;         // per point, NaN off the rays
  std::vector<int> orphan_points;    // points of T in no ray
  std::size_t non_chain_components = 0;
  double orphan_mass = 0.0;
};

struct QuotientAssignment {
  std::vector<int> representatives;
  std::vector<double> weights;
};

/// Representative of each ray: the point whose potential is nearest the
/// median potential along the ray (lower index on ties). Weight: m(ray).
/// Throws rays.EmptyRay for a ray with fewer than two points.
QuotientAssignment select_quotient(const MMSpace& space, const std::vector<std::vector<int>>& rays,
                                   const std::vector<double>& potential);

/// Connected components of R on T. Components that are not pairwise
/// R-related (not a chain) and isolated points become orphans. The ray map
/// parameter is the signed distance from the representative, increasing as
/// the potential decreases.
RayDecomposition partition_rays(const MMSpace& space, const TransportStructure& structure);

}  // namespace needle
