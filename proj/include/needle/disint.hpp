#pragma once

#include <random>
#include <span>
#include <utility>
#include <vector>

#include "needle/mmspace.hpp"
#include "needle/rays.hpp"

namespace needle {

/// A measure split along the rays: m = sum_q q(q) m_q + residual.
struct Disintegration {
  std::vector<double> quotient_weights;           // per ray
  std::vector<std::vector<double>> conditionals;  // per ray, aligned with the ray's points
  std::vector<double> residual;                   // per point, mass off the rays
  double residual_mass = 0.0;
  std::vector<int> zero_mass_rays;  // rays with zero measure; their conditional is empty
};

/// Restricts `measure` to each ray and renormalizes. Throws
/// disint.BadMeasure for a wrong length or a negative entry.
Disintegration disintegrate(const RayDecomposition& dec, std::span<const double> measure);

/// Pointwise sum of q(q) m_q plus the residual.
std::vector<double> reconstruct(const RayDecomposition& dec, const Disintegration& dis);

/// Largest single-point conditional mass on each ray.
std::vector<double> max_atoms(const Disintegration& dis);

struct ConsistencyReport {
  std::size_t pairs_tested = 0;
  double max_abs_error = 0.0;
};

/// For each (B, C): measure(B restricted to the rays in C) against
/// sum over q in C of q(q) m_q(B).
ConsistencyReport check_consistency(const RayDecomposition& dec, std::span<const double> measure,
                                    const Disintegration& dis,
                                    const std::vector<std::vector<int>>& test_sets,
                                    const std::vector<std::vector<int>>& ray_subsets);

/// `count` random (B, C) pairs, each point and each ray kept with probability 1/2.
ConsistencyReport check_consistency_random(const RayDecomposition& dec, std::span<const double> measure,
                                           const Disintegration& dis, std::size_t count,
                                           std::mt19937_64& rng);

struct BalanceReport {
  std::vector<double> per_ray;     // sum over the ray of f m
  std::vector<double> per_ray_conditional;  // integral of f against m_q
  double max_abs = 0.0;
  double max_abs_conditional = 0.0;
  double weighted_mean = 0.0;  // sum_q m(ray q) |per_ray_conditional q| / sum_q m(ray q)
  double global_integral = 0.0;
};

/// Per-ray integrals of f against the reference measure. Throws
/// disint.NotMeanZero when |sum f m| > 1e-10.
BalanceReport check_balance(const MMSpace& space, const RayDecomposition& dec, std::span<const double> f);

/// Transport problem of a zero-mean f: (f+ m, f- m), each normalized.
/// Throws disint.NotMeanZero.
std::pair<std::vector<double>, std::vector<double>> balance_marginals(const MMSpace& space,
                                                                      std::span<const double> f);

}  // namespace needle
