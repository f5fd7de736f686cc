#include "needle/monge1d.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "needle/errors.hpp"
#include "needle/parallel.hpp"

namespace needle {
namespace {

double unit_mass(std::int64_t units) { return static_cast<double>(units) / static_cast<double>(kMassUnits); }

void sort_atoms(std::vector<Atom>& atoms, TieBreak tie) {
  std::erase_if(atoms, [](const Atom& a) { return a.units == 0; });
  std::sort(atoms.begin(), atoms.end(), [tie](const Atom& a, const Atom& b) {
    if (a.position != b.position) return a.position < b.position;
    return tie == TieBreak::kLabelAscending ? a.label < b.label : a.label > b.label;
  });
}

__int128 total_units(const std::vector<Atom>& atoms) {
  __int128 total = 0;
  for (const auto& a : atoms) {
    if (a.units < 0 || !std::isfinite(a.position)) fail("monge1d", "BadAtom", "atoms need finite positions and nonnegative mass");
    total += a.units;
  }
  return total;
}

}  // namespace

MonotoneMap1D monotone_rearrangement(std::vector<Atom> source, std::vector<Atom> target, TieBreak tie) {
  if (total_units(source) != total_units(target)) {
    fail("monge1d", "MassMismatch", "source and target carry different total mass");
  }
  MonotoneMap1D out;
  sort_atoms(source, tie);
  sort_atoms(target, tie);
  std::size_t i = 0, j = 0;
  std::int64_t left_src = source.empty() ? 0 : source[0].units;
  std::int64_t left_tgt = target.empty() ? 0 : target[0].units;
  std::vector<int> pieces(source.size(), 0);
  while (i < source.size() && j < target.size()) {
    const std::int64_t amount = std::min(left_src, left_tgt);
    out.assignment.push_back({static_cast<int>(i), static_cast<int>(j), amount});
    out.cost += unit_mass(amount) * std::abs(target[j].position - source[i].position);
    ++pieces[i];
    left_src -= amount;
    left_tgt -= amount;
    if (left_src == 0 && ++i < source.size()) left_src = source[i].units;
    if (left_tgt == 0 && ++j < target.size()) left_tgt = target[j].units;
  }
  out.is_map = std::all_of(pieces.begin(), pieces.end(), [](int p) { return p <= 1; });
  out.source_atoms = std::move(source);
  out.target_atoms = std::move(target);
  return out;
}

double cdf_transport_cost(const std::vector<Atom>& source, const std::vector<Atom>& target) {
  // Signed unit changes at each position; F - H is constant between them.
  std::map<double, __int128> jumps;
  for (const auto& a : source) jumps[a.position] += a.units;
  for (const auto& a : target) jumps[a.position] -= a.units;
  double cost = 0.0;
  __int128 running = 0;
  for (auto it = jumps.begin(); it != jumps.end(); ++it) {
    running += it->second;
    const auto next = std::next(it);
    if (next == jumps.end()) break;
    const __int128 magnitude = running < 0 ? -running : running;
    cost += static_cast<double>(magnitude) / static_cast<double>(kMassUnits) * (next->first - it->first);
  }
  return cost;
}

MongeResult assemble_monge_map(const MMSpace& space, const RayDecomposition& dec, const W1Solution& solution,
                               TieBreak tie) {
  const std::size_t n = space.size();
  const auto& phi = solution.potential;
  const std::size_t rays = dec.rays.size();
  MongeResult result;
  result.w1 = solution.primal_value;
  result.per_ray_cost.assign(rays, 0.0);

  // Plan rows grouped by the ray of their source.
  std::vector<std::vector<const PlanEntry*>> rows(rays);
  std::vector<PlanEntry> coupling;
  for (const auto& e : solution.plan) {
    const int r = dec.ray_of[e.source];
    if (r >= 0) {
      rows[r].push_back(&e);
    } else {
      coupling.push_back(e);
    }
  }

  std::vector<std::vector<PlanEntry>> ray_coupling(rays);
  std::vector<std::int64_t> ray_defect(rays, 0);
  parallel_shards(rays, [&](int, std::size_t begin, std::size_t end) {
    std::map<int, std::int64_t> targets;
    for (std::size_t r = begin; r < end; ++r) {
      const double origin = phi[dec.representatives[r]];
      std::vector<Atom> src, tgt;
      std::int64_t on_ray1 = 0;
      for (int p : dec.rays[r]) {
        src.push_back({origin - phi[p], solution.mu0_units[p], p});
        on_ray1 += solution.mu1_units[p];
      }
      targets.clear();
      for (const auto* e : rows[r]) targets[e->target] += e->units;
      for (const auto& [y, units] : targets) tgt.push_back({origin - phi[y], units, y});

      __int128 src_total = 0, tgt_total = 0;
      for (const auto& a : src) src_total += a.units;
      for (const auto& a : tgt) tgt_total += a.units;
      if (src_total != tgt_total) {
        fail("monge1d", "RayMarginalMismatch", "ray " + std::to_string(r) + " target mass differs from its source mass");
      }
      const auto defect = static_cast<std::int64_t>(src_total) - on_ray1;
      ray_defect[r] = defect < 0 ? -defect : defect;

      auto map = monotone_rearrangement(std::move(src), std::move(tgt), tie);
      for (const auto& c : map.assignment) {
        const int x = map.source_atoms[c.source].label;
        const int y = map.target_atoms[c.target].label;
        ray_coupling[r].push_back({x, y, c.units});
        result.per_ray_cost[r] += unit_mass(c.units) * space.distance(x, y);
      }
    }
  });
  for (std::size_t r = 0; r < rays; ++r) {
    coupling.insert(coupling.end(), ray_coupling[r].begin(), ray_coupling[r].end());
    result.max_ray_marginal_defect = std::max(result.max_ray_marginal_defect, ray_defect[r]);
  }

  std::sort(coupling.begin(), coupling.end(), [](const PlanEntry& a, const PlanEntry& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  for (const auto& e : coupling) {
    if (!result.coupling.empty() && result.coupling.back().source == e.source &&
        result.coupling.back().target == e.target) {
      result.coupling.back().units += e.units;
    } else {
      result.coupling.push_back(e);
    }
  }
  std::vector<int> targets_per_source(n, 0);
  for (const auto& e : result.coupling) {
    ++targets_per_source[e.source];
    if (e.source != e.target) result.cost += e.mass() * space.distance(e.source, e.target);
  }
  result.is_map = std::all_of(targets_per_source.begin(), targets_per_source.end(), [](int k) { return k <= 1; });
  result.defect = result.cost - result.w1;
  return result;
}

}  // namespace needle
