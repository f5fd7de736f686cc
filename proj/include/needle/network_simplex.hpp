#pragma once

#include <cstdint>
#include <vector>

namespace needle {

/// Primal network simplex for uncapacitated min-cost transshipment with
/// integer supplies and integer arc costs.
///
/// Sum of supplies must be zero. Node potentials are returned with the
/// convention cost(u,v) + pi(u) - pi(v) >= 0 on every arc, with equality on
/// arcs carrying flow. The spanning-tree basis is kept strongly feasible by
/// the leaving-arc rule, which prevents cycling on degenerate pivots.
class NetworkSimplex {
 public:
  using Cost = std::int64_t;
  using Flow = std::int64_t;

  explicit NetworkSimplex(int node_count);

  int add_arc(int from, int to, Cost cost);
  void set_supply(int node, Flow supply);
  void reserve_arcs(std::size_t count);

  enum class Status { kOptimal, kInfeasible, kIterationLimit };
  Status solve(std::int64_t max_pivots = 0);

  Flow flow(int arc) const { return flow_[arc]; }
  Cost potential(int node) const { return pi_[node]; }
  /// Objective as a 128-bit integer (flows times costs can exceed 64 bits).
  __int128 objective() const;
  std::int64_t pivots() const { return pivots_; }

  int node_count() const { return n_; }
  int arc_count() const { return m_; }
  int source(int arc) const { return src_[arc]; }
  int target(int arc) const { return tgt_[arc]; }
  Cost cost(int arc) const { return cost_[arc]; }

 private:
  bool find_entering(int& arc);
  void pivot(int in_arc);
  void rehang(int cut_root, int new_parent, int via_arc);

  int n_;
  int m_ = 0;
  std::vector<int> src_, tgt_;
  std::vector<Cost> cost_;
  std::vector<Flow> flow_;
  std::vector<Flow> supply_;

  // Spanning tree over n_ + 1 nodes (index n_ is the artificial root).
  std::vector<int> parent_, pred_, depth_;
  std::vector<signed char> pred_up_;  // 1: pred arc points to the parent
  std::vector<Cost> pi_;
  std::vector<std::vector<int>> tree_adj_;
  std::vector<int> stack_;

  std::size_t block_size_ = 0;
  int next_arc_ = 0;
  std::int64_t pivots_ = 0;
};

}  // namespace needle
