#include "needle/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "needle/errors.hpp"

namespace needle {
namespace {
constexpr NetworkSimplex::Flow kInfFlow = std::numeric_limits<NetworkSimplex::Flow>::max();
}

NetworkSimplex::NetworkSimplex(int node_count) : n_(node_count), supply_(node_count, 0) {}

void NetworkSimplex::reserve_arcs(std::size_t count) {
  src_.reserve(count + n_);
  tgt_.reserve(count + n_);
  cost_.reserve(count + n_);
}

int NetworkSimplex::add_arc(int from, int to, Cost cost) {
  if (cost < 0) fail("w1solve", "SolverFailure", "negative arc cost");
  src_.push_back(from);
  tgt_.push_back(to);
  cost_.push_back(cost);
  return m_++;
}

void NetworkSimplex::set_supply(int node, Flow supply) { supply_[node] = supply; }

__int128 NetworkSimplex::objective() const {
  __int128 total = 0;
  for (int a = 0; a < m_; ++a) total += static_cast<__int128>(flow_[a]) * cost_[a];
  return total;
}

NetworkSimplex::Status NetworkSimplex::solve(std::int64_t max_pivots) {
  Flow balance = 0;
  for (Flow s : supply_) balance += s;
  if (balance != 0) return Status::kInfeasible;

  Cost max_cost = 1;
  for (Cost c : cost_) max_cost = std::max(max_cost, c);
  const Cost art_cost = static_cast<Cost>(n_ + 1) * max_cost + 1;

  const int root = n_;
  const int total_arcs = m_ + n_;
  flow_.assign(total_arcs, 0);
  parent_.assign(n_ + 1, -1);
  pred_.assign(n_ + 1, -1);
  depth_.assign(n_ + 1, 0);
  pred_up_.assign(n_ + 1, 0);
  pi_.assign(n_ + 1, 0);
  tree_adj_.assign(n_ + 1, {});

  // Artificial star: supply nodes ship to the root at zero cost, the root
  // feeds demand nodes at a cost no real path can match.
  for (int u = 0; u < n_; ++u) {
    const int a = m_ + u;
    if (supply_[u] >= 0) {
      src_.push_back(u);
      tgt_.push_back(root);
      cost_.push_back(0);
      flow_[a] = supply_[u];
      pred_up_[u] = 1;
      pi_[u] = 0;
    } else {
      src_.push_back(root);
      tgt_.push_back(u);
      cost_.push_back(art_cost);
      flow_[a] = -supply_[u];
      pred_up_[u] = 0;
      pi_[u] = art_cost;
    }
    parent_[u] = root;
    pred_[u] = a;
    depth_[u] = 1;
    tree_adj_[u].push_back(a);
    tree_adj_[root].push_back(a);
  }

  block_size_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(double(total_arcs))));
  next_arc_ = 0;
  pivots_ = 0;
  if (max_pivots <= 0) max_pivots = std::numeric_limits<std::int64_t>::max();

  int in_arc = -1;
  while (find_entering(in_arc)) {
    if (pivots_ >= max_pivots) {
      src_.resize(m_);
      tgt_.resize(m_);
      cost_.resize(m_);
      return Status::kIterationLimit;
    }
    pivot(in_arc);
    ++pivots_;
  }

  bool feasible = true;
  for (int u = 0; u < n_; ++u)
    if (flow_[m_ + u] != 0) feasible = false;
  src_.resize(m_);
  tgt_.resize(m_);
  cost_.resize(m_);
  flow_.resize(m_);
  return feasible ? Status::kOptimal : Status::kInfeasible;
}

bool NetworkSimplex::find_entering(int& arc) {
  const int total = static_cast<int>(src_.size());
  Cost best = 0;
  std::size_t count = block_size_;
  int e = next_arc_;
  auto scan = [&](int lo, int hi) -> bool {
    for (e = lo; e != hi; ++e) {
      const Cost rc = cost_[e] + pi_[src_[e]] - pi_[tgt_[e]];
      if (rc < best) {
        best = rc;
        arc = e;
      }
      if (--count == 0) {
        if (best < 0) return true;
        count = block_size_;
      }
    }
    return false;
  };
  if (scan(next_arc_, total) || scan(0, next_arc_)) {
    next_arc_ = e;
    return true;
  }
  if (best < 0) {
    next_arc_ = e;
    return true;
  }
  return false;
}

void NetworkSimplex::pivot(int in_arc) {
  const int first = src_[in_arc];
  const int second = tgt_[in_arc];

  int u = first;
  int v = second;
  while (u != v) {
    if (depth_[u] > depth_[v]) {
      u = parent_[u];
    } else if (depth_[v] > depth_[u]) {
      v = parent_[v];
    } else {
      u = parent_[u];
      v = parent_[v];
    }
  }
  const int join = u;

  // Leaving arc: the blocking arc met last when walking the cycle in the
  // direction of the entering arc (keeps the basis strongly feasible).
  Flow delta = kInfFlow;
  int u_out = -1;
  int side = 0;
  for (int w = first; w != join; w = parent_[w]) {
    const Flow d = pred_up_[w] ? flow_[pred_[w]] : kInfFlow;
    if (d < delta) {
      delta = d;
      u_out = w;
      side = 1;
    }
  }
  for (int w = second; w != join; w = parent_[w]) {
    const Flow d = pred_up_[w] ? kInfFlow : flow_[pred_[w]];
    if (d <= delta) {
      delta = d;
      u_out = w;
      side = 2;
    }
  }
  if (delta == kInfFlow) fail("w1solve", "SolverFailure", "unbounded cycle in transshipment problem");

  if (delta > 0) {
    flow_[in_arc] += delta;
    for (int w = first; w != join; w = parent_[w]) flow_[pred_[w]] += pred_up_[w] ? -delta : delta;
    for (int w = second; w != join; w = parent_[w]) flow_[pred_[w]] += pred_up_[w] ? delta : -delta;
  }

  const int out_arc = pred_[u_out];
  auto drop = [&](int node, int a) {
    auto& list = tree_adj_[node];
    auto it = std::find(list.begin(), list.end(), a);
    *it = list.back();
    list.pop_back();
  };
  drop(src_[out_arc], out_arc);
  drop(tgt_[out_arc], out_arc);
  tree_adj_[first].push_back(in_arc);
  tree_adj_[second].push_back(in_arc);

  const int cut_root = side == 1 ? first : second;
  const int new_parent = side == 1 ? second : first;
  rehang(cut_root, new_parent, in_arc);
}

void NetworkSimplex::rehang(int cut_root, int new_parent, int via_arc) {
  auto attach = [&](int child, int par, int a) {
    parent_[child] = par;
    pred_[child] = a;
    depth_[child] = depth_[par] + 1;
    if (src_[a] == child) {
      pred_up_[child] = 1;
      pi_[child] = pi_[par] - cost_[a];
    } else {
      pred_up_[child] = 0;
      pi_[child] = pi_[par] + cost_[a];
    }
  };
  attach(cut_root, new_parent, via_arc);
  stack_.clear();
  stack_.push_back(cut_root);
  while (!stack_.empty()) {
    const int w = stack_.back();
    stack_.pop_back();
    for (int a : tree_adj_[w]) {
      if (a == pred_[w]) continue;
      const int x = src_[a] == w ? tgt_[a] : src_[a];
      attach(x, w, a);
      stack_.push_back(x);
    }
  }
}

}  // namespace needle
