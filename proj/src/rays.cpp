#include "needle/rays.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "needle/errors.hpp"
#include "needle/parallel.hpp"

namespace needle {
namespace {

// Dense bit matrix, one row of 64-bit words per point.
class BitMatrix {
 public:
  explicit BitMatrix(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}
  void set(std::size_t r, std::size_t c) { bits_[r * words_ + c / 64] |= std::uint64_t{1} << (c % 64); }
  const std::uint64_t* row(std::size_t r) const { return bits_.data() + r * words_; }
  std::uint64_t* row(std::size_t r) { return bits_.data() + r * words_; }
  std::size_t words() const { return words_; }

 private:
  std::size_t n_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

// True when some z in `set` has a member of `set` outside R(z).
bool has_unrelated_pair(const BitMatrix& set_rows, std::size_t x, const BitMatrix& related) {
  const std::uint64_t* s = set_rows.row(x);
  const std::size_t words = set_rows.words();
  for (std::size_t wz = 0; wz < words; ++wz) {
    for (std::uint64_t bz = s[wz]; bz; bz &= bz - 1) {
      const std::size_t z = wz * 64 + std::countr_zero(bz);
      const std::uint64_t* r = related.row(z);
      for (std::size_t w = 0; w < words; ++w)
        if (s[w] & ~r[w]) return true;
    }
  }
  return false;
}

std::vector<int> members(const std::vector<unsigned char>& mask) {
  std::vector<int> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(static_cast<int>(i));
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

TransportStructure build_transport_structure(const MMSpace& space, const GammaSet& gamma) {
  const std::size_t n = space.size();
  TransportStructure ts;
  ts.gamma = gamma;

  BitMatrix fwd(n), bwd(n), rel(n);
  std::vector<unsigned char> has_succ(n, 0), has_pred(n, 0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (!gamma.contains(static_cast<int>(x), static_cast<int>(y))) continue;
      fwd.set(x, y);
      bwd.set(y, x);
      rel.set(x, y);
      rel.set(y, x);
      if (x != y) {
        has_succ[x] = 1;
        has_pred[y] = 1;
      }
    }
  }

  std::vector<unsigned char> plus(n, 0), minus(n, 0);
  ts.in_transport_e.assign(n, 0);
  for (std::size_t x = 0; x < n; ++x) ts.in_transport_e[x] = has_succ[x] || has_pred[x];
  parallel_shards(n, [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t x = begin; x < end; ++x) {
      if (!ts.in_transport_e[x]) continue;
      plus[x] = has_unrelated_pair(fwd, x, rel);
      minus[x] = has_unrelated_pair(bwd, x, rel);
    }
  });

  ts.in_branching.assign(n, 0);
  ts.in_transport.assign(n, 0);
  std::vector<unsigned char> initial(n, 0), final(n, 0);
  for (std::size_t x = 0; x < n; ++x) {
    initial[x] = !has_pred[x];
    final[x] = !has_succ[x];
    ts.in_branching[x] = plus[x] || minus[x];
    ts.in_transport[x] = ts.in_transport_e[x] && !ts.in_branching[x];
    if (ts.in_transport_e[x]) ts.transport_e_mass += space.weight(x);
    if (ts.in_branching[x]) ts.branching_mass += space.weight(x);
  }
  ts.initial_points = members(initial);
  ts.final_points = members(final);
  ts.transport_set_e = members(ts.in_transport_e);
  ts.branching_fwd = members(plus);
  ts.branching_bwd = members(minus);
  ts.transport_set = members(ts.in_transport);
  return ts;
}

QuotientAssignment select_quotient(const MMSpace& space, const std::vector<std::vector<int>>& rays,
                                   const std::vector<double>& potential) {
  QuotientAssignment q;
  q.representatives.reserve(rays.size());
  q.weights.reserve(rays.size());
  std::vector<double> values;
  for (const auto& ray : rays) {
    if (ray.size() < 2) fail("rays", "EmptyRay", "rays must contain at least two points");
    values.clear();
    for (int p : ray) values.push_back(potential[p]);
    std::sort(values.begin(), values.end());
    const std::size_t k = values.size();
    const double median = k % 2 ? values[k / 2] : 0.5 * (values[k / 2 - 1] + values[k / 2]);
    int best = ray.front();
    double best_gap = std::numeric_limits<double>::infinity();
    for (int p : ray) {
      const double gap = std::abs(potential[p] - median);
      if (gap < best_gap || (gap == best_gap && p < best)) {
        best = p;
        best_gap = gap;
      }
    }
    q.representatives.push_back(best);
    q.weights.push_back(space.total_weight(ray));
  }
  return q;
}

RayDecomposition partition_rays(const MMSpace& space, const TransportStructure& ts) {
  const std::size_t n = space.size();
  const GammaSet& gamma = ts.gamma;
  const auto& phi = gamma.potential();

  UnionFind uf(n);
  for (int x : ts.transport_set)
    for (int y : ts.transport_set)
      if (x < y && gamma.related(x, y)) uf.unite(x, y);

  std::vector<std::vector<int>> components(n);
  for (int x : ts.transport_set) components[uf.find(x)].push_back(x);

  RayDecomposition dec;
  dec.ray_of.assign(n, -1);
  dec.param.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (auto& comp : components) {
    if (comp.empty()) continue;
    bool chain = comp.size() >= 2;
    for (std::size_t i = 0; chain && i < comp.size(); ++i)
      for (std::size_t j = i + 1; chain && j < comp.size(); ++j)
        chain = gamma.related(comp[i], comp[j]);
    if (!chain) {
      if (comp.size() >= 2) ++dec.non_chain_components;
      dec.orphan_points.insert(dec.orphan_points.end(), comp.begin(), comp.end());
      continue;
    }
    std::stable_sort(comp.begin(), comp.end(), [&](int a, int b) { return phi[a] > phi[b]; });
    dec.rays.push_back(std::move(comp));
  }
  std::sort(dec.rays.begin(), dec.rays.end(),
            [](const auto& a, const auto& b) { return *std::min_element(a.begin(), a.end()) < *std::min_element(b.begin(), b.end()); });
  std::sort(dec.orphan_points.begin(), dec.orphan_points.end());
  dec.orphan_mass = space.total_weight(dec.orphan_points);

  const auto q = select_quotient(space, dec.rays, phi);
  dec.representatives = q.representatives;
  dec.ray_mass = q.weights;
  for (std::size_t r = 0; r < dec.rays.size(); ++r) {
    const int rep = dec.representatives[r];
    for (int p : dec.rays[r]) {
      dec.ray_of[p] = static_cast<int>(r);
      const double d = space.distance(rep, p);
      dec.param[p] = phi[p] <= phi[rep] ? d : -d;
    }
    dec.param[rep] = 0.0;
  }
  return dec;
}

}  // namespace needle
