#include "needle/disint.hpp"

#include <algorithm>
#include <cmath>

#include "needle/errors.hpp"

namespace needle {
namespace {

constexpr double kMeanZeroTol = 1e-10;

double global_integral(const MMSpace& space, std::span<const double> f) {
  if (f.size() != space.size()) fail("disint", "BadFunction", "f has wrong length");
  double total = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) total += f[x] * space.weight(x);
  if (std::abs(total) > kMeanZeroTol) {
    fail("disint", "NotMeanZero", "integral of f is " + std::to_string(total));
  }
  return total;
}

}  // namespace

Disintegration disintegrate(const RayDecomposition& dec, std::span<const double> measure) {
  const std::size_t n = dec.ray_of.size();
  if (measure.size() != n) fail("disint", "BadMeasure", "measure has wrong length");
  for (double v : measure)
    if (!(v >= 0.0)) fail("disint", "BadMeasure", "measure must be nonnegative");

  Disintegration dis;
  dis.residual.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    if (dec.ray_of[x] < 0) {
      dis.residual[x] = measure[x];
      dis.residual_mass += measure[x];
    }
  }
  for (std::size_t r = 0; r < dec.rays.size(); ++r) {
    const auto& ray = dec.rays[r];
    double mass = 0.0;
    for (int p : ray) mass += measure[p];
    dis.quotient_weights.push_back(mass);
    std::vector<double> cond;
    if (mass > 0.0) {
      cond.reserve(ray.size());
      for (int p : ray) cond.push_back(measure[p] / mass);
    } else {
      dis.zero_mass_rays.push_back(static_cast<int>(r));
    }
    dis.conditionals.push_back(std::move(cond));
  }
  return dis;
}

std::vector<double> reconstruct(const RayDecomposition& dec, const Disintegration& dis) {
  std::vector<double> out = dis.residual;
  for (std::size_t r = 0; r < dec.rays.size(); ++r) {
    const auto& cond = dis.conditionals[r];
    for (std::size_t i = 0; i < cond.size(); ++i) out[dec.rays[r][i]] += dis.quotient_weights[r] * cond[i];
  }
  return out;
}

std::vector<double> max_atoms(const Disintegration& dis) {
  std::vector<double> out;
  out.reserve(dis.conditionals.size());
  for (const auto& cond : dis.conditionals)
    out.push_back(cond.empty() ? 0.0 : *std::max_element(cond.begin(), cond.end()));
  return out;
}

ConsistencyReport check_consistency(const RayDecomposition& dec, std::span<const double> measure,
                                    const Disintegration& dis,
                                    const std::vector<std::vector<int>>& test_sets,
                                    const std::vector<std::vector<int>>& ray_subsets) {
  const std::size_t n = dec.ray_of.size();
  ConsistencyReport report;
  std::vector<unsigned char> in_b(n), in_c(dec.rays.size());
  const std::size_t pairs = std::min(test_sets.size(), ray_subsets.size());
  for (std::size_t k = 0; k < pairs; ++k) {
    std::fill(in_b.begin(), in_b.end(), 0);
    std::fill(in_c.begin(), in_c.end(), 0);
    for (int x : test_sets[k]) in_b[x] = 1;
    for (int r : ray_subsets[k]) in_c[r] = 1;

    double lhs = 0.0;
    for (std::size_t x = 0; x < n; ++x)
      if (in_b[x] && dec.ray_of[x] >= 0 && in_c[dec.ray_of[x]]) lhs += measure[x];
    double rhs = 0.0;
    for (std::size_t r = 0; r < dec.rays.size(); ++r) {
      if (!in_c[r]) continue;
      double mq_b = 0.0;
      const auto& cond = dis.conditionals[r];
      for (std::size_t i = 0; i < cond.size(); ++i)
        if (in_b[dec.rays[r][i]]) mq_b += cond[i];
      rhs += dis.quotient_weights[r] * mq_b;
    }
    report.max_abs_error = std::max(report.max_abs_error, std::abs(lhs - rhs));
    ++report.pairs_tested;
  }
  return report;
}

ConsistencyReport check_consistency_random(const RayDecomposition& dec, std::span<const double> measure,
                                           const Disintegration& dis, std::size_t count,
                                           std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<std::vector<int>> sets(count), subsets(count);
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t x = 0; x < dec.ray_of.size(); ++x)
      if (coin(rng)) sets[k].push_back(static_cast<int>(x));
    for (std::size_t r = 0; r < dec.rays.size(); ++r)
      if (coin(rng)) subsets[k].push_back(static_cast<int>(r));
  }
  return check_consistency(dec, measure, dis, sets, subsets);
}

BalanceReport check_balance(const MMSpace& space, const RayDecomposition& dec, std::span<const double> f) {
  BalanceReport report;
  report.global_integral = global_integral(space, f);
  double weight_total = 0.0;
  double weighted = 0.0;
  for (std::size_t r = 0; r < dec.rays.size(); ++r) {
    double integral = 0.0;
    for (int p : dec.rays[r]) integral += f[p] * space.weight(p);
    const double mass = dec.ray_mass[r];
    const double conditional = mass > 0.0 ? integral / mass : 0.0;
    report.per_ray.push_back(integral);
    report.per_ray_conditional.push_back(conditional);
    report.max_abs = std::max(report.max_abs, std::abs(integral));
    report.max_abs_conditional = std::max(report.max_abs_conditional, std::abs(conditional));
    weight_total += mass;
    weighted += mass * std::abs(conditional);
  }
  report.weighted_mean = weight_total > 0.0 ? weighted / weight_total : 0.0;
  return report;
}

std::pair<std::vector<double>, std::vector<double>> balance_marginals(const MMSpace& space,
                                                                      std::span<const double> f) {
  global_integral(space, f);
  const std::size_t n = space.size();
  std::vector<double> plus(n, 0.0), minus(n, 0.0);
  double sp = 0.0, sm = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const double v = f[x] * space.weight(x);
    if (v > 0) {
      plus[x] = v;
      sp += v;
    } else if (v < 0) {
      minus[x] = -v;
      sm -= v;
    }
  }
  if (!(sp > 0.0)) fail("disint", "NotMeanZero", "f vanishes identically");
  for (auto& v : plus) v /= sp;
  for (auto& v : minus) v /= sm;
  return {plus, minus};
}

}  // namespace needle
