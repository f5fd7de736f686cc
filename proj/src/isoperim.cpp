#include "needle/isoperim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "needle/errors.hpp"
#include "needle/parallel.hpp"
#include "needle/w1solve.hpp"

namespace needle {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 10-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr std::array<double, 5> kGLNodes{0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                          0.8650633666889845, 0.9739065285171717};
constexpr std::array<double, 5> kGLWeights{0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                            0.1494513491505806, 0.0666713443086881};

constexpr int kSupportSamples = 2048;
constexpr int kPanels = 64;
constexpr int kPhaseGrid = 720;

template <typename F>
double gauss_legendre(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < kGLNodes.size(); ++i)
    sum += kGLWeights[i] * (f(mid - half * kGLNodes[i]) + f(mid + half * kGLNodes[i]));
  return sum * half;
}

// One member J_alpha of the shifted ODE family on [0, D].
struct Family {
  double K = 0.0;
  double N = 2.0;
  double D = 1.0;
  double k = 0.0;

  double J(double alpha, double t) const {
    const double c = std::cos(alpha), s = std::sin(alpha);
    if (K > 0.0) return c * std::cos(k * t) + s * std::sin(k * t);
    if (K < 0.0) {
      const double u = k * (t - 0.5 * D);
      return c * std::cosh(u) + s * std::sinh(u);
    }
    return c + s * t / D;
  }

  double h(double alpha, double t) const {
    const double j = J(alpha, t);
    return j > 0.0 ? std::pow(j, N - 1.0) : 0.0;
  }
};

struct MemberEval {
  double content = kInf;
  HalfLine side = HalfLine::kLower;
  double r = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

double refine_root(const Family& fam, double alpha, double neg, double pos) {
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (neg + pos);
    (fam.J(alpha, mid) > 0.0 ? pos : neg) = mid;
  }
  return pos;
}

MemberEval evaluate_member(const Family& fam, double alpha, double v) {
  MemberEval out;
  int first = -1, last = -1;
  for (int i = 0; i <= kSupportSamples; ++i) {
    const double t = fam.D * i / kSupportSamples;
    if (fam.J(alpha, t) > 0.0) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0 || first == last) return out;
  const double step = fam.D / kSupportSamples;
  out.lo = first == 0 ? 0.0 : refine_root(fam, alpha, (first - 1) * step, first * step);
  out.hi = last == kSupportSamples ? fam.D : refine_root(fam, alpha, (last + 1) * step, last * step);

  const auto h = [&](double t) { return fam.h(alpha, t); };
  const double width = (out.hi - out.lo) / kPanels;
  std::array<double, kPanels + 1> cum{};
  for (int p = 0; p < kPanels; ++p)
    cum[p + 1] = cum[p] + gauss_legendre(h, out.lo + p * width, out.lo + (p + 1) * width);
  const double total = cum[kPanels];
  if (!(total > 0.0)) return out;

  // Cut point r with mass(lo, r) = target.
  auto cut = [&](double target) {
    int p = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin()) - 1;
    p = std::clamp(p, 0, kPanels - 1);
    double a = out.lo + p * width, b = a + width;
    const double start = a, need = target - cum[p];
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (a + b);
      (gauss_legendre(h, start, mid) < need ? a : b) = mid;
    }
    return 0.5 * (a + b);
  };
  const double r_lower = cut(v * total);
  const double r_upper = cut((1.0 - v) * total);
  const double c_lower = h(r_lower) / total;
  const double c_upper = h(r_upper) / total;
  if (c_lower <= c_upper) {
    out.content = c_lower;
    out.side = HalfLine::kLower;
    out.r = r_lower;
  } else {
    out.content = c_upper;
    out.side = HalfLine::kUpper;
    out.r = r_upper;
  }
  return out;
}

double golden_section(const Family& fam, double v, double a, double b, double& best_alpha) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = evaluate_member(fam, x1, v).content, f2 = evaluate_member(fam, x2, v).content;
  for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = evaluate_member(fam, x1, v).content;
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = evaluate_member(fam, x2, v).content;
    }
  }
  best_alpha = f1 <= f2 ? x1 : x2;
  return std::min(f1, f2);
}

Family make_family(const ModelProfileSpec& spec) {
  Family fam;
  fam.K = spec.K;
  fam.N = spec.N;
  fam.k = std::sqrt(std::abs(spec.K) / (spec.N - 1.0));
  fam.D = spec.D;
  if (spec.K > 0.0) fam.D = std::min(spec.D, std::numbers::pi / fam.k);
  return fam;
}

void validate(const ModelProfileSpec& spec, double v) {
  if (!(v >= 0.0 && v <= 1.0)) fail("isoperim", "BadVolume", "volume must lie in [0, 1]");
  if (!(spec.N >= 1.0) || !std::isfinite(spec.N)) fail("isoperim", "BadDimension", "N must be finite and >= 1");
  if (!(spec.D > 0.0)) fail("isoperim", "BadDiameter", "D must be positive");
  if (!std::isfinite(spec.K)) fail("isoperim", "BadCurvature", "K must be finite");
}

// Distances from every point to the set; 0 inside it.
std::vector<double> distance_to_set(const MMSpace& space, std::span<const unsigned char> in_set) {
  const std::size_t n = space.size();
  std::vector<int> members;
  for (std::size_t x = 0; x < n; ++x)
    if (in_set[x]) members.push_back(static_cast<int>(x));
  std::vector<double> dist(n, members.empty() ? kInf : 0.0);
  if (members.empty()) return dist;
  for (std::size_t x = 0; x < n; ++x) {
    if (in_set[x]) continue;
    const auto row = space.row(x);
    double best = kInf;
    for (int y : members) best = std::min(best, row[y]);
    dist[x] = best;
  }
  return dist;
}

void validate_eps(const MMSpace& space, std::span<const double> eps) {
  if (eps.empty()) fail("isoperim", "BadEpsilon", "need at least one radius");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !std::isfinite(eps[i])) fail("isoperim", "BadEpsilon", "radii must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) fail("isoperim", "BadEpsilon", "radii must be strictly decreasing");
  }
  if (eps.back() < 2.0 * space.mesh()) {
    fail("isoperim", "MeshTooCoarse",
         "smallest radius " + std::to_string(eps.back()) + " is below twice the mesh " + std::to_string(space.mesh()));
  }
}

MinkowskiEstimate minkowski_unchecked(const MMSpace& space, std::span<const unsigned char> in_set,
                                      std::span<const double> eps) {
  MinkowskiEstimate est;
  const auto dist = distance_to_set(space, in_set);
  for (std::size_t x = 0; x < space.size(); ++x)
    if (in_set[x]) est.set_mass += space.weight(x);
  est.eps.assign(eps.begin(), eps.end());
  for (double e : eps) {
    const double reach = e * (1.0 + 1e-9);
    double grown = 0.0;
    for (std::size_t x = 0; x < space.size(); ++x)
      if (!in_set[x] && dist[x] <= reach) grown += space.weight(x);
    est.quotients.push_back(grown / e);
  }
  // Richardson step against q(eps) = L + a / eps: the slope of the growth
  // g(eps) = eps q(eps) removes the offset a left by the gap between the
  // outermost points of A and its boundary.
  if (eps.size() == 1) {
    est.content = est.quotients[0];
    return est;
  }
  const double m = static_cast<double>(eps.size());
  double me = 0.0, mg = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    me += est.eps[i] / m;
    mg += est.eps[i] * est.quotients[i] / m;
  }
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    cov += (est.eps[i] - me) * (est.eps[i] * est.quotients[i] - mg);
    var += (est.eps[i] - me) * (est.eps[i] - me);
  }
  est.content = std::max(0.0, cov / var);
  return est;
}

std::vector<int> sorted_order(const std::vector<double>& key) {
  std::vector<int> order(key.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return key[a] != key[b] ? key[a] < key[b] : a < b; });
  return order;
}

}  // namespace

double model_family_content(const ModelProfileSpec& spec, double alpha, double v) {
  validate(spec, v);
  if (spec.N == 1.0 || !std::isfinite(spec.D)) return model_profile(spec, v);
  if (v == 0.0 || v == 1.0) return 0.0;
  return evaluate_member(make_family(spec), alpha, v).content;
}

ModelProfileResult model_profile_detail(const ModelProfileSpec& spec, double v) {
  validate(spec, v);
  ModelProfileResult res;
  res.D_used = spec.D;
  if (spec.N == 1.0) {
    // Constant densities only: uniform on [0, D].
    res.support_hi = spec.D;
    res.unbounded = !std::isfinite(spec.D);
    res.value = (v == 0.0 || v == 1.0 || res.unbounded) ? 0.0 : 1.0 / spec.D;
    res.r = res.unbounded ? 0.0 : v * spec.D;
    return res;
  }
  if (spec.K <= 0.0 && !std::isfinite(spec.D)) {
    res.unbounded = true;
    return res;
  }
  const Family fam = make_family(spec);
  res.D_used = fam.D;
  res.support_hi = fam.D;
  if (v == 0.0 || v == 1.0) return res;

  std::vector<double> grid(kPhaseGrid);
  parallel_shards(kPhaseGrid, [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) grid[i] = evaluate_member(fam, kTwoPi * i / kPhaseGrid, v).content;
  });
  // Refine around the best few local minima of the phase grid.
  std::vector<int> minima;
  for (int i = 0; i < kPhaseGrid; ++i) {
    const double f = grid[i];
    if (f <= grid[(i + kPhaseGrid - 1) % kPhaseGrid] && f <= grid[(i + 1) % kPhaseGrid] && std::isfinite(f))
      minima.push_back(i);
  }
  std::sort(minima.begin(), minima.end(), [&](int a, int b) { return grid[a] != grid[b] ? grid[a] < grid[b] : a < b; });
  if (minima.size() > 4) minima.resize(4);
  double best = kInf, best_alpha = 0.0;
  for (int i : minima) {
    double alpha = 0.0;
    const double step = kTwoPi / kPhaseGrid;
    double f = golden_section(fam, v, (i - 1) * step, (i + 1) * step, alpha);
    // Keep the grid phase unless refinement gains more than rounding; the
    // content is flat to second order around symmetric minimizers.
    if (grid[i] <= f + 1e-14 * std::abs(f)) {
      f = grid[i];
      alpha = i * step;
    }
    if (f < best) {
      best = f;
      best_alpha = alpha;
    }
  }
  if (!std::isfinite(best)) fail("isoperim", "NoModelDensity", "no member of the model family is positive on [0, D]");

  const auto m = evaluate_member(fam, best_alpha, v);
  res.value = m.content;
  res.alpha = std::fmod(best_alpha + kTwoPi, kTwoPi);
  res.side = m.side;
  res.r = m.r;
  res.support_lo = m.lo;
  res.support_hi = m.hi;
  res.smooth = m.lo <= 1e-9 * fam.D && m.hi >= fam.D * (1.0 - 1e-9);
  return res;
}

double model_profile(const ModelProfileSpec& spec, double v) { return model_profile_detail(spec, v).value; }

MinkowskiEstimate minkowski_content(const MMSpace& space, std::span<const unsigned char> in_set,
                                    std::span<const double> eps_list) {
  if (in_set.size() != space.size()) fail("isoperim", "BadSet", "indicator length differs from the space size");
  validate_eps(space, eps_list);
  return minkowski_unchecked(space, in_set, eps_list);
}

std::vector<double> default_eps_list(const MMSpace& space) {
  const double m = space.mesh();
  return {6.0 * m, 4.0 * m, 2.0 * m};
}

std::vector<ProfileCandidate> profile_candidates(const MMSpace& space, std::size_t budget, std::uint64_t seed) {
  const std::size_t n = space.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
  const std::size_t solves = n >= 2 ? budget / 8 : 0;
  const std::size_t balls = budget - 2 * solves;
  std::vector<ProfileCandidate> out;

  for (std::size_t b = 0; b < balls; ++b) {
    const int base = pick(rng);
    const auto row = space.row(base);
    out.push_back({"ball", base, sorted_order(std::vector<double>(row.begin(), row.end()))});
  }
  for (std::size_t k = 0; k < solves; ++k) {
    const int p = pick(rng);
    int q = pick(rng);
    while (q == p) q = pick(rng);
    // f = m|P / m(P) - m|Q / m(Q) over the Voronoi cells of p and q.
    std::vector<double> mu0(n, 0.0), mu1(n, 0.0);
    for (std::size_t x = 0; x < n; ++x) (space.distance(x, p) <= space.distance(x, q) ? mu0 : mu1)[x] = space.weight(x);
    const double s0 = std::accumulate(mu0.begin(), mu0.end(), 0.0);
    const double s1 = std::accumulate(mu1.begin(), mu1.end(), 0.0);
    for (auto& w : mu0) w /= s0;
    for (auto& w : mu1) w /= s1;
    const auto sol = solve_w1(space, mu0, mu1);
    std::vector<double> neg(sol.potential.size());
    for (std::size_t x = 0; x < n; ++x) neg[x] = -sol.potential[x];
    out.push_back({"potential", p, sorted_order(sol.potential)});
    out.push_back({"potential-upper", p, sorted_order(neg)});
  }
  return out;
}

ProfilePoint empirical_profile(const MMSpace& space, std::span<const ProfileCandidate> candidates, double v,
                               std::span<const double> eps_list) {
  if (!(v > 0.0 && v < 1.0)) fail("isoperim", "BadVolume", "empirical profile needs 0 < v < 1");
  if (candidates.empty()) fail("isoperim", "NoCandidates", "candidate budget is zero");
  if (space.size() < 2) fail("isoperim", "BadSet", "need at least two points");
  std::vector<double> eps(eps_list.begin(), eps_list.end());
  if (eps.empty()) eps = default_eps_list(space);
  validate_eps(space, eps);

  const std::size_t n = space.size();
  std::vector<ProfilePoint> points(candidates.size());
  parallel_shards(candidates.size(), [&](int, std::size_t begin, std::size_t end) {
    std::vector<unsigned char> in_set(n);
    for (std::size_t c = begin; c < end; ++c) {
      const auto& order = candidates[c].order;
      // Prefix of 1..n-1 points whose mass is nearest v.
      double cum = 0.0, best_gap = kInf, best_mass = 0.0;
      std::size_t best_k = 1;
      for (std::size_t k = 1; k < n; ++k) {
        cum += space.weight(order[k - 1]);
        const double gap = std::abs(cum - v);
        if (gap < best_gap) {
          best_gap = gap;
          best_k = k;
          best_mass = cum;
        }
      }
      std::fill(in_set.begin(), in_set.end(), 0);
      for (std::size_t k = 0; k < best_k; ++k) in_set[order[k]] = 1;
      auto& pt = points[c];
      pt.v = v;
      pt.attained = best_mass;
      pt.mass_defect = best_gap;
      pt.content = minkowski_unchecked(space, in_set, eps).content;
      pt.kind = candidates[c].kind;
      pt.base = candidates[c].base;
      pt.set_size = best_k;
    }
  });
  std::size_t best = 0;
  for (std::size_t c = 1; c < points.size(); ++c)
    if (points[c].content < points[best].content) best = c;
  return points[best];
}

ProfilePoint empirical_profile(const MMSpace& space, double v, std::size_t budget, std::uint64_t seed) {
  const auto candidates = profile_candidates(space, budget, seed);
  return empirical_profile(space, candidates, v);
}

LevyGromovReport levy_gromov_check(const MMSpace& space, double K, double N, std::span<const double> v_grid,
                                   std::size_t budget, std::uint64_t seed) {
  LevyGromovReport report;
  report.K = K;
  report.N = N;
  report.D_used = space.max_distance();
  report.mesh = space.mesh();
  const ModelProfileSpec spec{K, N, report.D_used};
  std::vector<ProfileCandidate> candidates;
  for (double v : v_grid) {
    if (!(v >= 0.0 && v <= 1.0)) fail("isoperim", "BadVolume", "volume must lie in [0, 1]");
    LevyGromovRow row;
    row.v = v;
    row.attained = v;
    if (v > 0.0 && v < 1.0) {
      if (candidates.empty()) candidates = profile_candidates(space, budget, seed);
      const auto pt = empirical_profile(space, candidates, v);
      row.attained = pt.attained;
      row.empirical = pt.content;
      row.kind = pt.kind;
    }
    row.model = model_profile(spec, row.attained);
    row.slack = row.empirical - row.model;
    row.allowance = kLevyGromovAllowance;
    if (row.model > 0.0) {
      row.allowance = std::max(kLevyGromovAllowance, 4.0 * report.mesh / row.model);
      row.relative_slack = row.slack / row.model;
      row.pass = row.relative_slack >= -row.allowance;
    } else {
      row.pass = row.slack >= 0.0;
    }
    report.pass = report.pass && row.pass;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace needle
