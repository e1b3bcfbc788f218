#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "meg/core.hpp"
#include "meg/rng.hpp"

namespace meg {

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Paired sequences (h_i, k_i) for the telescoping flooding-time bound.
/// h[0] = 1 is the lemma's h_0; k[0] reports the expansion demanded at h = 1
/// and does not enter the bound (the first interval has zero width).
struct ExpansionSchedule {
  std::vector<double> h;
  std::vector<double> k;

  void validate() const {
    if (h.size() != k.size() || h.size() < 2) throw std::invalid_argument("ExpansionSchedule: need matched h/k, size >= 2");
    if (h.front() != 1.0) throw std::invalid_argument("ExpansionSchedule: h must start at 1");
    for (size_t i = 1; i < h.size(); ++i) {
      if (h[i] <= h[i - 1]) throw std::invalid_argument("ExpansionSchedule: h must be strictly increasing");
      if (k[i] > k[i - 1]) throw std::invalid_argument("ExpansionSchedule: k must be non-increasing");
    }
    for (double kv : k)
      if (!(kv > 0.0)) throw std::invalid_argument("ExpansionSchedule: k must be positive");
  }

  /// Expansion demanded at set size hQuery (smallest scheduled h >= hQuery).
  double kAt(double hQuery) const {
    const auto it = std::lower_bound(h.begin(), h.end(), hQuery);
    if (it == h.end()) throw std::out_of_range("ExpansionSchedule: h beyond schedule");
    return k[static_cast<size_t>(it - h.begin())];
  }
};

/// Numeric value of the lemma sum: sum over i of log(h_i/h_{i-1}) / log(1+k_i).
/// The lemma's symmetric second phase doubles it; callers report 2x separately.
inline double lemmaBound(const ExpansionSchedule& schedule) {
  schedule.validate();
  double total = 0.0;
  for (size_t i = 1; i < schedule.h.size(); ++i)
    total += std::log(schedule.h[i] / schedule.h[i - 1]) / std::log1p(schedule.k[i]);
  return total;
}

/// Two-regime per-integer schedule matching stationary geometric snapshots:
/// k(h) = alpha R^2 / h up to h = alpha R^2, then beta R / sqrt(h).
inline ExpansionSchedule geometricSchedule(std::int64_t n, double R, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("geometricSchedule: alpha, beta must be positive");
  if (n < 4) throw std::invalid_argument("geometricSchedule: n too small");
  const double alphaR2 = alpha * R * R;
  const auto half = static_cast<std::int64_t>(n / 2);
  if (alphaR2 > static_cast<double>(half)) throw std::invalid_argument("geometricSchedule: alpha R^2 exceeds n/2");
  ExpansionSchedule s;
  s.h.reserve(static_cast<size_t>(half));
  s.k.reserve(static_cast<size_t>(half));
  for (std::int64_t h = 1; h <= half; ++h) {
    const double hd = static_cast<double>(h);
    s.h.push_back(hd);
    s.k.push_back(hd <= alphaR2 ? alphaR2 / hd : beta * R / std::sqrt(hd));
  }
  s.validate();
  return s;
}

/// Two-regime per-integer schedule matching stationary G(n, phat) snapshots:
/// k(h) = n phat / c up to h = 1/phat, then n / (c h).
inline ExpansionSchedule edgeSchedule(std::int64_t n, double phat, double c) {
  if (!(phat > 0.0) || phat >= 1.0) throw std::invalid_argument("edgeSchedule: need 0 < phat < 1");
  if (!(c > 0.0)) throw std::invalid_argument("edgeSchedule: c must be positive");
  if (n < 4) throw std::invalid_argument("edgeSchedule: n too small");
  const auto half = static_cast<std::int64_t>(n / 2);
  ExpansionSchedule s;
  s.h.reserve(static_cast<size_t>(half));
  s.k.reserve(static_cast<size_t>(half));
  const double nd = static_cast<double>(n);
  for (std::int64_t h = 1; h <= half; ++h) {
    const double hd = static_cast<double>(h);
    s.h.push_back(hd);
    s.k.push_back(hd <= 1.0 / phat ? nd * phat / c : nd / (c * hd));
  }
  s.validate();
  return s;
}

/// True when phat clears the schedule's validity threshold c log n / n.
inline bool edgeScheduleValidityOk(std::int64_t n, double phat, double c) {
  return phat >= c * std::log(static_cast<double>(n)) / static_cast<double>(n);
}

struct ExactExpansionResult {
  bool pass = true;
  std::optional<std::vector<NodeId>> witness;  // |W| <= h with |N(W)| < k|W|
  std::uint64_t subsetsChecked = 0;
};

namespace detail {

inline std::uint64_t subsetEnumerationCost(int n, int h, std::uint64_t cap) {
  // sum_{j<=h} C(n,j), saturating once past cap
  long double total = 0.0L;
  long double c = 1.0L;
  for (int j = 1; j <= std::min(h, n); ++j) {
    c = c * static_cast<long double>(n - j + 1) / static_cast<long double>(j);
    total += c;
    if (total > static_cast<long double>(cap) * 2.0L) return cap + 1;
  }
  return static_cast<std::uint64_t>(total);
}

}  // namespace detail

/// Exhaustive (h,k)-expander check: every I with |I| <= h must satisfy
/// |N(I)| >= k |I|. Throws BudgetExceeded when the subset count would exceed
/// the cap; expansion is not monotone in |I|, so no pruning across sizes.
inline ExactExpansionResult isExpanderExact(const Snapshot& g, double h, double k,
                                            std::uint64_t budget = 10'000'000) {
  const int n = g.n();
  const int hInt = static_cast<int>(std::min<double>(std::floor(h), n));
  if (hInt < 1) throw std::invalid_argument("isExpanderExact: h must be >= 1");
  if (detail::subsetEnumerationCost(n, hInt, budget) > budget)
    throw BudgetExceeded("isExpanderExact: subset enumeration over budget; use sampled mode");

  ExactExpansionResult result;
  std::vector<NodeId> idx;
  NodeSet members(n);
  NodeSet neighborhood(n);
  for (int size = 1; size <= hInt; ++size) {
    idx.resize(static_cast<size_t>(size));
    std::iota(idx.begin(), idx.end(), 0);
    if (idx.back() >= n) break;
    for (;;) {
      ++result.subsetsChecked;
      members = NodeSet(n);
      neighborhood = NodeSet(n);
      for (NodeId u : idx) {
        members.insert(u);
        for (NodeId v : g.neighbors(u)) neighborhood.insert(v);
      }
      neighborhood -= members;
      if (static_cast<double>(neighborhood.count()) < k * static_cast<double>(size)) {
        result.pass = false;
        result.witness = idx;
        return result;
      }
      // next combination
      int pos = size - 1;
      while (pos >= 0 && idx[static_cast<size_t>(pos)] == n - size + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<size_t>(pos)];
      for (int j = pos + 1; j < size; ++j) idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
    }
  }
  return result;
}

struct ExpansionEstimate {
  double minRatio = std::numeric_limits<double>::infinity();
  std::vector<NodeId> argmin;
  std::uint64_t samples = 0;
};

namespace detail {

constexpr std::uint64_t kEstimate = 0x657870616e642d73ULL;

inline std::vector<NodeId> uniformSubset(int n, int size, RngStream& rng, std::vector<NodeId>& scratch) {
  scratch.resize(static_cast<size_t>(n));
  std::iota(scratch.begin(), scratch.end(), 0);
  for (int i = 0; i < size; ++i) {
    const auto j = static_cast<size_t>(rng.below(static_cast<std::uint64_t>(n - i))) + static_cast<size_t>(i);
    std::swap(scratch[static_cast<size_t>(i)], scratch[j]);
  }
  return {scratch.begin(), scratch.begin() + size};
}

inline std::vector<NodeId> bfsBall(const Snapshot& g, NodeId root, int size) {
  std::vector<NodeId> out{root};
  NodeSet seen = NodeSet::single(g.n(), root);
  std::queue<NodeId> frontier;
  frontier.push(root);
  while (!frontier.empty() && static_cast<int>(out.size()) < size) {
    const NodeId u = frontier.front();
    frontier.pop();
    for (NodeId v : g.neighbors(u)) {
      if (seen.contains(v)) continue;
      seen.insert(v);
      out.push_back(v);
      frontier.push(v);
      if (static_cast<int>(out.size()) == size) break;
    }
  }
  return out;  // may be smaller than size if the component is exhausted
}

inline std::vector<NodeId> diskSet(std::span<const std::pair<double, double>> positions, NodeId center, int size) {
  std::vector<std::pair<double, NodeId>> byDist;
  byDist.reserve(positions.size());
  const auto [cx, cy] = positions[static_cast<size_t>(center)];
  for (size_t u = 0; u < positions.size(); ++u) {
    const double dx = positions[u].first - cx;
    const double dy = positions[u].second - cy;
    byDist.emplace_back(dx * dx + dy * dy, static_cast<NodeId>(u));
  }
  std::nth_element(byDist.begin(), byDist.begin() + (size - 1), byDist.end());
  std::vector<NodeId> out;
  out.reserve(static_cast<size_t>(size));
  for (int i = 0; i < size; ++i) out.push_back(byDist[static_cast<size_t>(i)].second);
  return out;
}

}  // namespace detail

/// Sampled one-sided audit: min over proposed sets of |N(I)|/|I|, an upper
/// bound on the true minimum, never a pass certificate. Set sizes are
/// stratified geometrically over [1, h]; proposals rotate through uniform
/// subsets, BFS balls, and (when positions are given) spatial disks, since
/// worst expansion sets tend to be locally clustered.
inline ExpansionEstimate expansionEstimate(const Snapshot& g, double h, std::uint64_t samples, RngStream rng,
                                           std::span<const std::pair<double, double>> positions = {}) {
  if (samples < 1) throw std::invalid_argument("expansionEstimate: samples must be >= 1");
  const int n = g.n();
  const int hInt = std::max(1, static_cast<int>(std::min<double>(std::floor(h), n)));
  std::vector<int> sizes{1};
  for (int s = 2; s <= hInt; s *= 2) sizes.push_back(s);
  if (sizes.back() != hInt) sizes.push_back(hInt);

  if (!positions.empty() && positions.size() != static_cast<size_t>(n))
    throw std::invalid_argument("expansionEstimate: positions must cover every node");
  ExpansionEstimate est;
  std::vector<NodeId> scratch;
  const int strategies = positions.empty() ? 2 : 3;
  for (std::uint64_t it = 0; it < samples; ++it) {
    RngStream s = rng.derive(detail::kEstimate, it);
    const int size = sizes[static_cast<size_t>(it % sizes.size())];
    std::vector<NodeId> proposal;
    switch (it % static_cast<std::uint64_t>(strategies)) {
      case 0:
        proposal = detail::uniformSubset(n, size, s, scratch);
        break;
      case 1:
        proposal = detail::bfsBall(g, static_cast<NodeId>(s.below(static_cast<std::uint64_t>(n))), size);
        break;
      default:
        proposal = detail::diskSet(positions, static_cast<NodeId>(s.below(static_cast<std::uint64_t>(n))), size);
        break;
    }
    if (proposal.empty()) continue;
    NodeSet members(n);
    for (NodeId u : proposal) members.insert(u);
    const NodeSet nb = neighborsOfSet(g, members);
    const double ratio = static_cast<double>(nb.count()) / static_cast<double>(members.count());
    ++est.samples;
    if (ratio < est.minRatio) {
      est.minRatio = ratio;
      est.argmin = members.toVector();
    }
  }
  return est;
}

/// One audited (h, k) point. Exact mode yields pass or fail-with-witness;
/// sampled mode yields an estimate, downgraded to fail when the sampled set
/// itself violates the bound (the witness is then exact).
struct ExpansionAuditItem {
  std::string mode;  // "exact" | "sampled"
  double h = 0.0;
  double k = 0.0;
  std::string verdict;  // "pass" | "fail" | "estimate"
  std::optional<std::vector<NodeId>> witness;
  double minRatio = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t samples = 0;
};

struct ExpansionReport {
  std::string mode;
  std::vector<ExpansionAuditItem> items;
};

/// Audit of a single explicit (h, k) pair.
inline ExpansionAuditItem auditPoint(const Snapshot& g, double h, double k, bool exact,
                                     std::uint64_t samples, RngStream rng,
                                     std::span<const std::pair<double, double>> positions = {},
                                     std::uint64_t budget = 10'000'000) {
  ExpansionAuditItem item;
  item.mode = exact ? "exact" : "sampled";
  item.h = h;
  item.k = k;
  if (exact) {
    const auto res = isExpanderExact(g, h, k, budget);
    item.verdict = res.pass ? "pass" : "fail";
    if (!res.pass) {
      item.witness = res.witness;
      NodeSet w(g.n());
      for (NodeId u : *res.witness) w.insert(u);
      item.minRatio = static_cast<double>(neighborsOfSet(g, w).count()) / static_cast<double>(w.count());
    }
  } else {
    const auto est = expansionEstimate(g, h, samples, rng, positions);
    item.minRatio = est.minRatio;
    item.samples = est.samples;
    if (est.minRatio < k) {
      item.verdict = "fail";
      item.witness = est.argmin;
    } else {
      item.verdict = "estimate";
    }
  }
  return item;
}

/// Audit h values for a schedule: powers of two plus the last point.
inline std::vector<std::int64_t> defaultAuditSizes(std::int64_t half) {
  std::vector<std::int64_t> hs;
  for (std::int64_t h = 1; h <= half; h *= 2) hs.push_back(h);
  if (hs.back() != half) hs.push_back(half);
  return hs;
}

inline ExpansionReport auditSchedule(const Snapshot& g, const ExpansionSchedule& schedule, bool exact,
                                     std::uint64_t samplesPerPoint, RngStream rng,
                                     std::span<const std::pair<double, double>> positions = {},
                                     std::uint64_t budget = 10'000'000) {
  ExpansionReport report;
  report.mode = exact ? "exact" : "sampled";
  for (std::int64_t h : defaultAuditSizes(static_cast<std::int64_t>(schedule.h.back()))) {
    const double hd = static_cast<double>(h);
    report.items.push_back(auditPoint(g, hd, schedule.kAt(hd), exact, samplesPerPoint,
                                      rng.derive(static_cast<std::uint64_t>(h)), positions, budget));
  }
  return report;
}

inline bool scheduleAuditPasses(const ExpansionReport& report) {
  return std::none_of(report.items.begin(), report.items.end(),
                      [](const ExpansionAuditItem& i) { return i.verdict == "fail"; });
}

/// Largest scale s such that the geometric schedule with alpha = beta = s
/// passes a sampled audit of the snapshot. The demanded expansion grows with
/// s, so passing is monotone and bisection applies.
inline double autoFitGeometricScale(const Snapshot& g, double R, std::uint64_t samples, RngStream rng,
                                    std::span<const std::pair<double, double>> positions = {}) {
  const auto n = static_cast<std::int64_t>(g.n());
  auto passes = [&](double s) {
    try {
      const auto sched = geometricSchedule(n, R, s, s);
      return scheduleAuditPasses(auditSchedule(g, sched, false, samples, rng, positions));
    } catch (const std::invalid_argument&) {
      return false;  // s pushed alpha R^2 past n/2
    }
  };
  double hi = std::min(1.0, static_cast<double>(n / 2) / (R * R));
  double lo = 1e-6 * hi;
  if (!passes(lo)) return 0.0;
  if (passes(hi)) return hi;
  for (int i = 0; i < 40; ++i) {
    const double mid = (lo + hi) / 2.0;
    (passes(mid) ? lo : hi) = mid;
  }
  return lo;
}

/// Smallest constant c such that the edge schedule passes a sampled audit of
/// the snapshot (the demanded expansion shrinks with c).
inline double autoFitEdgeConstant(const Snapshot& g, double phat, std::uint64_t samples, RngStream rng) {
  const auto n = static_cast<std::int64_t>(g.n());
  auto passes = [&](double c) {
    return scheduleAuditPasses(auditSchedule(g, edgeSchedule(n, phat, c), false, samples, rng));
  };
  double lo = 0.25, hi = 1024.0;
  if (passes(lo)) return lo;
  if (!passes(hi)) return std::numeric_limits<double>::infinity();
  for (int i = 0; i < 40; ++i) {
    const double mid = (lo + hi) / 2.0;
    (passes(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace meg
