#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "meg/core.hpp"
#include "meg/geometric.hpp"

namespace meg {

/// Outcome of one flooding run. trajectory[t] = m_t, the informed count after
/// step t (m_0 = 1). maxDegrees[t-1] is the max degree of the snapshot used
/// at step t, or -1 when the model does not track it.
struct FloodResult {
  NodeId source = 0;
  std::vector<std::int64_t> trajectory;
  std::optional<std::int64_t> completionTime;
  std::int64_t stepsSimulated = 0;
  std::vector<int> maxDegrees;

  bool completed() const { return completionTime.has_value(); }
};

/// The flooding recursion I_{t+1} = I_t u N(I_t): each tick advances the
/// model to G_{t+1} and evaluates N(I_t) on that snapshot. onStep, when set,
/// observes the model right after each advance (trace dumps hook in here).
inline FloodResult floodOnce(EvolvingGraph& model, NodeId source, std::int64_t maxSteps,
                             const std::function<void(EvolvingGraph&)>& onStep = {}) {
  const int n = model.n();
  if (source < 0 || source >= n) throw std::invalid_argument("floodOnce: source out of range");
  if (maxSteps < 1) throw std::invalid_argument("floodOnce: maxSteps must be >= 1");

  FloodResult result;
  result.source = source;
  NodeSet informed = NodeSet::single(n, source);
  std::int64_t count = 1;
  result.trajectory.push_back(count);
  if (n == 1) {
    result.completionTime = 0;
    return result;
  }
  for (std::int64_t t = 1; t <= maxSteps; ++t) {
    model.step();
    if (onStep) onStep(model);
    const NodeSet fresh = model.frontierNeighbors(informed);
    informed |= fresh;
    count += fresh.count();
    result.trajectory.push_back(count);
    result.maxDegrees.push_back(model.maxDegreeHint());
    result.stepsSimulated = t;
    if (count == n) {
      result.completionTime = t;
      break;
    }
  }
  return result;
}

enum class SourcePolicy { RandomOne, All, FixedList };

struct FloodRun {
  std::uint64_t seed;
  NodeId source;
  std::optional<std::int64_t> completionTime;
};

/// Flooding times over (seed, source) combinations. The flooding time of the
/// process proper is the max over sources; median/quantiles describe the
/// single-source behavior.
struct FloodingTimeStats {
  std::vector<FloodRun> runs;
  bool allCompleted = true;

  std::int64_t maxT() const {
    std::int64_t best = 0;
    for (const auto& r : runs)
      if (r.completionTime) best = std::max(best, *r.completionTime);
    return best;
  }

  double quantileT(double q) const {
    std::vector<double> ts;
    for (const auto& r : runs)
      if (r.completionTime) ts.push_back(static_cast<double>(*r.completionTime));
    if (ts.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(ts.begin(), ts.end());
    const double pos = q * (static_cast<double>(ts.size()) - 1.0);
    const auto lo = static_cast<size_t>(std::floor(pos));
    const auto hi = static_cast<size_t>(std::ceil(pos));
    return ts[lo] + (pos - static_cast<double>(lo)) * (ts[hi] - ts[lo]);
  }

  double medianT() const { return quantileT(0.5); }
};

namespace detail {
constexpr std::uint64_t kSourcePick = 0x736f757263652d31ULL;
}

/// Runs floodOnce on a fresh stationary model per (seed, source).
inline FloodingTimeStats floodingTime(const std::function<std::unique_ptr<EvolvingGraph>(std::uint64_t)>& factory,
                                      SourcePolicy policy, std::span<const NodeId> fixedSources,
                                      std::span<const std::uint64_t> seeds, std::int64_t maxSteps) {
  FloodingTimeStats stats;
  if (seeds.empty()) return stats;
  const int n = factory(seeds.front())->n();
  for (std::uint64_t seed : seeds) {
    std::vector<NodeId> sources;
    switch (policy) {
      case SourcePolicy::RandomOne: {
        RngStream pick = RngStream(seed).derive(detail::kSourcePick);
        sources.push_back(static_cast<NodeId>(pick.below(static_cast<std::uint64_t>(n))));
        break;
      }
      case SourcePolicy::All:
        sources.resize(static_cast<size_t>(n));
        for (int u = 0; u < n; ++u) sources[static_cast<size_t>(u)] = u;
        break;
      case SourcePolicy::FixedList:
        sources.assign(fixedSources.begin(), fixedSources.end());
        break;
    }
    for (NodeId s : sources) {
      auto model = factory(seed);
      const FloodResult r = floodOnce(*model, s, maxSteps);
      stats.runs.push_back({seed, s, r.completionTime});
      if (!r.completed()) stats.allCompleted = false;
    }
  }
  return stats;
}

/// Deterministic per-run lower bound from the distance argument: an informed
/// front advances at most R + r per step while the farthest node retreats at
/// most r, so T >= ceil(d0 / (R + 2r)) where d0 is the farthest initial
/// distance from the source.
inline std::int64_t geometricLowerCertificate(const GeometricState& initial, NodeId source, double R, double r) {
  const auto& pos = initial.positions;
  if (source < 0 || static_cast<size_t>(source) >= pos.size())
    throw std::invalid_argument("geometricLowerCertificate: source out of range");
  const LatticePoint s = pos[static_cast<size_t>(source)];
  std::int64_t worst = 0;
  for (const LatticePoint& x : pos) {
    const std::int64_t di = x.i - s.i;
    const std::int64_t dj = x.j - s.j;
    worst = std::max(worst, di * di + dj * dj);
  }
  const double d0 = std::sqrt(static_cast<double>(worst)) * initial.params.eps;
  if (d0 == 0.0) return 0;
  const double ratio = d0 / (R + 2.0 * r);
  return static_cast<std::int64_t>(std::ceil(ratio * (1.0 - 1e-12)));
}

/// Deterministic identity m_{t+1} <= m_t * (1 + Delta_{t+1}): every informed
/// node informs at most Delta neighbors. Steps with unknown max degree (-1)
/// are skipped.
inline bool degreeLowerCertificate(std::span<const std::int64_t> trajectory, std::span<const int> maxDegrees) {
  if (trajectory.size() < 2) return true;
  if (maxDegrees.size() + 1 < trajectory.size())
    throw std::invalid_argument("degreeLowerCertificate: maxDegrees shorter than trajectory steps");
  for (size_t t = 0; t + 1 < trajectory.size(); ++t) {
    const int d = maxDegrees[t];
    if (d < 0) continue;
    if (trajectory[t + 1] > trajectory[t] * (1 + static_cast<std::int64_t>(d))) return false;
  }
  return true;
}

inline bool degreeLowerCertificate(const FloodResult& r) {
  return degreeLowerCertificate(r.trajectory, r.maxDegrees);
}

}  // namespace meg
