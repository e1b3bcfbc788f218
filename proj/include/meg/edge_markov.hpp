#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "meg/core.hpp"
#include "meg/rng.hpp"

namespace meg {

struct EdgeParams {
  int n = 0;
  double p = 0.0;  // birth-rate (off -> on)
  double q = 0.0;  // death-rate (on -> off)

  double phat() const { return p / (p + q); }

  void validate() const {
    if (n < 2) throw std::invalid_argument("EdgeParams: n must be >= 2");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("EdgeParams: need 0 < p < 1");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("EdgeParams: need 0 < q < 1");
  }
};

inline std::int64_t pairCount(std::int64_t n) { return n * (n - 1) / 2; }

/// Canonical key of an unordered pair, u < v.
inline std::uint64_t pairKey(std::int64_t n, NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return static_cast<std::uint64_t>(u) * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(v);
}

/// Inverse of the lexicographic pair index: index m in [0, C(n,2)) -> (u, v)
/// with u < v, ordered by u then v.
inline std::pair<NodeId, NodeId> pairFromIndex(std::int64_t n, std::int64_t m) {
  if (m < 0 || m >= pairCount(n)) throw std::out_of_range("pairFromIndex: index out of range");
  // pairs before row u: S(u) = u*(n-1) - u*(u-1)/2; invert the quadratic, then fix up
  const double nd = static_cast<double>(n);
  auto u = static_cast<std::int64_t>(std::floor(((2.0 * nd - 1.0) - std::sqrt((2.0 * nd - 1.0) * (2.0 * nd - 1.0) - 8.0 * static_cast<double>(m))) / 2.0));
  u = std::max<std::int64_t>(0, std::min<std::int64_t>(u, n - 2));
  auto rowStart = [n](std::int64_t x) { return x * (n - 1) - x * (x - 1) / 2; };
  while (u > 0 && rowStart(u) > m) --u;
  while (u < n - 2 && rowStart(u + 1) <= m) ++u;
  const std::int64_t v = u + 1 + (m - rowStart(u));
  return {static_cast<NodeId>(u), static_cast<NodeId>(v)};
}

/// k-step law of the two-state edge chain with transition matrix
/// [[1-p, p], [q, 1-q]]: closed form through the second eigenvalue 1-p-q.
struct KStepLaw {
  double p, q;
  std::int64_t k;
  double decay;    // (1-p-q)^k
  double onToOn;   // phat + (1-phat) * decay
  double offToOn;  // phat * (1 - decay)

  KStepLaw(double p_, double q_, std::int64_t k_) : p(p_), q(q_), k(k_) {
    if (!(p > 0.0 && p < 1.0) || !(q > 0.0 && q < 1.0))
      throw std::invalid_argument("KStepLaw: need 0 < p,q < 1");
    if (k < 0) throw std::invalid_argument("KStepLaw: k must be >= 0");
    const double phat = p / (p + q);
    decay = std::pow(1.0 - p - q, static_cast<double>(k));
    onToOn = phat + (1.0 - phat) * decay;
    offToOn = phat * (1.0 - decay);
  }
};

/// Probability the edge is on after k steps given the start state.
inline double kStepEdgeProbability(double p, double q, std::int64_t k, bool startOn) {
  const KStepLaw law(p, q, k);
  return startOn ? law.onToOn : law.offToOn;
}

/// Birth/death event, b = 1 birth, b = 0 death. t = 0 carries the initial
/// stationary edges as births so a trace replays to the full edge sequence.
struct EdgeTraceEvent {
  std::int64_t t;
  NodeId u, v;
  int b;
};

inline void writeEdgeTrace(const std::vector<EdgeTraceEvent>& events, std::ostream& os) {
  for (const auto& e : events) os << e.t << ' ' << e.u << ' ' << e.v << ' ' << e.b << '\n';
}

namespace detail {
constexpr std::uint64_t kEdgeInit = 0x656467652d696e69ULL;
constexpr std::uint64_t kEdgeDeath = 0x656467652d646965ULL;
constexpr std::uint64_t kEdgeBirth = 0x656467652d626f72ULL;
constexpr std::uint64_t kEdgeLazy = 0x656467652d6c617aULL;
}  // namespace detail

/// Dense edge-MEG: materializes the alive edge set, steps all C(n,2) chains
/// per tick with binomial death/birth counts.
class DenseEdgeModel final : public EvolvingGraph {
 public:
  DenseEdgeModel(const EdgeParams& params, std::uint64_t seed, bool recordTrace = false)
      : params_(params), rng_(seed), recordTrace_(recordTrace) {
    params_.validate();
    sampleStationary();
    rebuildSnapshot();
  }

  int n() const override { return params_.n; }
  std::int64_t time() const override { return t_; }

  void step() override {
    RngStream deaths = rng_.derive(detail::kEdgeDeath, static_cast<std::uint64_t>(t_ + 1));
    RngStream births = rng_.derive(detail::kEdgeBirth, static_cast<std::uint64_t>(t_ + 1));
    ++t_;

    const std::int64_t total = pairCount(params_.n);
    const auto aliveBefore = static_cast<std::int64_t>(aliveVec_.size());
    const std::int64_t absentBefore = total - aliveBefore;

    // deaths: binomial count over edges alive at t, then that many distinct
    // victims; a victim stays off this step (births act on absent-at-t pairs)
    const std::int64_t dying = deaths.binomial(aliveBefore, params_.q);
    std::unordered_set<std::uint64_t> diedNow;
    diedNow.reserve(static_cast<size_t>(dying) * 2);
    for (std::int64_t i = 0; i < dying; ++i) {
      const auto last = aliveVec_.size() - 1 - static_cast<size_t>(i);
      const auto pick = static_cast<size_t>(deaths.below(last + 1));
      std::swap(aliveVec_[pick], aliveVec_[last]);
    }
    for (std::int64_t i = 0; i < dying; ++i) {
      const std::uint64_t key = aliveVec_.back();
      aliveVec_.pop_back();
      aliveSet_.erase(key);
      diedNow.insert(key);
      if (recordTrace_) pushEvent(key, 0);
    }

    // births: binomial count over the pairs absent at t, placed on distinct
    // uniform such pairs (rejection while sparse, complement enumeration when
    // dense)
    const std::int64_t born = births.binomial(absentBefore, params_.p);
    auto wasPresentAtT = [&](std::uint64_t key) { return aliveSet_.contains(key) || diedNow.contains(key); };
    if (static_cast<double>(aliveBefore) <= 0.5 * static_cast<double>(total)) {
      for (std::int64_t i = 0; i < born; ++i) {
        for (;;) {
          const auto idx = static_cast<std::int64_t>(births.below(static_cast<std::uint64_t>(total)));
          auto [u, v] = pairFromIndex(params_.n, idx);
          const std::uint64_t key = pairKey(params_.n, u, v);
          if (wasPresentAtT(key)) continue;
          if (aliveSet_.insert(key).second) {
            aliveVec_.push_back(key);
            if (recordTrace_) pushEvent(key, 1);
            break;
          }
        }
      }
    } else {
      std::vector<std::uint64_t> absentKeys;
      absentKeys.reserve(static_cast<size_t>(absentBefore));
      for (std::int64_t idx = 0; idx < total; ++idx) {
        auto [u, v] = pairFromIndex(params_.n, idx);
        const std::uint64_t key = pairKey(params_.n, u, v);
        if (!wasPresentAtT(key)) absentKeys.push_back(key);
      }
      for (std::int64_t i = 0; i < born; ++i) {
        const auto last = absentKeys.size() - 1 - static_cast<size_t>(i);
        const auto pick = static_cast<size_t>(births.below(last + 1));
        std::swap(absentKeys[pick], absentKeys[last]);
        const std::uint64_t key = absentKeys[last];
        aliveSet_.insert(key);
        aliveVec_.push_back(key);
        if (recordTrace_) pushEvent(key, 1);
      }
    }
    rebuildSnapshot();
  }

  const Snapshot& currentSnapshot() override { return snapshot_; }

  std::int64_t aliveCount() const { return static_cast<std::int64_t>(aliveVec_.size()); }
  double density() const { return static_cast<double>(aliveVec_.size()) / static_cast<double>(pairCount(params_.n)); }
  const std::vector<EdgeTraceEvent>& trace() const { return trace_; }
  const EdgeParams& params() const { return params_; }

 private:
  void sampleStationary() {
    const std::int64_t total = pairCount(params_.n);
    RngStream init = rng_.derive(detail::kEdgeInit);
    const std::int64_t count = init.binomial(total, params_.phat());
    aliveSet_.reserve(static_cast<size_t>(count) * 2);
    if (count <= total / 2) {
      while (static_cast<std::int64_t>(aliveVec_.size()) < count) {
        const auto idx = static_cast<std::int64_t>(init.below(static_cast<std::uint64_t>(total)));
        auto [u, v] = pairFromIndex(params_.n, idx);
        const std::uint64_t key = pairKey(params_.n, u, v);
        if (aliveSet_.insert(key).second) aliveVec_.push_back(key);
      }
    } else {
      // dense stationary graph: sample the absent set instead
      std::unordered_set<std::uint64_t> absentSet;
      const std::int64_t absentCount = total - count;
      while (static_cast<std::int64_t>(absentSet.size()) < absentCount) {
        const auto idx = static_cast<std::int64_t>(init.below(static_cast<std::uint64_t>(total)));
        auto [u, v] = pairFromIndex(params_.n, idx);
        absentSet.insert(pairKey(params_.n, u, v));
      }
      for (std::int64_t idx = 0; idx < total; ++idx) {
        auto [u, v] = pairFromIndex(params_.n, idx);
        const std::uint64_t key = pairKey(params_.n, u, v);
        if (!absentSet.contains(key)) {
          aliveSet_.insert(key);
          aliveVec_.push_back(key);
        }
      }
    }
    if (recordTrace_)
      for (std::uint64_t key : aliveVec_) pushEvent(key, 1);
  }

  void pushEvent(std::uint64_t key, int b) {
    const auto u = static_cast<NodeId>(key / static_cast<std::uint64_t>(params_.n));
    const auto v = static_cast<NodeId>(key % static_cast<std::uint64_t>(params_.n));
    trace_.push_back({t_, u, v, b});
  }

  void rebuildSnapshot() {
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(aliveVec_.size());
    for (std::uint64_t key : aliveVec_)
      edges.emplace_back(static_cast<NodeId>(key / static_cast<std::uint64_t>(params_.n)),
                         static_cast<NodeId>(key % static_cast<std::uint64_t>(params_.n)));
    snapshot_ = Snapshot::fromEdges(params_.n, std::move(edges));
  }

  EdgeParams params_;
  RngStream rng_;
  bool recordTrace_;
  std::int64_t t_ = 0;
  std::vector<std::uint64_t> aliveVec_;
  std::unordered_set<std::uint64_t> aliveSet_;
  std::vector<EdgeTraceEvent> trace_;
  Snapshot snapshot_;
};

/// Lazy edge-MEG: no chain is materialized until queried. Each edge's state
/// is sampled on first touch from the stationary law, and thereafter advanced
/// with the k-step closed form from its memoized (state, time) ledger entry.
/// Valid only for forward-in-time query patterns; per-(edge, t) substreams
/// make answers independent of query order.
class LazyEdgeModel final : public EvolvingGraph {
 public:
  LazyEdgeModel(const EdgeParams& params, std::uint64_t seed) : params_(params), rng_(seed) {
    params_.validate();
  }

  int n() const override { return params_.n; }
  std::int64_t time() const override { return t_; }

  void step() override {
    ++t_;
    snapshotFresh_ = false;
  }

  /// Edge state at time tq >= ledger timestamp. Re-queries at the memoized
  /// time return the memoized answer.
  bool edgeAt(NodeId u, NodeId v, std::int64_t tq) {
    if (u == v) throw std::invalid_argument("LazyEdgeModel: self-loop query");
    const std::uint64_t key = pairKey(params_.n, u, v);
    auto it = ledger_.find(key);
    if (it == ledger_.end()) {
      const bool on = rng_.derive(detail::kEdgeLazy, key, static_cast<std::uint64_t>(tq)).bernoulli(params_.phat());
      ledger_.emplace(key, Entry{tq, on});
      return on;
    }
    Entry& e = it->second;
    if (tq < e.t) throw std::invalid_argument("LazyEdgeModel: backward-time query");
    if (tq == e.t) return e.on;
    const double pOn = kStepEdgeProbability(params_.p, params_.q, tq - e.t, e.on);
    e.on = rng_.derive(detail::kEdgeLazy, key, static_cast<std::uint64_t>(tq)).bernoulli(pOn);
    e.t = tq;
    return e.on;
  }

  /// Queries exactly the informed x uninformed pairs at the current time,
  /// with early exit per uninformed node.
  NodeSet frontierNeighbors(const NodeSet& informed) override {
    NodeSet out(params_.n);
    const auto informedNodes = informed.toVector();
    for (NodeId v = 0; v < params_.n; ++v) {
      if (informed.contains(v)) continue;
      for (NodeId u : informedNodes) {
        if (edgeAt(u, v, t_)) {
          out.insert(v);
          break;
        }
      }
    }
    return out;
  }

  int maxDegreeHint() override { return -1; }

  /// Materializes G_t by querying all pairs: O(n^2), intended for small n.
  const Snapshot& currentSnapshot() override {
    if (!snapshotFresh_) {
      std::vector<std::pair<NodeId, NodeId>> edges;
      for (NodeId u = 0; u < params_.n; ++u)
        for (NodeId v = u + 1; v < params_.n; ++v)
          if (edgeAt(u, v, t_)) edges.emplace_back(u, v);
      snapshot_ = Snapshot::fromEdges(params_.n, std::move(edges));
      snapshotFresh_ = true;
    }
    return snapshot_;
  }

  const EdgeParams& params() const { return params_; }
  std::size_t ledgerSize() const { return ledger_.size(); }

 private:
  struct Entry {
    std::int64_t t;
    bool on;
  };

  EdgeParams params_;
  RngStream rng_;
  std::int64_t t_ = 0;
  std::unordered_map<std::uint64_t, Entry> ledger_;
  Snapshot snapshot_;
  bool snapshotFresh_ = false;
};

/// Stationary G_{n, phat} sample as a standalone state (the dense model's
/// initial distribution).
inline Snapshot sampleStationaryEdges(const EdgeParams& params, std::uint64_t seed) {
  DenseEdgeModel model(params, seed);
  return model.currentSnapshot();
}

}  // namespace meg
