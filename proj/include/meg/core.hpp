#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "meg/rng.hpp"

namespace meg {

using NodeId = int;

/// Dense bit-set over the node universe [0, n). Union/intersection run one
/// word at a time; iteration scans set bits.
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(int universe) : n_(universe), words_((static_cast<size_t>(universe) + 63) / 64, 0) {
    if (universe < 0) throw std::invalid_argument("NodeSet: negative universe");
  }

  static NodeSet single(int universe, NodeId v) {
    NodeSet s(universe);
    s.insert(v);
    return s;
  }

  int universe() const noexcept { return n_; }

  void insert(NodeId v) {
    check(v);
    words_[static_cast<size_t>(v) >> 6] |= (1ULL << (v & 63));
  }
  void erase(NodeId v) {
    check(v);
    words_[static_cast<size_t>(v) >> 6] &= ~(1ULL << (v & 63));
  }
  bool contains(NodeId v) const {
    if (v < 0 || v >= n_) return false;
    return (words_[static_cast<size_t>(v) >> 6] >> (v & 63)) & 1ULL;
  }

  int count() const noexcept {
    int c = 0;
    for (std::uint64_t w : words_) c += std::popcount(w);
    return c;
  }
  bool empty() const noexcept {
    for (std::uint64_t w : words_)
      if (w) return false;
    return true;
  }

  NodeSet& operator|=(const NodeSet& o) {
    checkUniverse(o);
    for (size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  NodeSet& operator&=(const NodeSet& o) {
    checkUniverse(o);
    for (size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }
  /// Set difference: removes every element of `o`.
  NodeSet& operator-=(const NodeSet& o) {
    checkUniverse(o);
    for (size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    return *this;
  }

  friend NodeSet operator|(NodeSet a, const NodeSet& b) { return a |= b; }
  friend NodeSet operator&(NodeSet a, const NodeSet& b) { return a &= b; }
  friend NodeSet operator-(NodeSet a, const NodeSet& b) { return a -= b; }

  bool operator==(const NodeSet& o) const = default;

  bool intersects(const NodeSet& o) const {
    checkUniverse(o);
    for (size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & o.words_[i]) return true;
    return false;
  }

  bool isSubsetOf(const NodeSet& o) const {
    checkUniverse(o);
    for (size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }

  template <typename F>
  void forEach(F&& f) const {
    for (size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t w = words_[i];
      while (w) {
        const int b = std::countr_zero(w);
        f(static_cast<NodeId>(i * 64 + static_cast<size_t>(b)));
        w &= w - 1;
      }
    }
  }

  std::vector<NodeId> toVector() const {
    std::vector<NodeId> out;
    out.reserve(static_cast<size_t>(count()));
    forEach([&](NodeId v) { out.push_back(v); });
    return out;
  }

 private:
  void check(NodeId v) const {
    if (v < 0 || v >= n_) throw std::out_of_range("NodeSet: node out of range");
  }
  void checkUniverse(const NodeSet& o) const {
    if (n_ != o.n_) throw std::invalid_argument("NodeSet: universe mismatch");
  }

  int n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// One time-step's undirected graph on [0, n), stored as a sorted CSR
/// adjacency. Immutable once built.
class Snapshot {
 public:
  Snapshot() : offsets_(1, 0) {}

  static Snapshot fromEdges(int n, std::vector<std::pair<NodeId, NodeId>> edges) {
    if (n < 0) throw std::invalid_argument("Snapshot: negative node count");
    for (auto& [u, v] : edges) {
      if (u == v) throw std::invalid_argument("Snapshot: self-loop");
      if (u < 0 || v < 0 || u >= n || v >= n) throw std::invalid_argument("Snapshot: node out of range");
      if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    Snapshot s;
    s.n_ = n;
    s.edgeCount_ = static_cast<std::int64_t>(edges.size());
    std::vector<int> deg(static_cast<size_t>(n), 0);
    for (auto [u, v] : edges) {
      ++deg[static_cast<size_t>(u)];
      ++deg[static_cast<size_t>(v)];
    }
    s.offsets_.assign(static_cast<size_t>(n) + 1, 0);
    for (int u = 0; u < n; ++u) s.offsets_[static_cast<size_t>(u) + 1] = s.offsets_[static_cast<size_t>(u)] + deg[static_cast<size_t>(u)];
    s.adjacency_.resize(static_cast<size_t>(s.offsets_.back()));
    std::vector<std::int64_t> cursor(s.offsets_.begin(), s.offsets_.end() - 1);
    for (auto [u, v] : edges) {
      s.adjacency_[static_cast<size_t>(cursor[static_cast<size_t>(u)]++)] = v;
      s.adjacency_[static_cast<size_t>(cursor[static_cast<size_t>(v)]++)] = u;
    }
    return s;  // rows sorted: edges sorted by (u,v) and v-inserts arrive in u order
  }

  int n() const noexcept { return n_; }
  std::int64_t edgeCount() const noexcept { return edgeCount_; }

  std::span<const NodeId> neighbors(NodeId u) const {
    checkNode(u);
    const auto b = static_cast<size_t>(offsets_[static_cast<size_t>(u)]);
    const auto e = static_cast<size_t>(offsets_[static_cast<size_t>(u) + 1]);
    return {adjacency_.data() + b, e - b};
  }

  int degree(NodeId u) const {
    checkNode(u);
    return static_cast<int>(offsets_[static_cast<size_t>(u) + 1] - offsets_[static_cast<size_t>(u)]);
  }

  bool hasEdge(NodeId u, NodeId v) const {
    const auto row = neighbors(u);
    return std::binary_search(row.begin(), row.end(), v);
  }

  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(static_cast<size_t>(edgeCount_));
    for (int u = 0; u < n_; ++u)
      for (NodeId v : neighbors(u))
        if (u < v) out.emplace_back(u, v);
    return out;
  }

 private:
  void checkNode(NodeId u) const {
    if (u < 0 || u >= n_) throw std::out_of_range("Snapshot: node out of range");
  }

  int n_ = 0;
  std::int64_t edgeCount_ = 0;
  std::vector<std::int64_t> offsets_;
  std::vector<NodeId> adjacency_;
};

/// N(I): nodes outside I adjacent to some node of I.
inline NodeSet neighborsOfSet(const Snapshot& g, const NodeSet& informed) {
  if (informed.universe() != g.n()) throw std::invalid_argument("neighborsOfSet: universe mismatch");
  NodeSet out(g.n());
  informed.forEach([&](NodeId u) {
    for (NodeId v : g.neighbors(u)) out.insert(v);
  });
  out -= informed;
  return out;
}

inline int snapshotMaxDegree(const Snapshot& g) {
  int best = 0;
  for (int u = 0; u < g.n(); ++u) best = std::max(best, g.degree(u));
  return best;
}

/// A Markovian evolving graph: step() advances one time unit, the snapshot
/// accessor exposes the current G_t. Implementations initialize at t = 0 from
/// their stationary distribution.
class EvolvingGraph {
 public:
  virtual ~EvolvingGraph() = default;

  virtual int n() const = 0;
  virtual std::int64_t time() const = 0;
  virtual void step() = 0;

  /// Current G_t. May be expensive for models that do not materialize edges
  /// (the lazy edge model builds it on demand by querying all pairs).
  virtual const Snapshot& currentSnapshot() = 0;

  /// N(I) on the current snapshot. Models that can answer without a full
  /// snapshot override this.
  virtual NodeSet frontierNeighbors(const NodeSet& informed) {
    return neighborsOfSet(currentSnapshot(), informed);
  }

  /// Max degree of the current snapshot, or -1 when not cheaply available.
  virtual int maxDegreeHint() { return snapshotMaxDegree(currentSnapshot()); }
};

}  // namespace meg
