#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "meg/core.hpp"
#include "meg/rng.hpp"

namespace meg {

/// Largest integer m with m * unit^2 <= radius^2, i.e. the squared-distance
/// threshold in lattice-index units. Computed in extended precision and
/// pinned by exact comparison so the boundary d == radius is inclusive.
inline std::int64_t squaredIndexThreshold(double radius, double unit) {
  if (radius < 0) return -1;
  const long double ratio = static_cast<long double>(radius) / static_cast<long double>(unit);
  auto m = static_cast<std::int64_t>(ratio * ratio);
  const long double r2 = static_cast<long double>(radius) * static_cast<long double>(radius);
  const long double u2 = static_cast<long double>(unit) * static_cast<long double>(unit);
  while (static_cast<long double>(m + 1) * u2 <= r2) ++m;
  while (m > 0 && static_cast<long double>(m) * u2 > r2) --m;
  return m;
}

struct GeometricParams {
  int n = 0;        // node count
  double r = 0.0;   // move radius
  double R = 0.0;   // transmission radius
  double eps = 1.0; // lattice resolution
  double delta = 1.0;  // density (nodes per unit area)

  double side() const { return std::sqrt(static_cast<double>(n) / delta); }

  /// Lattice index range is 0..maxIndex() per axis.
  int maxIndex() const {
    return static_cast<int>(std::floor(static_cast<long double>(side()) / eps));
  }

  std::int64_t moveThreshold() const { return squaredIndexThreshold(r, eps); }
  std::int64_t linkThreshold() const { return squaredIndexThreshold(R, eps); }

  void validate() const {
    if (n < 1) throw std::invalid_argument("GeometricParams: n must be >= 1");
    if (delta <= 0) throw std::invalid_argument("GeometricParams: delta must be positive");
    if (eps <= 0 || eps > 1.0) throw std::invalid_argument("GeometricParams: need 0 < eps <= 1");
    if (R <= eps) throw std::invalid_argument("GeometricParams: need eps < R");
    if (r < 0) throw std::invalid_argument("GeometricParams: r must be >= 0");
    if (R > side()) throw std::invalid_argument("GeometricParams: R exceeds square side");
  }
};

struct LatticePoint {
  int i = 0;
  int j = 0;
  bool operator==(const LatticePoint&) const = default;
};

struct GeometricState {
  GeometricParams params;
  std::vector<LatticePoint> positions;  // positions[u] = P_{u,t}
  std::int64_t t = 0;
};

namespace detail {

/// Half-widths of the clipped disk rows: widths[d] = max |dj| with
/// d^2 + dj^2 <= threshold, for |di| = d.
inline std::vector<std::int64_t> rowHalfWidths(std::int64_t threshold) {
  if (threshold < 0) return {0};
  const std::int64_t reach = isqrt64(threshold);
  std::vector<std::int64_t> widths(static_cast<size_t>(reach) + 1);
  for (std::int64_t d = 0; d <= reach; ++d) widths[static_cast<size_t>(d)] = isqrt64(threshold - d * d);
  return widths;
}

}  // namespace detail

/// |Gamma(x)|: number of lattice points within move radius r of x (x itself
/// included), clipped at the square boundary. Integer row counting, no
/// floating point in the distance test.
inline std::int64_t stationaryWeight(LatticePoint x, const GeometricParams& params) {
  const int W = params.maxIndex();
  if (x.i < 0 || x.j < 0 || x.i > W || x.j > W) throw std::invalid_argument("stationaryWeight: point outside lattice");
  const auto widths = detail::rowHalfWidths(params.moveThreshold());
  const auto reach = static_cast<std::int64_t>(widths.size()) - 1;
  std::int64_t total = 0;
  for (std::int64_t di = -reach; di <= reach; ++di) {
    const std::int64_t i = x.i + di;
    if (i < 0 || i > W) continue;
    const std::int64_t w = widths[static_cast<size_t>(di < 0 ? -di : di)];
    const std::int64_t lo = std::max<std::int64_t>(0, x.j - w);
    const std::int64_t hi = std::min<std::int64_t>(W, x.j + w);
    total += hi - lo + 1;
  }
  return total;
}

/// Gamma(x) in row-major order (di ascending, then j ascending).
inline std::vector<LatticePoint> moveNeighborhood(LatticePoint x, const GeometricParams& params) {
  const int W = params.maxIndex();
  if (x.i < 0 || x.j < 0 || x.i > W || x.j > W) throw std::invalid_argument("moveNeighborhood: point outside lattice");
  const auto widths = detail::rowHalfWidths(params.moveThreshold());
  const auto reach = static_cast<std::int64_t>(widths.size()) - 1;
  std::vector<LatticePoint> out;
  for (std::int64_t di = -reach; di <= reach; ++di) {
    const std::int64_t i = x.i + di;
    if (i < 0 || i > W) continue;
    const std::int64_t w = widths[static_cast<size_t>(di < 0 ? -di : di)];
    const std::int64_t lo = std::max<std::int64_t>(0, x.j - w);
    const std::int64_t hi = std::min<std::int64_t>(W, x.j + w);
    for (std::int64_t j = lo; j <= hi; ++j) out.push_back({static_cast<int>(i), static_cast<int>(j)});
  }
  return out;
}

namespace detail {

// stream tags for geometric substreams
constexpr std::uint64_t kGeoStationary = 0x67656f2d696e6974ULL;
constexpr std::uint64_t kGeoMove = 0x67656f2d6d6f7665ULL;

/// Uniform element of Gamma(x), chosen by index into the row-major order.
inline LatticePoint nthNeighborhoodPoint(LatticePoint x, int W, const std::vector<std::int64_t>& widths,
                                         std::int64_t index) {
  const auto reach = static_cast<std::int64_t>(widths.size()) - 1;
  for (std::int64_t di = -reach; di <= reach; ++di) {
    const std::int64_t i = x.i + di;
    if (i < 0 || i > W) continue;
    const std::int64_t w = widths[static_cast<size_t>(di < 0 ? -di : di)];
    const std::int64_t lo = std::max<std::int64_t>(0, x.j - w);
    const std::int64_t hi = std::min<std::int64_t>(W, x.j + w);
    const std::int64_t rowLen = hi - lo + 1;
    if (index < rowLen) return {static_cast<int>(i), static_cast<int>(lo + index)};
    index -= rowLen;
  }
  throw std::logic_error("nthNeighborhoodPoint: index out of range");
}

inline std::int64_t weightWithWidths(LatticePoint x, int W, const std::vector<std::int64_t>& widths) {
  const auto reach = static_cast<std::int64_t>(widths.size()) - 1;
  std::int64_t total = 0;
  for (std::int64_t di = -reach; di <= reach; ++di) {
    const std::int64_t i = x.i + di;
    if (i < 0 || i > W) continue;
    const std::int64_t w = widths[static_cast<size_t>(di < 0 ? -di : di)];
    total += std::min<std::int64_t>(W, x.j + w) - std::max<std::int64_t>(0, x.j - w) + 1;
  }
  return total;
}

}  // namespace detail

/// Exact stationary position sample: each node independently with probability
/// proportional to |Gamma(x)|, by rejection against the interior weight.
inline GeometricState sampleStationaryPositions(const GeometricParams& params, const RngStream& rng) {
  params.validate();
  const int W = params.maxIndex();
  const auto widths = detail::rowHalfWidths(params.moveThreshold());
  // the disk is clipped only near the boundary, so an unclipped disk count is
  // the maximum weight over the lattice
  std::int64_t maxWeight = 0;
  for (std::int64_t d = 0; d < static_cast<std::int64_t>(widths.size()); ++d)
    maxWeight += (d == 0 ? 1 : 2) * (2 * widths[static_cast<size_t>(d)] + 1);

  GeometricState state;
  state.params = params;
  state.t = 0;
  state.positions.resize(static_cast<size_t>(params.n));
  const auto points = static_cast<std::uint64_t>(W) + 1;
  for (int u = 0; u < params.n; ++u) {
    RngStream s = rng.derive(detail::kGeoStationary, static_cast<std::uint64_t>(u));
    for (;;) {
      LatticePoint x{static_cast<int>(s.below(points)), static_cast<int>(s.below(points))};
      const std::int64_t w = detail::weightWithWidths(x, W, widths);
      if (static_cast<std::int64_t>(s.below(static_cast<std::uint64_t>(maxWeight))) < w) {
        state.positions[static_cast<size_t>(u)] = x;
        break;
      }
    }
  }
  return state;
}

/// One random-walk step: every node jumps to a uniform element of its move
/// neighborhood. Per-node substreams keyed by (node, t+1) keep the result
/// independent of iteration order.
inline void stepPositions(GeometricState& state, const RngStream& rng) {
  const int W = state.params.maxIndex();
  const auto widths = detail::rowHalfWidths(state.params.moveThreshold());
  const std::int64_t tNext = state.t + 1;
  for (int u = 0; u < static_cast<int>(state.positions.size()); ++u) {
    LatticePoint& x = state.positions[static_cast<size_t>(u)];
    const std::int64_t w = detail::weightWithWidths(x, W, widths);
    RngStream s = rng.derive(detail::kGeoMove, static_cast<std::uint64_t>(u), static_cast<std::uint64_t>(tNext));
    x = detail::nthNeighborhoodPoint(x, W, widths, static_cast<std::int64_t>(s.below(static_cast<std::uint64_t>(w))));
  }
  state.t = tNext;
}

/// Exact radius-R snapshot via an integer bucket grid: bucket width (in index
/// units) covers the link range, so only the 3x3 surrounding buckets need
/// checking.
inline Snapshot buildGeometricSnapshot(const GeometricState& state) {
  const auto n = static_cast<int>(state.positions.size());
  const int W = state.params.maxIndex();
  const std::int64_t linkSq = state.params.linkThreshold();
  const std::int64_t bucketWidth = std::max<std::int64_t>(1, isqrt64(linkSq));
  const auto buckets = static_cast<int>(static_cast<std::int64_t>(W) / bucketWidth) + 1;

  std::vector<std::vector<int>> grid(static_cast<size_t>(buckets) * static_cast<size_t>(buckets));
  auto bucketOf = [&](LatticePoint x) {
    return std::pair<int, int>{static_cast<int>(x.i / bucketWidth), static_cast<int>(x.j / bucketWidth)};
  };
  for (int u = 0; u < n; ++u) {
    auto [bi, bj] = bucketOf(state.positions[static_cast<size_t>(u)]);
    grid[static_cast<size_t>(bi) * static_cast<size_t>(buckets) + static_cast<size_t>(bj)].push_back(u);
  }

  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int u = 0; u < n; ++u) {
    const LatticePoint xu = state.positions[static_cast<size_t>(u)];
    auto [bi, bj] = bucketOf(xu);
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        const int ci = bi + di;
        const int cj = bj + dj;
        if (ci < 0 || cj < 0 || ci >= buckets || cj >= buckets) continue;
        for (int v : grid[static_cast<size_t>(ci) * static_cast<size_t>(buckets) + static_cast<size_t>(cj)]) {
          if (v <= u) continue;
          const LatticePoint xv = state.positions[static_cast<size_t>(v)];
          const std::int64_t dx = xu.i - xv.i;
          const std::int64_t dy = xu.j - xv.j;
          if (dx * dx + dy * dy <= linkSq) edges.emplace_back(u, v);
        }
      }
    }
  }
  return Snapshot::fromEdges(n, std::move(edges));
}

/// m x m audit partition of the square (m = ceil(sqrt(5n/delta)/R) so the cell
/// side sits in [R/(sqrt5+1), R/sqrt5]), with per-cell node counts.
struct CellGrid {
  int m = 0;
  double cellSide = 0.0;
  std::vector<std::int64_t> counts;  // row-major m*m
  std::int64_t minCount = 0;
  std::int64_t maxCount = 0;
  bool belowRadiusThreshold = false;  // R < c*sqrt(log n / delta) warning flag

  double maxMinRatio() const {
    return minCount > 0 ? static_cast<double>(maxCount) / static_cast<double>(minCount)
                        : std::numeric_limits<double>::infinity();
  }
};

inline CellGrid cellOccupancy(const GeometricState& state, double warnConstant = 2.0) {
  const GeometricParams& p = state.params;
  const double side = p.side();
  CellGrid grid;
  grid.m = static_cast<int>(std::ceil(std::sqrt(5.0) * side / p.R));
  grid.cellSide = side / grid.m;
  grid.belowRadiusThreshold = p.R < warnConstant * std::sqrt(std::log(static_cast<double>(p.n)) / p.delta);
  grid.counts.assign(static_cast<size_t>(grid.m) * static_cast<size_t>(grid.m), 0);
  for (const LatticePoint& x : state.positions) {
    const int ci = std::min(grid.m - 1, static_cast<int>(x.i * p.eps / grid.cellSide));
    const int cj = std::min(grid.m - 1, static_cast<int>(x.j * p.eps / grid.cellSide));
    ++grid.counts[static_cast<size_t>(ci) * static_cast<size_t>(grid.m) + static_cast<size_t>(cj)];
  }
  grid.minCount = *std::min_element(grid.counts.begin(), grid.counts.end());
  grid.maxCount = *std::max_element(grid.counts.begin(), grid.counts.end());
  return grid;
}

/// Positions dump, one line per node: "t u i j".
inline void writePositions(const GeometricState& state, std::ostream& os) {
  for (int u = 0; u < static_cast<int>(state.positions.size()); ++u) {
    const LatticePoint& x = state.positions[static_cast<size_t>(u)];
    os << state.t << ' ' << u << ' ' << x.i << ' ' << x.j << '\n';
  }
}

/// The geometric-MEG: n independent lattice random walks, snapshot = radius-R
/// graph over current positions. Initialized stationary.
class GeometricModel final : public EvolvingGraph {
 public:
  GeometricModel(const GeometricParams& params, std::uint64_t seed)
      : rng_(seed), state_(sampleStationaryPositions(params, rng_)), snapshot_(buildGeometricSnapshot(state_)) {}

  int n() const override { return state_.params.n; }
  std::int64_t time() const override { return state_.t; }

  void step() override {
    stepPositions(state_, rng_);
    snapshot_ = buildGeometricSnapshot(state_);
  }

  const Snapshot& currentSnapshot() override { return snapshot_; }

  const GeometricState& state() const { return state_; }

 private:
  RngStream rng_;
  GeometricState state_;
  Snapshot snapshot_;
};

}  // namespace meg
