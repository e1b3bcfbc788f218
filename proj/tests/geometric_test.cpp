#include "meg/geometric.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "meg/stats.hpp"
#include "oracles.hpp"

namespace {

meg::GeometricParams params(int n, double r, double R, double eps = 1.0, double delta = 1.0) {
  return {n, r, R, eps, delta};
}

TEST(GeometricParams, Validation) {
  EXPECT_NO_THROW(params(64, 1, 3).validate());
  EXPECT_THROW(params(0, 1, 3).validate(), std::invalid_argument);
  EXPECT_THROW(params(64, -1, 3).validate(), std::invalid_argument);
  EXPECT_THROW(params(64, 1, 0.5, 1.0).validate(), std::invalid_argument);   // R <= eps
  EXPECT_THROW(params(64, 1, 3, 1.5).validate(), std::invalid_argument);     // eps > 1
  EXPECT_THROW(params(64, 1, 100).validate(), std::invalid_argument);        // R > side
  EXPECT_EQ(params(4, 1, 1.5).maxIndex(), 2);                                // 3x3 lattice
}

TEST(MoveNeighborhood, MatchesBruteEnumeration) {
  // unit radius, interior point: the point plus its 4 axis neighbors
  const auto prm = params(64, 1.0, 2.0);
  const auto interior = meg::moveNeighborhood({4, 4}, prm);
  EXPECT_EQ(interior.size(), 5u);
  EXPECT_EQ(oracle::bruteMoveNeighborhood({4, 4}, prm), interior);

  const auto corner = meg::moveNeighborhood({0, 0}, prm);
  EXPECT_EQ(corner.size(), 3u);
  EXPECT_EQ(oracle::bruteMoveNeighborhood({0, 0}, prm), corner);

  // r < eps: only the point itself
  const auto still = meg::moveNeighborhood({3, 3}, params(64, 0.5, 2.0));
  ASSERT_EQ(still.size(), 1u);
  EXPECT_EQ(still[0], (meg::LatticePoint{3, 3}));

  // random (r, eps, point) combinations against the brute oracle
  meg::RngStream rng(5);
  for (int iter = 0; iter < 60; ++iter) {
    const double eps = 0.25 + 0.25 * static_cast<double>(rng.below(4));
    const double r = rng.uniform01() * 4.0;
    const auto prm2 = params(49, r, 5.0, eps);
    const int W = prm2.maxIndex();
    const meg::LatticePoint x{static_cast<int>(rng.below(static_cast<std::uint64_t>(W) + 1)),
                              static_cast<int>(rng.below(static_cast<std::uint64_t>(W) + 1))};
    EXPECT_EQ(oracle::bruteMoveNeighborhood(x, prm2), meg::moveNeighborhood(x, prm2)) << "r=" << r << " eps=" << eps;
  }
}

TEST(MoveNeighborhood, AlwaysContainsSelf) {
  meg::RngStream rng(6);
  for (int iter = 0; iter < 40; ++iter) {
    const auto prm = params(36, rng.uniform01() * 3.0, 3.0, 0.5);
    const int W = prm.maxIndex();
    const meg::LatticePoint x{static_cast<int>(rng.below(static_cast<std::uint64_t>(W) + 1)),
                              static_cast<int>(rng.below(static_cast<std::uint64_t>(W) + 1))};
    const auto nb = meg::moveNeighborhood(x, prm);
    EXPECT_GE(meg::stationaryWeight(x, prm), 1);
    EXPECT_NE(std::find(nb.begin(), nb.end(), x), nb.end());
    EXPECT_EQ(static_cast<std::int64_t>(nb.size()), meg::stationaryWeight(x, prm));
  }
}

TEST(StationaryWeight, FullLatticeWhenRadiusCoversDiameter) {
  const auto prm = params(16, 6.0, 4.0);  // diameter = 4*sqrt(2) < 6
  const int W = prm.maxIndex();
  const auto points = static_cast<std::int64_t>(W + 1) * (W + 1);
  for (int i = 0; i <= W; ++i)
    for (int j = 0; j <= W; ++j) EXPECT_EQ(meg::stationaryWeight({i, j}, prm), points);  // pi uniform
}

TEST(StationaryWeight, BoundaryClippingBound) {
  // min weight >= interior weight / 4 for r <= side/2
  for (double r : {1.0, 2.0, 3.5}) {
    const auto prm = params(64, r, 4.0);
    const int W = prm.maxIndex();
    const std::int64_t interior = meg::stationaryWeight({W / 2, W / 2}, prm);
    std::int64_t minW = interior;
    std::int64_t maxW = 0;
    for (int i = 0; i <= W; ++i)
      for (int j = 0; j <= W; ++j) {
        const auto w = meg::stationaryWeight({i, j}, prm);
        minW = std::min(minW, w);
        maxW = std::max(maxW, w);
      }
    EXPECT_GE(4 * minW, interior) << "r=" << r;
    EXPECT_EQ(maxW, interior);
  }
}

TEST(SampleStationaryPositions, UniformWhenWeightsEqual) {
  // r < eps: every weight is 1, positions uniform over the lattice
  const auto prm = params(4, 0.5, 1.5);  // 3x3 lattice, 9 points
  std::map<std::pair<int, int>, std::int64_t> freq;
  const int draws = 90000;
  meg::RngStream rng(8);
  for (int i = 0; i < draws; ++i) {
    const auto st = meg::sampleStationaryPositions(prm, rng.derive(static_cast<std::uint64_t>(i)));
    for (const auto& x : st.positions) ++freq[{x.i, x.j}];
  }
  const double expect = draws * prm.n / 9.0;
  const double sigma = std::sqrt(expect * (1.0 - 1.0 / 9.0));
  for (const auto& [pt, c] : freq) EXPECT_NEAR(static_cast<double>(c), expect, 4 * sigma);
}

TEST(SampleStationaryPositions, ExactPiOnSmallLattice) {
  // 3x3 lattice, r=1: corner weight 3, edge 4, center 5, total 33
  const auto prm = params(4, 1.0, 1.5);
  ASSERT_EQ(prm.maxIndex(), 2);
  std::int64_t total = 0;
  std::map<std::pair<int, int>, std::int64_t> weight;
  for (int i = 0; i <= 2; ++i)
    for (int j = 0; j <= 2; ++j) {
      weight[{i, j}] = meg::stationaryWeight({i, j}, prm);
      total += weight[{i, j}];
    }
  EXPECT_EQ(total, 33);
  EXPECT_EQ((weight[{0, 0}]), 3);
  EXPECT_EQ((weight[{1, 0}]), 4);
  EXPECT_EQ((weight[{1, 1}]), 5);

  std::map<std::pair<int, int>, std::int64_t> freq;
  const int draws = 120000;
  meg::RngStream rng(9);
  for (int i = 0; i < draws; ++i) {
    const auto st = meg::sampleStationaryPositions(prm, rng.derive(static_cast<std::uint64_t>(i)));
    ++freq[{st.positions[0].i, st.positions[0].j}];
  }
  for (const auto& [pt, w] : weight) {
    const double pi = static_cast<double>(w) / 33.0;
    const double sigma = std::sqrt(draws * pi * (1 - pi));
    EXPECT_NEAR(static_cast<double>(freq[pt]), draws * pi, 4 * sigma);
  }
}

TEST(StepPositions, StaticWhenMoveRadiusBelowResolution) {
  const auto prm = params(25, 0.5, 2.0);
  auto st = meg::sampleStationaryPositions(prm, meg::RngStream(10));
  const auto before = st.positions;
  for (int t = 0; t < 5; ++t) meg::stepPositions(st, meg::RngStream(10));
  EXPECT_EQ(st.positions, before);
  EXPECT_EQ(st.t, 5);
}

TEST(StepPositions, UniformOverMoveNeighborhood) {
  // single node pinned at an interior point: each of the 5 targets ~ 1/5
  const auto prm = params(64, 1.0, 2.0);
  std::map<std::pair<int, int>, std::int64_t> freq;
  const int draws = 100000;
  meg::RngStream rng(11);
  for (int i = 0; i < draws; ++i) {
    meg::GeometricState st;
    st.params = prm;
    st.positions = {{4, 4}};
    st.t = i;  // varies the per-step substream
    meg::stepPositions(st, rng);
    ++freq[{st.positions[0].i, st.positions[0].j}];
  }
  ASSERT_EQ(freq.size(), 5u);
  const double expect = draws / 5.0;
  const double sigma = std::sqrt(draws * 0.2 * 0.8);
  for (const auto& [pt, c] : freq) EXPECT_NEAR(static_cast<double>(c), expect, 4 * sigma);
}

TEST(StepPositions, PreservesStationaryOccupancy) {
  // chi-square on per-cell occupancy aggregated over seeds, t=0 vs t=k
  const auto prm = params(256, 2.0, 8.0);
  for (const int k : {1, 10, 50}) {
    const auto grid0 = meg::cellOccupancy(meg::sampleStationaryPositions(prm, meg::RngStream(1)), 2.0);
    std::vector<std::int64_t> at0(grid0.counts.size(), 0), atK(grid0.counts.size(), 0);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      auto st = meg::sampleStationaryPositions(prm, meg::RngStream(seed * 2 + 1));
      const auto g0 = meg::cellOccupancy(st, 2.0);
      for (size_t i = 0; i < at0.size(); ++i) at0[i] += g0.counts[i];
      for (int t = 0; t < k; ++t) meg::stepPositions(st, meg::RngStream(seed * 2 + 1));
      const auto gk = meg::cellOccupancy(st, 2.0);
      for (size_t i = 0; i < atK.size(); ++i) atK[i] += gk.counts[i];
    }
    const auto res = meg::chiSquareTwoSample(at0, atK);
    EXPECT_GT(res.pValue, 0.01) << "k=" << k << " stat=" << res.statistic;
  }
}

TEST(BuildGeometricSnapshot, EdgeAtExactRadius) {
  meg::GeometricState st;
  st.params = params(100, 0.5, 5.0);
  st.positions = {{0, 0}, {3, 4}, {9, 4}};  // d(0,1) = 5 exactly, d(0,2) > 5
  const auto g = meg::buildGeometricSnapshot(st);
  EXPECT_TRUE(g.hasEdge(0, 1));
  EXPECT_FALSE(g.hasEdge(0, 2));
  EXPECT_FALSE(g.hasEdge(1, 2));  // d = 6 > R
}

TEST(BuildGeometricSnapshot, ExactRadiusNonStrictAndJustBeyond) {
  meg::GeometricState st;
  st.params = params(100, 0.5, 5.0);
  st.positions = {{0, 0}, {5, 0}, {0, 6}};
  const auto g = meg::buildGeometricSnapshot(st);
  EXPECT_TRUE(g.hasEdge(0, 1));   // d = R exactly
  EXPECT_FALSE(g.hasEdge(0, 2));  // d = R + eps
}

TEST(BuildGeometricSnapshot, MatchesBruteForce) {
  meg::RngStream rng(13);
  for (int iter = 0; iter < 30; ++iter) {
    const int n = 16 + static_cast<int>(rng.below(49));
    const double eps = 0.5 + 0.25 * static_cast<double>(rng.below(3));
    const double side = std::sqrt(static_cast<double>(n));
    const double R = eps + rng.uniform01() * (side - eps) * 0.9;
    const auto prm = params(n, 1.0, R, eps);
    const auto st = meg::sampleStationaryPositions(prm, rng.derive(static_cast<std::uint64_t>(iter)));
    const auto fast = meg::buildGeometricSnapshot(st);
    const auto brute = oracle::bruteForceRadiusGraph(st);
    EXPECT_EQ(fast.edges(), brute.edges()) << "n=" << n << " R=" << R << " eps=" << eps;
  }
}

TEST(CellOccupancy, DegenerateCases) {
  meg::GeometricState one;
  one.params = params(16, 1.0, 3.0);
  one.positions = {{2, 2}};
  const auto grid1 = meg::cellOccupancy(one);
  EXPECT_EQ(std::accumulate(grid1.counts.begin(), grid1.counts.end(), std::int64_t{0}), 1);
  EXPECT_EQ(grid1.maxCount, 1);

  meg::GeometricState clump;
  clump.params = params(16, 1.0, 3.0);
  clump.positions.assign(16, {1, 1});
  const auto grid2 = meg::cellOccupancy(clump);
  EXPECT_EQ(grid2.maxCount, 16);
  EXPECT_EQ(grid2.minCount, 0);
}

TEST(CellOccupancy, PartitionGeometryAndWarning) {
  const auto prm = params(1024, 1.0, 6.0);
  const auto st = meg::sampleStationaryPositions(prm, meg::RngStream(14));
  const auto grid = meg::cellOccupancy(st, 2.0);
  EXPECT_EQ(grid.m, static_cast<int>(std::ceil(std::sqrt(5.0 * 1024.0) / 6.0)));
  EXPECT_GE(grid.cellSide, prm.R / (std::sqrt(5.0) + 1.0) - 1e-9);
  EXPECT_LE(grid.cellSide, prm.R / std::sqrt(5.0) + 1e-9);
  EXPECT_EQ(std::accumulate(grid.counts.begin(), grid.counts.end(), std::int64_t{0}), 1024);
  EXPECT_FALSE(grid.belowRadiusThreshold);  // 6 > 2 sqrt(log 1024)
  EXPECT_TRUE(meg::cellOccupancy(st, 3.0).belowRadiusThreshold);
}

TEST(GeometricParams, DensityScalesSideAndThreshold) {
  const auto prm = params(64, 1.0, 3.0, 1.0, 4.0);  // side = sqrt(64/4) = 4
  EXPECT_DOUBLE_EQ(prm.side(), 4.0);
  EXPECT_EQ(prm.maxIndex(), 4);
  EXPECT_NO_THROW(prm.validate());
  const auto st = meg::sampleStationaryPositions(prm, meg::RngStream(2));
  EXPECT_EQ(meg::buildGeometricSnapshot(st).edges(), oracle::bruteForceRadiusGraph(st).edges());
  // warning threshold scales as c sqrt(log n / delta)
  EXPECT_FALSE(meg::cellOccupancy(st, 2.0).belowRadiusThreshold);  // 2*sqrt(log64/4) ~ 2.04 <= 3
  EXPECT_TRUE(meg::cellOccupancy(st, 3.0).belowRadiusThreshold);   // 3*sqrt(log64/4) ~ 3.06 > 3
}

TEST(CellOccupancy, StationaryConcentrationAtScale) {
  // n=4096, R = 3 sqrt(log n): cell counts concentrate; the max/min ratio is
  // modest and stable across seeds
  const double R = 3.0 * std::sqrt(std::log(4096.0));
  const auto prm = params(4096, R / 2.0, R);
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto grid = meg::cellOccupancy(meg::sampleStationaryPositions(prm, meg::RngStream(seed)), 2.0);
    EXPECT_FALSE(grid.belowRadiusThreshold);
    EXPECT_GT(grid.minCount, 0) << "seed=" << seed;
    const double lambda = std::max(static_cast<double>(grid.maxCount) / (R * R),
                                   R * R / static_cast<double>(grid.minCount));
    EXPECT_LE(grid.maxMinRatio(), lambda * lambda + 1e-9);
    ratios.push_back(grid.maxMinRatio());
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  EXPECT_LE(hi, 25.0);
  EXPECT_LE(hi / lo, 5.0);  // stable across seeds (min-count is a noisy extreme)
}

TEST(WritePositions, DumpFormat) {
  meg::GeometricState st;
  st.params = params(16, 1.0, 3.0);
  st.positions = {{1, 2}, {3, 0}};
  st.t = 7;
  std::ostringstream os;
  meg::writePositions(st, os);
  EXPECT_EQ(os.str(), "7 0 1 2\n7 1 3 0\n");
}

}  // namespace
