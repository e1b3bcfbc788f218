#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace meg {

inline double quantileOf(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantileOf: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * (static_cast<double>(values.size()) - 1.0);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = static_cast<size_t>(std::ceil(pos));
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline double medianOf(std::vector<double> values) { return quantileOf(std::move(values), 0.5); }

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit linearFit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linearFit: need matched samples, size >= 2");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("linearFit: degenerate predictor (zero variance)");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

namespace detail {

/// Regularized lower incomplete gamma P(a, x): series for x < a+1, continued
/// fraction (modified Lentz) otherwise.
inline double regularizedGammaP(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("regularizedGammaP: bad arguments");
  if (x == 0.0) return 0.0;
  const double lgA = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lgA);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lgA) * h;
  return 1.0 - q;
}

}  // namespace detail

/// P(Chi2_df > x).
inline double chiSquareSurvival(double x, double df) {
  if (x <= 0.0) return 1.0;
  return 1.0 - detail::regularizedGammaP(df / 2.0, x / 2.0);
}

/// Two-sample chi-square homogeneity test on matched count histograms.
/// Bins with fewer than `minExpected` combined counts are pooled.
struct ChiSquareResult {
  double statistic = 0.0;
  double df = 0.0;
  double pValue = 1.0;
};

inline ChiSquareResult chiSquareTwoSample(std::span<const std::int64_t> a, std::span<const std::int64_t> b,
                                          double minExpected = 5.0) {
  if (a.size() != b.size()) throw std::invalid_argument("chiSquareTwoSample: bin count mismatch");
  double totalA = 0.0, totalB = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    totalA += static_cast<double>(a[i]);
    totalB += static_cast<double>(b[i]);
  }
  if (totalA == 0.0 || totalB == 0.0) throw std::invalid_argument("chiSquareTwoSample: empty sample");
  // K proportions test with pooling of sparse bins
  const double ratioA = std::sqrt(totalB / totalA);
  const double ratioB = std::sqrt(totalA / totalB);
  double stat = 0.0;
  double bins = 0.0;
  double poolA = 0.0, poolB = 0.0;
  auto flush = [&](double ca, double cb) {
    if (ca + cb <= 0.0) return;
    const double d = ratioA * ca - ratioB * cb;
    stat += d * d / (ca + cb);
    bins += 1.0;
  };
  for (size_t i = 0; i < a.size(); ++i) {
    poolA += static_cast<double>(a[i]);
    poolB += static_cast<double>(b[i]);
    if (poolA + poolB >= minExpected) {
      flush(poolA, poolB);
      poolA = poolB = 0.0;
    }
  }
  flush(poolA, poolB);
  ChiSquareResult res;
  res.statistic = stat;
  res.df = std::max(1.0, bins - 1.0);
  res.pValue = chiSquareSurvival(stat, res.df);
  return res;
}

/// Asymptotic two-sample Kolmogorov-Smirnov p-value. Conservative for
/// discrete samples (ties make rejection less likely).
inline double ksTwoSamplePValue(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ksTwoSamplePValue: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  double d = 0.0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  const double lambda = (en + 0.12 + 0.11 / en) * d;
  double p = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * lambda * lambda * static_cast<double>(k) * static_cast<double>(k));
    p += 2.0 * sign * term;
    sign = -sign;
    if (term < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace meg
