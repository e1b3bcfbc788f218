#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace meg {

// Stafford variant 13 of the splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

namespace detail {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) noexcept {
  return mix64(h ^ (v + kGolden + (h << 6) + (h >> 2)));
}
}  // namespace detail

/// Splittable seeded random stream. Substreams derived with `derive` depend
/// only on the parent's seed key, never on how many values were drawn, so
/// per-node / per-edge / per-run streams are reproducible regardless of
/// iteration order.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) : key_(seed), state_(mix64(seed ^ detail::kGolden)) {}

  std::uint64_t key() const noexcept { return key_; }

  RngStream derive(std::uint64_t a) const noexcept {
    return RngStream(detail::combine(key_, a));
  }
  RngStream derive(std::uint64_t a, std::uint64_t b) const noexcept {
    return RngStream(detail::combine(detail::combine(key_, a), b));
  }
  RngStream derive(std::uint64_t a, std::uint64_t b, std::uint64_t c) const noexcept {
    return RngStream(detail::combine(detail::combine(detail::combine(key_, a), b), c));
  }
  RngStream derive(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) const noexcept {
    return RngStream(detail::combine(detail::combine(detail::combine(detail::combine(key_, a), b), c), d));
  }

  // splitmix64 sequence
  std::uint64_t next() noexcept {
    state_ += detail::kGolden;
    return mix64(state_);
  }

  std::uint64_t operator()() noexcept { return next(); }
  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return std::numeric_limits<std::uint64_t>::max(); }

  /// Uniform double in [0,1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Unbiased uniform integer in [0, bound). bound must be >= 1.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("RngStream::below: bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t x = next();
      if (x >= threshold) return x % bound;
    }
  }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

  /// Exact binomial sample: CDF inversion from 0 when the PMF at 0 is
  /// representable, otherwise two-sided inversion outward from the mode.
  /// Never a normal approximation.
  std::int64_t binomial(std::int64_t trials, double p);

 private:
  std::uint64_t key_;
  std::uint64_t state_;
};

namespace detail {

inline std::int64_t binomialInversion(std::int64_t n, double p, double u) {
  // plain CDF inversion from k = 0; requires n*log1p(-p) > -700
  const double r = p / (1.0 - p);
  double f = std::exp(static_cast<double>(n) * std::log1p(-p));
  std::int64_t k = 0;
  while (u >= f) {
    u -= f;
    ++k;
    if (k > n) return n;  // float dust in the tail
    f *= r * static_cast<double>(n - k + 1) / static_cast<double>(k);
  }
  return k;
}

inline double logBinomialPmf(std::int64_t n, double p, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0) + static_cast<double>(k) * std::log(p) +
         static_cast<double>(n - k) * std::log1p(-p);
}

inline std::int64_t binomialFromMode(std::int64_t n, double p, double u) {
  // CDF inversion visiting the mode first, then k alternating outward.
  const std::int64_t mode = static_cast<std::int64_t>(std::floor((static_cast<double>(n) + 1.0) * p));
  const double r = p / (1.0 - p);
  const double fMode = std::exp(logBinomialPmf(n, p, mode));
  double fUp = fMode;
  double fDown = fMode;
  std::int64_t kUp = mode;
  std::int64_t kDown = mode;
  if (u < fMode) return mode;
  u -= fMode;
  for (;;) {
    bool advanced = false;
    if (kUp < n) {
      fUp *= r * static_cast<double>(n - kUp) / static_cast<double>(kUp + 1);
      ++kUp;
      if (u < fUp) return kUp;
      u -= fUp;
      advanced = true;
    }
    if (kDown > 0) {
      fDown *= static_cast<double>(kDown) / (r * static_cast<double>(n - kDown + 1));
      --kDown;
      if (u < fDown) return kDown;
      u -= fDown;
      advanced = true;
    }
    if (!advanced) return mode;  // entire support consumed: float dust
  }
}

}  // namespace detail

inline std::int64_t RngStream::binomial(std::int64_t trials, double p) {
  if (trials < 0 || p < 0.0 || p > 1.0 || std::isnan(p))
    throw std::invalid_argument("RngStream::binomial: invalid parameters");
  if (trials == 0 || p == 0.0) return 0;
  if (p == 1.0) return trials;
  if (p > 0.5) return trials - binomial(trials, 1.0 - p);
  const double u = uniform01();
  if (static_cast<double>(trials) * std::log1p(-p) > -700.0)
    return detail::binomialInversion(trials, p, u);
  return detail::binomialFromMode(trials, p, u);
}

/// Integer square root: largest s with s*s <= x.
inline std::int64_t isqrt64(std::int64_t x) {
  if (x < 0) throw std::invalid_argument("isqrt64: negative argument");
  auto s = static_cast<std::int64_t>(std::sqrt(static_cast<double>(x)));
  while (s > 0 && s * s > x) --s;
  while ((s + 1) * (s + 1) <= x) ++s;
  return s;
}

}  // namespace meg
