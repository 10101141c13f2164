#ifndef OBSOLIB_SIMULATE_HPP
#define OBSOLIB_SIMULATE_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "obsolib/dist.hpp"
#include "obsolib/specfun.hpp"

namespace obsolib {

// xoshiro256++ seeded through splitmix64.  The integer stream is defined by
// the two algorithms alone, so fixed seeds reproduce across platforms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t z = seed;
    for (auto& s : state_) {
      z += 0x9e3779b97f4a7c15ull;
      std::uint64_t t = z;
      t = (t ^ (t >> 30)) * 0xbf58476d1ce4e5b9ull;
      t = (t ^ (t >> 27)) * 0x94d049bb133111ebull;
      s = t ^ (t >> 31);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform on the open interval (0, 1): safe inside logs and divisions
  double next_double() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

namespace detail {

// Marsaglia-Tsang squeeze/rejection, valid for shape >= 1.
inline double gamma_shape_ge1(Rng& rng, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  while (true) {
    double x, v;
    do {
      x = rng.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_double();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace detail

inline double sample_gamma(Rng& rng, double shape, double rate) {
  if (!(shape > 0.0) || !std::isfinite(shape))
    throw DomainError("sample_gamma: shape must be finite and positive");
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw DomainError("sample_gamma: rate must be finite and positive");
  if (shape >= 1.0) return detail::gamma_shape_ge1(rng, shape) / rate;
  // boost a shape+1 draw down by U^(1/shape)
  const double g = detail::gamma_shape_ge1(rng, shape + 1.0);
  return g * std::pow(rng.next_double(), 1.0 / shape) / rate;
}

namespace detail {

inline std::int64_t poisson_inversion(Rng& rng, double mean) {
  const double p0 = std::exp(-mean);
  double p = p0;
  double cum = p0;
  const double u = rng.next_double();
  std::int64_t k = 0;
  while (u > cum) {
    ++k;
    p *= mean / static_cast<double>(k);
    cum += p;
    if (k > 10000) break;  // unreachable for mean < 30; guards fp corner
  }
  return k;
}

// Hormann's PTRS transformed rejection, for mean >= 30.
inline std::int64_t poisson_ptrs(Rng& rng, double mean) {
  const double log_mean = std::log(mean);
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = rng.next_double() - 0.5;
    const double v = rng.next_double();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const double k = kf;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_mean - mean - ln_gamma(k + 1.0))
      return static_cast<std::int64_t>(kf);
  }
}

}  // namespace detail

inline std::int64_t sample_poisson(Rng& rng, double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean))
    throw DomainError("sample_poisson: mean must be finite and positive");
  if (mean < 30.0) return detail::poisson_inversion(rng, mean);
  return detail::poisson_ptrs(rng, mean);
}

// One age by composition: intensity from the gamma mixing law, then a
// Poisson count at that intensity.
inline std::int64_t sample_negbin(Rng& rng, const GammaMixing& mixing) {
  const double theta = sample_gamma(rng, mixing.alpha(), mixing.beta());
  if (theta == 0.0) return 0;  // denormal-flush corner
  return sample_poisson(rng, theta);
}

inline std::vector<std::int64_t> simulate_ages(double alpha, double beta,
                                               std::int64_t n,
                                               std::uint64_t seed) {
  if (n < 1) throw DomainError("simulate_ages: n must be >= 1");
  const GammaMixing mixing(alpha, beta);
  Rng rng(seed);
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) out.push_back(sample_negbin(rng, mixing));
  return out;
}

}  // namespace obsolib

#endif
