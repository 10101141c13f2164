#ifndef OBSOLIB_TESTUTIL_HPP
#define OBSOLIB_TESTUTIL_HPP

#include <cstdint>
#include <random>

namespace testutil {

// Deterministic uniform source for property-style tests.
class Rand {
public:
  explicit Rand(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    const double u = (eng_() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(eng_() % static_cast<std::uint64_t>(
                                                       hi - lo + 1));
  }

private:
  std::mt19937_64 eng_;
};

}  // namespace testutil

#endif
