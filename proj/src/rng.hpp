#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace altgda::rng {

// Portable draws on top of mt19937_64 (the <random> distributions are
// implementation-defined).

inline double unit(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline std::uint64_t bounded(std::mt19937_64& g, std::uint64_t range) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % range;
  std::uint64_t r;
  do {
    r = g();
  } while (r >= limit);
  return r % range;
}

inline double exponential(std::mt19937_64& g) { return -std::log1p(-unit(g)); }

class Normal {
 public:
  double operator()(std::mt19937_64& g) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - unit(g);
    const double u2 = unit(g);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace altgda::rng
