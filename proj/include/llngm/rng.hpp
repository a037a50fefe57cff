#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace llngm {

// Deterministic random stream. All variate generation is implemented here
// rather than with std::*_distribution, so a given seed produces the same
// draws regardless of standard-library version. Each chain/thread owns its
// own stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal, Box-Muller with one cached draw.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double exponential() { return -std::log(uniform()); }

  // Gamma(shape, rate 1), Marsaglia-Tsang squeeze; shape<1 via the boost
  // X = X' U^{1/shape} with X' ~ Gamma(shape+1).
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Derive a child seed from a base seed and two indices (splitmix64 mixing).
  static std::uint64_t derive(std::uint64_t base, std::uint64_t a,
                              std::uint64_t b = 0) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (a + 1) +
                      0xbf58476d1ce4e5b9ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace llngm
