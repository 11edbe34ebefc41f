#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "gge/common.hpp"

namespace gge {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives independent stream seeds (per chain / per purpose) from one run seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 0x51ed270b0a3f8e1dULL));
}

// mt19937_64 driver with explicitly coded transforms so seeded streams are
// reproducible across standard libraries (std::*_distribution sequences are
// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1) : g_(seed) {}

  std::uint64_t raw() { return g_(); }

  double uniform() {  // (0,1), never exactly 0
    double u = (g_() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double th = 2.0 * kPi * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
  }

  // Marsaglia–Tsang; shape > 0, unit rate.
  double gamma(double shape) {
    require(shape > 0.0, ErrorCode::DomainError, "gamma shape must be positive");
    if (shape < 1.0) {
      double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }
  double gamma(double shape, double rate) { return gamma(shape) / rate; }

  // chi_k / sqrt(2) == sqrt(Gamma(k/2)); plain chi_k = sqrt(2 Gamma(k/2)).
  double chi(double k) { return std::sqrt(2.0 * gamma(0.5 * k)); }

  // Beta(1, a): density a (1-u)^{a-1} on (0,1).
  double beta1(double a) { return 1.0 - std::pow(uniform(), 1.0 / a); }

 private:
  std::mt19937_64 g_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gge
