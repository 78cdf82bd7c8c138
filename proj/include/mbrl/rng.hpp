#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace mbrl {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent stream, e.g. one parallel task or grid cell.
inline uint64_t derive_seed(uint64_t seed, uint64_t salt) {
  return splitmix64(splitmix64(seed) ^ splitmix64(salt + 0x51ed2701ULL));
}

// Deterministic random source. The engine is the standard-specified
// mt19937_64; the distributions are implemented here so that sampled
// sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on {0, ..., n-1}.
  int uniform_int(int n) {
    int k = int(uniform() * n);
    return k >= n ? n - 1 : k;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential() { return -std::log(uniform_pos()); }

  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Marsaglia-Tsang; shapes below one go through the boost transform.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be positive");
    if (shape < 1.0) {
      const double boost = std::pow(uniform_pos(), 1.0 / shape);
      return gamma(shape + 1.0) * boost;
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
      const double u = uniform_pos();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    const double s = x + y;
    if (s <= 0.0) return 0.5;  // extreme underflow with tiny shapes
    return x / s;
  }

  void dirichlet(std::span<const double> alpha, std::span<double> out) {
    double sum = 0.0;
    for (size_t i = 0; i < alpha.size(); ++i) {
      out[i] = gamma(alpha[i]);
      sum += out[i];
    }
    if (sum <= 0.0) {
      const double u = 1.0 / double(alpha.size());
      for (size_t i = 0; i < alpha.size(); ++i) out[i] = u;
      return;
    }
    for (size_t i = 0; i < alpha.size(); ++i) out[i] /= sum;
  }

  int categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return int(i);
    }
    return int(probs.size()) - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mbrl
