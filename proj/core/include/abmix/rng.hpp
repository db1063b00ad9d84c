#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "abmix/errors.hpp"

namespace abmix {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Deterministic random stream. All distributions are implemented in-repo so a
/// given seed produces the same draws on every platform and stdlib.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(detail::splitmix64(seed ^ 0xABF00D5EEDULL)) {}

  /// Independent child stream for work item `index` under `master`; the mapping
  /// is pure so parallel schedules cannot change what any item sees.
  static Rng substream(std::uint64_t master, std::uint64_t index) {
    return Rng(detail::splitmix64(master) ^ detail::splitmix64(index * 0x9E3779B97F4A7C15ULL + 0x1234ABCDULL));
  }

  /// Uniform on [0, 1).
  double uniform() {
    return (eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Inclusive integer range.
  long uniform_int(long lo, long hi) {
    if (hi < lo) throw ConfigError("uniform_int: empty range");
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(eng_() % span);
  }

  /// Standard normal via the Marsaglia polar method (cached spare).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double normal(double mu, double sd) { return mu + sd * normal(); }

  double exponential(double rate) {
    if (rate <= 0.0) throw DomainError("exponential: rate must be > 0");
    return -std::log1p(-uniform()) / rate;
  }

  /// Marsaglia-Tsang for shape >= 1, with the U^(1/a) boost below 1.
  double gamma(double shape) {
    if (shape <= 0.0) throw DomainError("gamma: shape must be > 0");
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

  std::vector<double> dirichlet(std::span<const double> alpha) {
    std::vector<double> out(alpha.size());
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      out[i] = gamma(alpha[i]);
      total += out[i];
    }
    for (double& v : out) v /= total;
    return out;
  }

  /// Index in [0, K) with probabilities `probs` (need not be exactly normalized).
  int categorical(std::span<const double> probs) {
    double total = 0.0;
    for (double p : probs) total += p;
    double u = uniform() * total;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
      u -= probs[k];
      if (u < 0.0) return static_cast<int>(k);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  /// Normal(mu, sd) truncated to (lower, inf) by rejection against the
  /// untruncated normal. `attempts`, when given, accumulates trial counts so
  /// callers can log acceptance rates.
  double truncated_normal_lower(double mu, double sd, double lower,
                                std::uint64_t* attempts = nullptr) {
    for (;;) {
      if (attempts) ++*attempts;
      const double x = normal(mu, sd);
      if (x > lower) return x;
    }
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace abmix
