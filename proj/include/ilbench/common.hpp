#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ilbench {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Deterministic pseudo-random source. All randomized operations take an
/// explicit Rng so results are pure functions of (inputs, seed).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)), seed_material_(mix(seed)) {}

  /// Child stream for a labeled sub-task (sweep cell, rotation index, ...).
  /// Streams derived from distinct keys are independent for all practical
  /// purposes and do not advance this generator.
  Rng derive(std::uint64_t key) const {
    return Rng(mix(seed_material_ ^ (0x9e3779b97f4a7c15ULL + key)), key);
  }

  std::uint64_t next_u64() { return engine_(); }

  double uniform() {  // in [0,1)
    return (next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool coin() { return (next_u64() & 1ULL) != 0; }

  int uniform_int(int n) {  // in {0,...,n-1}
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  /// Standard normal via Marsaglia's polar method (self-contained so that
  /// streams do not depend on the standard library's distribution internals).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
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
    have_spare_ = true;
    return u * f;
  }

  Vec normal_vec(int d) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = normal();
    return v;
  }

  Vec unit_sphere(int d) {
    Vec v = normal_vec(d);
    double n = v.norm();
    while (n == 0.0) {
      v = normal_vec(d);
      n = v.norm();
    }
    return v / n;
  }

  Vec uniform_ball(int d, double radius = 1.0) {
    const double r = radius * std::pow(uniform(), 1.0 / d);
    return r * unit_sphere(d);
  }

 private:
  Rng(std::uint64_t mixed, std::uint64_t) : engine_(mixed), seed_material_(mixed) {}

  static std::uint64_t mix(std::uint64_t z) {  // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  std::uint64_t seed_material_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace ilbench
