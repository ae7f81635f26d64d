#pragma once

// Portable seeded sampling. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; doubles are formed from the top 53 bits
// and points are drawn by cube rejection, so sample streams reproduce
// bit-for-bit on every conforming platform.

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace finsler {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Uniform in the closed ball of radius r.
inline Eigen::VectorXd uniform_in_ball(Rng& rng, int n, double r) {
  Eigen::VectorXd p(n);
  for (;;) {
    for (int i = 0; i < n; ++i) p[i] = rng.uniform(-1.0, 1.0);
    if (p.squaredNorm() <= 1.0) return r * p;
  }
}

/// Uniform on the unit sphere S^{n-1}.
inline Eigen::VectorXd uniform_on_sphere(Rng& rng, int n) {
  Eigen::VectorXd p(n);
  for (;;) {
    for (int i = 0; i < n; ++i) p[i] = rng.uniform(-1.0, 1.0);
    const double r2 = p.squaredNorm();
    if (r2 <= 1.0 && r2 > 1e-4) return p / std::sqrt(r2);
  }
}

}  // namespace finsler
