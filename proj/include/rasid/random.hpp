#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rasid {

/// Seeded generator with platform-stable output.
///
/// std::mt19937_64 is fully specified by the standard; the distributions in
/// <random> are not, so the uniform and normal transforms live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Student-t with integer degrees of freedom, rescaled to unit variance
  /// (requires dof >= 3).
  double student_t_unit(int dof) {
    double chi2 = 0.0;
    for (int i = 0; i < dof; ++i) {
      const double z = normal();
      chi2 += z * z;
    }
    const double t = normal() / std::sqrt(chi2 / dof);
    return t * std::sqrt((dof - 2.0) / dof);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rasid
