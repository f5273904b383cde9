#pragma once

#include "netgame/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace netgame {

/// Seeded random source with hand-rolled conversions so that runs are
/// reproducible bit-for-bit regardless of the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in {lo, ..., hi} inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    auto draw = static_cast<std::int64_t>(
        static_cast<double>(span) * uniform());
    if (draw >= static_cast<std::int64_t>(span)) draw = span - 1;
    return lo + draw;
  }

  /// Standard normal via Box-Muller (deterministic, no library distribution).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Index drawn from the categorical distribution given by `probs`
  /// (assumed nonnegative, summing to ~1; the last bin absorbs rounding).
  int categorical(const std::vector<double>& probs) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  Vec uniform_vec(Eigen::Index size, double lo, double hi) {
    Vec v(size);
    for (Eigen::Index i = 0; i < size; ++i) v[i] = uniform(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace netgame
