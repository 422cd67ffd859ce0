// Small numeric utilities: compensated summation and a deterministic RNG.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace altproj {

/// Neumaier-compensated accumulator. All reductions in the library sum in
/// fixed index order through this, so results are reproducible bit for bit.
class NeumaierSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(const std::vector<double>& values) {
  NeumaierSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

/// mt19937_64 with hand-rolled variate mappings. The standard distributions
/// are implementation-defined, so seeded streams would not be portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  /// Uniform integer in [0, n).
  int below(int n) {
    return static_cast<int>(eng_() % static_cast<std::uint64_t>(n));
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace altproj
