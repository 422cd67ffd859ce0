// SupportSet: the carrier relation T of an instance, a subset of the product
// grid X x Y on which every measure of the instance lives.

#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "altproj/errors.hpp"

namespace altproj {

enum class Axis { X, Y };

inline Axis other_axis(Axis a) { return a == Axis::X ? Axis::Y : Axis::X; }

inline char axis_name(Axis a) { return a == Axis::X ? 'x' : 'y'; }

/// The set T of admissible pairs. Pairs are stored in lexicographic
/// (x-major) order. Invariants: T is nonempty and every x in X and every
/// y in Y occurs in at least one pair, i.e. the grid is already pruned so
/// both marginals of a fully supported measure are fully supported.
class SupportSet {
 public:
  SupportSet(int nx, int ny, std::vector<std::pair<int, int>> pairs)
      : nx_(nx), ny_(ny), pairs_(std::move(pairs)) {
    if (nx_ <= 0 || ny_ <= 0) {
      throw SpecValidationError("support dimensions",
                                "nx and ny must be positive");
    }
    if (pairs_.empty()) {
      throw SpecValidationError("support nonempty", "no pairs given");
    }
    std::sort(pairs_.begin(), pairs_.end());
    mask_.assign(static_cast<std::size_t>(nx_) * ny_, 0);
    for (auto [x, y] : pairs_) {
      if (x < 0 || x >= nx_ || y < 0 || y >= ny_) {
        throw SpecValidationError(
            "support pair in range",
            "(" + std::to_string(x) + "," + std::to_string(y) + ")");
      }
      if (mask_[index(x, y)]) {
        throw SpecValidationError(
            "support pairs distinct",
            "duplicate (" + std::to_string(x) + "," + std::to_string(y) + ")");
      }
      mask_[index(x, y)] = 1;
    }
    std::vector<char> seen_x(nx_, 0), seen_y(ny_, 0);
    for (auto [x, y] : pairs_) {
      seen_x[x] = 1;
      seen_y[y] = 1;
    }
    for (int x = 0; x < nx_; ++x) {
      if (!seen_x[x]) {
        throw SpecValidationError("support covers every x state",
                                  "x=" + std::to_string(x) + " has no pair");
      }
    }
    for (int y = 0; y < ny_; ++y) {
      if (!seen_y[y]) {
        throw SpecValidationError("support covers every y state",
                                  "y=" + std::to_string(y) + " has no pair");
      }
    }
  }

  static SupportSet full(int nx, int ny) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(nx) * ny);
    for (int x = 0; x < nx; ++x) {
      for (int y = 0; y < ny; ++y) pairs.emplace_back(x, y);
    }
    return SupportSet(nx, ny, std::move(pairs));
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int dim(Axis a) const { return a == Axis::X ? nx_ : ny_; }
  int size() const { return static_cast<int>(pairs_.size()); }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(x) * ny_ + y;
  }
  bool contains(int x, int y) const { return mask_[index(x, y)] != 0; }

  /// Pairs of T in lexicographic order; fixes the summation order used
  /// throughout the library.
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

  bool operator==(const SupportSet& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && mask_ == o.mask_;
  }
  bool operator!=(const SupportSet& o) const { return !(*this == o); }

 private:
  int nx_;
  int ny_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<char> mask_;
};

}  // namespace altproj
