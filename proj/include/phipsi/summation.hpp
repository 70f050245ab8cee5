// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

namespace phipsi {

/// Neumaier-compensated running sum. Deterministic for a fixed order of add() and merge() calls.
class compensated_sum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }

  void merge(const compensated_sum& other) {
    add(other.sum_);
    add(other.comp_);
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace phipsi
