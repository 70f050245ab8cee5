// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>

#include "phipsi/error.hpp"

namespace phipsi {

/// Natural log applied k times. Throws domain_error as soon as a log argument is not positive.
inline double iterated_log(double x, unsigned k) {
  if (k == 0) throw argument_error("iterated_log: k must be positive");
  double v = x;
  for (unsigned i = 0; i < k; ++i) {
    if (!(v > 0.0))
      throw domain_error("iterated_log: log_" + std::to_string(k) + " undefined at " + std::to_string(x));
    v = std::log(v);
  }
  return v;
}

/// c1 * log_2 x / log_3 x; defined for x > e^e.
inline double lcm_threshold(double x, double c1) {
  if (!(c1 > 0.0)) throw argument_error("c1 must be positive");
  const double l3 = iterated_log(x, 3);
  if (!(l3 > 0.0)) throw domain_error("g(x) needs x > e^e");
  return c1 * iterated_log(x, 2) / l3;
}

}  // namespace phipsi
