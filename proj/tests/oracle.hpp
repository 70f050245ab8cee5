// SPDX-License-Identifier: Apache-2.0

// Brute-force reference implementations. They share nothing with the library's sieve or
// merge paths: every value is re-factored from scratch by trial division.

#pragma once

#include <cstdint>
#include <map>
#include <numeric>

namespace oracle {

using u64 = std::uint64_t;
using factor_map = std::map<u64, unsigned>;

inline factor_map trial_division(u64 n) {
  factor_map f;
  for (u64 d = 2; d * d <= n; ++d)
    while (n % d == 0) {
      ++f[d];
      n /= d;
    }
  if (n > 1) ++f[n];
  return f;
}

inline u64 phi(u64 n) {
  u64 r = n;
  for (auto [p, e] : trial_division(n)) r = r / p * (p - 1);
  return r;
}

inline u64 psi(u64 n) {
  u64 r = n;
  for (auto [p, e] : trial_division(n)) r = r / p * (p + 1);
  return r;
}

/// Totient by counting, for small n.
inline u64 phi_by_count(u64 n) {
  u64 c = 0;
  for (u64 k = 1; k <= n; ++k)
    if (std::gcd(k, n) == 1) ++c;
  return c;
}

inline bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

}  // namespace oracle
