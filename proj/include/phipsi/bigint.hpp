// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace phipsi {

using big_nat = boost::multiprecision::cpp_int;
using u128 = unsigned __int128;

inline bool fits_u64(const big_nat& v) {
  return v >= 0 && v <= std::numeric_limits<std::uint64_t>::max();
}

inline std::string to_decimal(const big_nat& v) { return v.str(); }

inline big_nat to_big(std::uint64_t v) { return big_nat(v); }
inline const big_nat& to_big(const big_nat& v) { return v; }

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

inline std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

}  // namespace phipsi
