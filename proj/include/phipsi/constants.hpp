// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "phipsi/error.hpp"
#include "phipsi/iterated_log.hpp"
#include "phipsi/sieve.hpp"
#include "phipsi/summation.hpp"

namespace phipsi {

inline constexpr double euler_gamma_value = 0.57721566490153286060651209;
inline constexpr double pi_value = 3.14159265358979323846264338;

constexpr double euler_gamma() { return euler_gamma_value; }

/// 6/pi^2 * e^(2 gamma), the constant in front of log_2^2 n and log_3^2 x.
inline double leading_constant() { return 6.0 / (pi_value * pi_value) * std::exp(2.0 * euler_gamma_value); }

/// Truncated product over primes up to some cutoff. tail_bound bounds |log(limit / value)|.
struct product_estimate {
  std::uint64_t cutoff = 0;  // largest prime included
  double value = 1.0;
  double tail_bound = 0.0;
};

namespace detail {

/// exp of the compensated sum of log(term(p)) over primes p <= limit.
template <class Term>
product_estimate prime_log_product(std::uint64_t limit, Term&& log_term) {
  if (limit < 2) throw argument_error("product over primes needs cutoff >= 2");
  compensated_sum sum;
  std::uint64_t largest = 0;
  for_each_prime(2, limit + 1, [&](std::uint64_t p) {
    sum.add(log_term(static_cast<double>(p)));
    largest = p;
  });
  return {largest, std::exp(sum.value()), 0.0};
}

}  // namespace detail

/// c_0 = prod_p (1 - 2/(p(p+1))) truncated at `cutoff`. The tail of the log-sum is at most
/// sum_{n > cutoff} 2/(n(n+1)) / (1 - 1/3) <= 3/cutoff.
inline product_estimate c0(std::uint64_t cutoff) {
  auto est = detail::prime_log_product(cutoff, [](double p) { return std::log1p(-2.0 / (p * (p + 1.0))); });
  est.tail_bound = 3.0 / static_cast<double>(cutoff);
  return est;
}

struct mertens_estimate {
  product_estimate product;  // exact partial product, so tail_bound is 0
  double predicted;

  double ratio() const { return product.value / predicted; }
};

/// prod_{p <= x} (1 - 1/p) against e^(-gamma)/log x.
inline mertens_estimate mertens_minus(std::uint64_t x) {
  auto est = detail::prime_log_product(x, [](double p) { return std::log1p(-1.0 / p); });
  return {est, std::exp(-euler_gamma_value) / std::log(static_cast<double>(x))};
}

/// prod_{p <= x} (1 + 1/p) against (6 e^gamma / pi^2) log x.
inline mertens_estimate mertens_plus(std::uint64_t x) {
  auto est = detail::prime_log_product(x, [](double p) { return std::log1p(1.0 / p); });
  return {est, 6.0 * std::exp(euler_gamma_value) / (pi_value * pi_value) * std::log(static_cast<double>(x))};
}

}  // namespace phipsi
