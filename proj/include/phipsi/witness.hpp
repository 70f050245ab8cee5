// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phipsi/arith.hpp"
#include "phipsi/bigint.hpp"
#include "phipsi/constants.hpp"
#include "phipsi/error.hpp"
#include "phipsi/exact_ratio.hpp"
#include "phipsi/factorization.hpp"
#include "phipsi/sieve.hpp"

namespace phipsi {

namespace detail {

inline const std::vector<std::uint32_t>& small_primes() {
  static const std::vector<std::uint32_t> primes = base_primes(1'000'000);
  return primes;
}

inline bool strong_probable_prime_u64(std::uint64_t n, std::uint64_t a) {
  a %= n;
  if (a == 0) return true;
  std::uint64_t d = n - 1;
  unsigned s = 0;
  while (!(d & 1)) {
    d >>= 1;
    ++s;
  }
  std::uint64_t y = pow_mod(a, d, n);
  if (y == 1 || y == n - 1) return true;
  for (unsigned r = 1; r < s; ++r) {
    y = mul_mod(y, y, n);
    if (y == n - 1) return true;
  }
  return false;
}

inline bool strong_probable_prime(const big_nat& n, const big_nat& a) {
  big_nat d = n - 1;
  unsigned s = 0;
  while (!bit_test(d, 0)) {
    d >>= 1;
    ++s;
  }
  big_nat y = powm(a, d, n);
  const big_nat n1 = n - 1;
  if (y == 1 || y == n1) return true;
  for (unsigned r = 1; r < s; ++r) {
    y = (y * y) % n;
    if (y == n1) return true;
  }
  return false;
}

/// Jacobi symbol (a/n) for odd positive n.
inline int jacobi(big_nat a, big_nat n) {
  a %= n;
  if (a < 0) a += n;
  int result = 1;
  while (a != 0) {
    while (!bit_test(a, 0)) {
      a >>= 1;
      const unsigned r = static_cast<unsigned>(n % 8);
      if (r == 3 || r == 5) result = -result;
    }
    std::swap(a, n);
    if (a % 4 == 3 && n % 4 == 3) result = -result;
    a %= n;
  }
  return n == 1 ? result : 0;
}

inline big_nat mod_norm(const big_nat& v, const big_nat& n) {
  big_nat r = v % n;
  if (r < 0) r += n;
  return r;
}

inline big_nat half_mod(big_nat v, const big_nat& n) {
  if (bit_test(v, 0)) v += n;
  return v >> 1;
}

/// Strong Lucas probable-prime test with Selfridge parameters. n odd, not a perfect square.
inline bool strong_lucas_probable_prime(const big_nat& n) {
  long long D = 5;
  for (;;) {
    const int j = jacobi(big_nat(D), n);
    if (j == -1) break;
    if (j == 0 && big_nat(D < 0 ? -D : D) != n) return false;
    D = D > 0 ? -(D + 2) : -(D - 2);
  }
  const big_nat bigD(D);
  const big_nat Q = mod_norm(big_nat((1 - D) / 4), n);

  big_nat d = n + 1;
  unsigned s = 0;
  while (!bit_test(d, 0)) {
    d >>= 1;
    ++s;
  }

  big_nat U = 1, V = 1, Qk = Q;  // P = 1
  for (int bit = static_cast<int>(msb(d)) - 1; bit >= 0; --bit) {
    U = (U * V) % n;
    V = mod_norm(V * V - 2 * Qk, n);
    Qk = (Qk * Qk) % n;
    if (bit_test(d, static_cast<unsigned>(bit))) {
      const big_nat U2 = half_mod(mod_norm(U + V, n), n);
      const big_nat V2 = half_mod(mod_norm(bigD * U + V, n), n);
      U = U2;
      V = V2;
      Qk = (Qk * Q) % n;
    }
  }
  if (U == 0 || V == 0) return true;
  for (unsigned r = 1; r < s; ++r) {
    V = mod_norm(V * V - 2 * Qk, n);
    if (V == 0) return true;
    Qk = (Qk * Qk) % n;
  }
  return false;
}

inline double big_log(const big_nat& v) {
  if (v <= 0) throw argument_error("log of non-positive value");
  const unsigned bits = static_cast<unsigned>(msb(v)) + 1;
  if (bits <= 1000) return std::log(v.convert_to<double>());
  const unsigned shift = bits - 64;
  return std::log(static_cast<big_nat>(v >> shift).convert_to<double>()) + shift * std::log(2.0);
}

}  // namespace detail

/// Deterministic below 2^64 (fixed witness set). Above, a base-2 strong test, a strong Lucas
/// test and `rounds` further bases from a fixed-seed generator.
inline bool is_probable_prime(const big_nat& n, unsigned rounds = 40) {
  if (n < 2) return false;
  for (std::uint32_t p : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  if (fits_u64(n)) {
    const auto v = static_cast<std::uint64_t>(n);
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull})
      if (!detail::strong_probable_prime_u64(v, a)) return false;
    return true;
  }
  if (!detail::strong_probable_prime(n, 2)) return false;
  const big_nat r = sqrt(n);
  if (r * r == n) return false;
  if (!detail::strong_lucas_probable_prime(n)) return false;
  std::mt19937_64 gen(0x9e3779b97f4a7c15ull);
  const big_nat span = n - 3;
  for (unsigned i = 0; i < rounds; ++i) {
    big_nat a = 0;
    for (int w = 0; w < 4; ++w) a = (a << 64) | big_nat(gen());
    a = a % span + 2;
    if (!detail::strong_probable_prime(n, a)) return false;
  }
  return true;
}

struct progression_prime {
  big_nat prime;
  std::uint64_t index = 0;        // prime = residue + index * modulus
  double observed_exponent = 0;   // log p / log m
};

/// Least prime p = a (mod m), scanning a mod m, a mod m + m, ...
inline progression_prime least_prime_in_progression(const big_nat& m, const big_nat& a, unsigned rounds = 40,
                                                    std::uint64_t max_candidates = 10'000'000) {
  if (m < 2) throw argument_error("least_prime_in_progression: modulus must be >= 2");
  const big_nat r = detail::mod_norm(a, m);
  if (gcd(r, m) != 1) throw argument_error("least_prime_in_progression: residue not coprime to modulus");
  big_nat candidate = r;
  for (std::uint64_t k = 0; k < max_candidates; ++k, candidate += m) {
    if (is_probable_prime(candidate, rounds))
      return {candidate, k, detail::big_log(candidate) / detail::big_log(m)};
  }
  throw budget_error("least_prime_in_progression: no prime among the first " + std::to_string(max_candidates) +
                     " candidates");
}

struct factor_budget {
  std::uint64_t trial_limit = 1'000'000;
  std::uint64_t rho_iterations = std::uint64_t{1} << 26;  // summed over every split attempt
  unsigned rounds = 40;
};

namespace detail {

struct u64_ops {
  std::uint64_t n;
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const { return mul_mod(a, b, n); }
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const { return static_cast<std::uint64_t>((u128(a) + b) % n); }
  static std::uint64_t diff(std::uint64_t a, std::uint64_t b) { return a > b ? a - b : b - a; }
  static std::uint64_t gcd(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }
};

struct big_ops {
  big_nat n;
  big_nat mul(const big_nat& a, const big_nat& b) const { return (a * b) % n; }
  big_nat add(const big_nat& a, const big_nat& b) const { return (a + b) % n; }
  static big_nat diff(const big_nat& a, const big_nat& b) { return a > b ? big_nat(a - b) : big_nat(b - a); }
  static big_nat gcd(const big_nat& a, const big_nat& b) { return boost::multiprecision::gcd(a, b); }
};

/// Brent's variant of Pollard rho. Returns a nontrivial divisor, or n when this constant fails.
template <class Int, class Ops>
Int brent_rho(const Ops& ops, const Int& n, const Int& c, std::uint64_t& iterations, std::uint64_t limit) {
  auto f = [&](const Int& v) { return ops.add(ops.mul(v, v), c); };
  Int y = 2, x = 2, ys = 2, q = 1, g = 1;
  std::uint64_t r = 1;
  constexpr std::uint64_t m = 128;
  do {
    x = y;
    for (std::uint64_t i = 0; i < r; ++i) y = f(y);
    std::uint64_t k = 0;
    do {
      ys = y;
      const std::uint64_t steps = std::min(m, r - k);
      for (std::uint64_t i = 0; i < steps; ++i) {
        y = f(y);
        q = ops.mul(q, Ops::diff(x, y));
      }
      iterations += steps;
      if (iterations > limit) throw budget_error("factor_big: Pollard rho iteration budget exhausted");
      g = Ops::gcd(q, n);
      k += m;
    } while (k < r && g == 1);
    r *= 2;
  } while (g == 1);
  if (g == n) {
    do {
      ys = f(ys);
      g = Ops::gcd(Ops::diff(x, ys), n);
      if (++iterations > limit) throw budget_error("factor_big: Pollard rho iteration budget exhausted");
    } while (g == 1);
  }
  return g;
}

inline big_nat split(const big_nat& n, std::uint64_t& iterations, std::uint64_t limit) {
  for (std::uint64_t c = 1;; ++c) {
    if (fits_u64(n)) {
      const auto v = static_cast<std::uint64_t>(n);
      const std::uint64_t d = brent_rho<std::uint64_t>(u64_ops{v}, v, c, iterations, limit);
      if (d != v) return big_nat(d);
    } else {
      big_nat d = brent_rho<big_nat>(big_ops{n}, n, big_nat(c), iterations, limit);
      if (d != n) return d;
    }
  }
}

}  // namespace detail

/// Full factorization of n: hinted primes first, then trial division, then Pollard-Brent rho
/// with recursive splitting. Every reported prime passes is_probable_prime.
inline big_factorization factor_big(const big_nat& n, const std::optional<big_factorization>& hint = std::nullopt,
                                    const factor_budget& budget = {}) {
  if (n < 1) throw argument_error("factor_big: n must be >= 1");
  std::vector<prime_power<big_nat>> found;
  big_nat rest = n;
  auto divide_out = [&](const big_nat& p) {
    unsigned e = 0;
    while (rest % p == 0) {
      rest /= p;
      ++e;
    }
    if (e) found.push_back({p, e});
  };

  if (hint)
    for (const auto& pp : *hint) divide_out(pp.prime);

  for (std::uint32_t p : detail::small_primes()) {
    if (p > budget.trial_limit) break;
    if (big_nat(p) * p > rest) break;
    if (fits_u64(rest)) {
      auto v = static_cast<std::uint64_t>(rest);
      if (v % p) continue;
      unsigned e = 0;
      while (v % p == 0) {
        v /= p;
        ++e;
      }
      rest = v;
      found.push_back({big_nat(p), e});
    } else if (rest % p == 0) {
      divide_out(big_nat(p));
    }
  }

  std::vector<big_nat> pending;
  if (rest > 1) pending.push_back(rest);
  std::uint64_t iterations = 0;
  while (!pending.empty()) {
    big_nat c = std::move(pending.back());
    pending.pop_back();
    if (c == 1) continue;
    if (is_probable_prime(c, budget.rounds)) {
      found.push_back({c, 1});
      continue;
    }
    const big_nat d = detail::split(c, iterations, budget.rho_iterations);
    pending.push_back(d);
    pending.push_back(c / d);
  }

  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.prime < b.prime; });
  big_factorization::storage merged;
  for (auto& pp : found) {
    if (!merged.empty() && merged.back().prime == pp.prime)
      merged.back().exponent += pp.exponent;
    else
      merged.push_back(std::move(pp));
  }
  return big_factorization::from_canonical(std::move(merged));
}

// ---------------------------------------------------------------------------------------------
// Extremal construction: P = 1, Q = -1 (mod M(x)), n = PQ.

enum class witness_mode { exact, bound_only };

inline std::string to_string(witness_mode m) { return m == witness_mode::exact ? "exact" : "bound_only"; }

struct witness_options {
  unsigned rounds = 40;
  std::uint64_t exact_cap = 40;
  std::uint64_t max_candidates = 10'000'000;
  factor_budget factoring;
};

struct witness_report {
  std::uint64_t x = 0;
  lcm_object M;
  big_nat P, Q, n, kP, kQ;
  exact_ratio lhs_34;   // psi(phi(n)) / phi(n), or its lower bound prod_{p | M}(1 + 1/p)
  exact_ratio rhs_34;   // prod_{p <= x} (1 + 1/p)
  exact_ratio lhs_36;   // phi(psi(n)) / psi(n), or its upper bound prod_{p | M}(1 - 1/p)
  exact_ratio rhs_36;   // prod_{p <= x} (1 - 1/p)
  std::optional<exact_ratio> I_value;
  witness_mode mode = witness_mode::exact;
  std::optional<std::string> failed_stage;

  std::optional<big_factorization> phi_factors, psi_factors;
  bool p_equals_q = false;
  bool n_squarefree = true;
  double log_M = 0, log_n = 0;
  bool log_n_below_23x = true;
  double exponent_P = 0, exponent_Q = 0;
  // I(n) psi(n)/phi(n) (exact mode) or its lower bound, against (6/pi^2) e^(2 gamma) log_2^2 n.
  exact_ratio amplified;
  double amplified_target = 0;

  bool holds_34() const { return lhs_34 >= rhs_34; }
  bool holds_36() const { return lhs_36 <= rhs_36; }
  bool chain_holds() const { return holds_34() && holds_36(); }
};

inline witness_report construct_witness(std::uint64_t x, witness_mode mode, const witness_options& opts = {}) {
  if (x < 2) throw argument_error("construct_witness: x must be >= 2");
  if (mode == witness_mode::exact && x > opts.exact_cap)
    throw budget_error("construct_witness: exact mode is capped at x <= " + std::to_string(opts.exact_cap));

  witness_report r;
  r.x = x;
  r.mode = mode;
  r.M = lcm_one_to(x);
  const big_nat M = r.M.value();
  const auto m_factors = widen(r.M.factors);

  r.P = least_prime_in_progression(M, 1, opts.rounds, opts.max_candidates).prime;
  r.Q = least_prime_in_progression(M, M - 1, opts.rounds, opts.max_candidates).prime;
  r.n = r.P * r.Q;
  r.kP = (r.P - 1) / M;
  r.kQ = (r.Q + 1) / M;
  r.p_equals_q = r.P == r.Q;
  r.n_squarefree = !r.p_equals_q;

  big_nat rad = 1, plus = 1, minus = 1;
  for (const auto& pp : r.M.factors) {
    rad *= pp.prime;
    plus *= pp.prime + 1;
    minus *= pp.prime - 1;
  }
  // Every prime <= x divides M(x), so both right-hand sides are products over p | M(x).
  r.rhs_34 = exact_ratio(plus, rad);
  r.rhs_36 = exact_ratio(minus, rad);

  r.log_M = detail::big_log(M);
  r.log_n = detail::big_log(r.n);
  r.log_n_below_23x = r.log_n < 23.0 * static_cast<double>(x);
  r.exponent_P = detail::big_log(r.P) / r.log_M;
  r.exponent_Q = detail::big_log(r.Q) / r.log_M;
  const double l2n = std::log(r.log_n);
  r.amplified_target = leading_constant() * l2n * l2n;

  auto use_bounds = [&] {
    r.lhs_34 = r.rhs_34;
    r.lhs_36 = r.rhs_36;
    r.I_value.reset();
    r.phi_factors.reset();
    r.psi_factors.reset();
    r.amplified = r.lhs_34 / r.lhs_36;
  };

  if (mode == witness_mode::bound_only) {
    use_bounds();
    return r;
  }

  const big_factorization nf = r.p_equals_q ? big_factorization::prime(r.P, 2)
                                            : big_factorization{{std::min(r.P, r.Q), 1}, {std::max(r.P, r.Q), 1}};
  const char* stage = "factor phi(n)";
  try {
    // P - 1 and Q + 1 are multiples of M(x); the other two shifts get no structural help.
    const auto phi_n = phi_factored(nf, [&](const big_nat& p) {
      return p == r.P ? factor_big(p - 1, m_factors, opts.factoring) : factor_big(p - 1, std::nullopt, opts.factoring);
    });
    stage = "factor psi(n)";
    const auto psi_n = psi_factored(nf, [&](const big_nat& p) {
      return p == r.Q ? factor_big(p + 1, m_factors, opts.factoring) : factor_big(p + 1, std::nullopt, opts.factoring);
    });
    const big_nat phi_v = phi_n.value(), psi_v = psi_n.value();
    const big_nat psi_phi = psi(phi_n), phi_psi = phi(psi_n);
    r.lhs_34 = exact_ratio(psi_phi, phi_v);
    r.lhs_36 = exact_ratio(phi_psi, psi_v);
    r.I_value = exact_ratio(psi_phi, phi_psi);
    r.amplified = *r.I_value * exact_ratio(psi_v, phi_v);
    r.phi_factors = phi_n;
    r.psi_factors = psi_n;
  } catch (const budget_error&) {
    r.failed_stage = stage;
    r.mode = witness_mode::bound_only;
    use_bounds();
  }
  return r;
}

namespace detail {

inline nlohmann::json ratio_json(const exact_ratio& q) { return {{"num", q.num().str()}, {"den", q.den().str()}}; }

inline nlohmann::json factors_json(const big_factorization& f) {
  auto arr = nlohmann::json::array();
  for (const auto& pp : f) arr.push_back({{"prime", pp.prime.str()}, {"exponent", pp.exponent}});
  return arr;
}

}  // namespace detail

inline nlohmann::json witness_json(const witness_report& r) {
  nlohmann::json j;
  j["x"] = std::to_string(r.x);
  j["mode"] = to_string(r.mode);
  j["M"] = {{"value", r.M.value().str()}, {"factors", detail::factors_json(widen(r.M.factors))}};
  j["P"] = r.P.str();
  j["Q"] = r.Q.str();
  j["n"] = r.n.str();
  j["kP"] = r.kP.str();
  j["kQ"] = r.kQ.str();
  j["lhs_34"] = detail::ratio_json(r.lhs_34);
  j["rhs_34"] = detail::ratio_json(r.rhs_34);
  j["lhs_36"] = detail::ratio_json(r.lhs_36);
  j["rhs_36"] = detail::ratio_json(r.rhs_36);
  j["I_value"] = r.I_value ? detail::ratio_json(*r.I_value) : nlohmann::json(nullptr);
  j["amplified"] = detail::ratio_json(r.amplified);
  j["amplified_value"] = r.amplified.to_double();
  j["amplified_target"] = r.amplified_target;
  if (r.phi_factors) j["phi_n_factors"] = detail::factors_json(*r.phi_factors);
  if (r.psi_factors) j["psi_n_factors"] = detail::factors_json(*r.psi_factors);
  j["log_M"] = r.log_M;
  j["log_n"] = r.log_n;
  j["exponent_P"] = r.exponent_P;
  j["exponent_Q"] = r.exponent_Q;
  j["flags"] = {{"chain_34", r.holds_34() ? "holds" : "violated"},
                {"chain_36", r.holds_36() ? "holds" : "violated"},
                {"p_equals_q", r.p_equals_q ? "true" : "false"},
                {"n_squarefree", r.n_squarefree ? "true" : "false"},
                {"log_n_below_23x", r.log_n_below_23x ? "true" : "false"}};
  j["failed_stage"] = r.failed_stage ? nlohmann::json(*r.failed_stage) : nlohmann::json(nullptr);
  return j;
}

}  // namespace phipsi
