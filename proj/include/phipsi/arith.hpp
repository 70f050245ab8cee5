// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <concepts>
#include <cstdint>
#include <map>
#include <string>

#include "phipsi/error.hpp"
#include "phipsi/exact_ratio.hpp"
#include "phipsi/factorization.hpp"

namespace phipsi {

/// Anything that can factor naturals in its range: spf_index, the big-integer factorer, test oracles.
template <class Ctx, class Int = std::uint64_t>
concept factor_context = requires(const Ctx& ctx, const Int& n) {
  { ctx.factor(n) } -> std::convertible_to<basic_factorization<Int>>;
};

namespace detail {

template <class Out>
void checked_mul(Out& acc, const Out& v) {
  if constexpr (std::same_as<Out, std::uint64_t>) {
    if (__builtin_mul_overflow(acc, v, &acc)) throw resource_error("value exceeds 64 bits");
  } else {
    acc *= v;
  }
}

template <class Out, class Int>
Out multiplicative_value(const basic_factorization<Int>& f, bool plus) {
  Out acc = 1;
  for (const auto& [p, e] : f) {
    const Out prime = static_cast<Out>(p);
    checked_mul(acc, plus ? Out(prime + 1) : Out(prime - 1));
    for (unsigned i = 1; i < e; ++i) checked_mul(acc, prime);
  }
  return acc;
}

}  // namespace detail

/// Euler totient from a factorization: prod p^(a-1) (p-1).
template <class Out = big_nat, class Int>
Out phi(const basic_factorization<Int>& f) {
  return detail::multiplicative_value<Out>(f, false);
}

/// Dedekind psi from a factorization: prod p^(a-1) (p+1).
template <class Out = big_nat, class Int>
Out psi(const basic_factorization<Int>& f) {
  return detail::multiplicative_value<Out>(f, true);
}

template <class Int>
std::size_t omega(const basic_factorization<Int>& f) {
  return f.size();
}

namespace detail {

template <class Int, class Lookup>
basic_factorization<Int> shifted_product(const basic_factorization<Int>& f, Lookup&& shifted, bool plus) {
  basic_factorization<Int> out;
  for (const auto& [p, e] : f) {
    if (e > 1) out.multiply_prime_power(p, e - 1);
    const Int q = plus ? Int(p + 1) : Int(p - 1);
    out *= shifted(p, q);
  }
  return out;
}

}  // namespace detail

// phi_factored / psi_factored merge the factorizations of p -/+ 1 instead of factoring phi(n) or
// psi(n) directly, so psi(n) may exceed the sieve range as long as every p + 1 is inside it.

/// Factorization of phi(n); `shifted(p)` returns the factorization of p - 1.
template <class Int, class Lookup>
  requires std::invocable<Lookup, const Int&>
basic_factorization<Int> phi_factored(const basic_factorization<Int>& f, Lookup&& shifted) {
  return detail::shifted_product(f, [&](const Int& p, const Int&) { return shifted(p); }, false);
}

/// Factorization of psi(n); `shifted(p)` returns the factorization of p + 1.
template <class Int, class Lookup>
  requires std::invocable<Lookup, const Int&>
basic_factorization<Int> psi_factored(const basic_factorization<Int>& f, Lookup&& shifted) {
  return detail::shifted_product(f, [&](const Int& p, const Int&) { return shifted(p); }, true);
}

template <class Int>
using shifted_map = std::map<Int, basic_factorization<Int>>;

namespace detail {

template <class Int>
auto map_lookup(const shifted_map<Int>& m, const char* what) {
  return [&m, what](const Int& p) -> const basic_factorization<Int>& {
    auto it = m.find(p);
    if (it == m.end()) {
      std::string msg = std::string(what) + ": no factorization supplied for prime ";
      if constexpr (std::same_as<Int, big_nat>)
        msg += p.str();
      else
        msg += std::to_string(p);
      throw argument_error(msg);
    }
    return it->second;
  };
}

}  // namespace detail

template <class Int>
basic_factorization<Int> phi_factored(const basic_factorization<Int>& f, const shifted_map<Int>& shifted) {
  return phi_factored(f, detail::map_lookup(shifted, "phi_factored"));
}

template <class Int>
basic_factorization<Int> psi_factored(const basic_factorization<Int>& f, const shifted_map<Int>& shifted) {
  return psi_factored(f, detail::map_lookup(shifted, "psi_factored"));
}

/// Factorizations of n, phi(n) and psi(n) taken from one context.
template <class Int = std::uint64_t>
struct composed {
  basic_factorization<Int> n;
  basic_factorization<Int> phi_n;
  basic_factorization<Int> psi_n;
};

template <class Int = std::uint64_t, class Ctx>
  requires factor_context<Ctx, Int>
composed<Int> compose(const Int& n, const Ctx& ctx) {
  if (n < 1) throw argument_error("n must be >= 1");
  composed<Int> c;
  c.n = ctx.factor(n);
  c.phi_n = phi_factored(c.n, [&](const Int& p) { return ctx.factor(Int(p - 1)); });
  c.psi_n = psi_factored(c.n, [&](const Int& p) { return ctx.factor(Int(p + 1)); });
  return c;
}

/// I(n) = psi(phi(n)) / phi(psi(n)), exact and reduced.
template <class Int = std::uint64_t, class Ctx>
  requires factor_context<Ctx, Int>
exact_ratio ratio_I(const Int& n, const Ctx& ctx) {
  const auto c = compose<Int>(n, ctx);
  return exact_ratio(psi(c.phi_n), phi(c.psi_n));
}

/// K(n) = psi(phi(n)) / phi(phi(n)) = prod over p | phi(n) of (p+1)/(p-1).
template <class Int = std::uint64_t, class Ctx>
  requires factor_context<Ctx, Int>
exact_ratio ratio_K(const Int& n, const Ctx& ctx) {
  const auto c = compose<Int>(n, ctx);
  return exact_ratio(psi(c.phi_n), phi(c.phi_n));
}

/// a_d = mu^2(d) prod_{p | d} -2/(p+1).
template <class Int>
signed_exact_ratio dirichlet_coeff(const basic_factorization<Int>& d) {
  if (!d.is_squarefree()) return {};
  big_nat num = 1, den = 1;
  for (const auto& [p, e] : d) {
    num *= 2;
    den *= big_nat(p) + 1;
  }
  return {d.size() % 2 ? -1 : 1, exact_ratio(num, den)};
}

}  // namespace phipsi
