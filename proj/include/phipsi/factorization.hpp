// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>

#include <boost/container/small_vector.hpp>

#include "phipsi/bigint.hpp"
#include "phipsi/error.hpp"

namespace phipsi {

template <class Int>
struct prime_power {
  Int prime;
  unsigned exponent;

  friend bool operator==(const prime_power&, const prime_power&) = default;
};

/// Canonical prime-power decomposition. Primes strictly increase, exponents are >= 1 and the
/// empty list stands for 1. Works over std::uint64_t (sieve range) and big_nat (witness path).
template <class Int>
class basic_factorization {
 public:
  using value_type = prime_power<Int>;
  using storage = boost::container::small_vector<value_type, 8>;

  basic_factorization() = default;

  basic_factorization(std::initializer_list<value_type> items) : factors_(items) { validate(); }

  /// Takes ownership of a list that must already be canonical.
  static basic_factorization from_canonical(storage items) {
    basic_factorization f;
    f.factors_ = std::move(items);
    f.validate();
    return f;
  }

  static basic_factorization prime(Int p, unsigned exponent = 1) {
    basic_factorization f;
    if (exponent) f.factors_.push_back({std::move(p), exponent});
    return f;
  }

  const storage& factors() const { return factors_; }
  auto begin() const { return factors_.begin(); }
  auto end() const { return factors_.end(); }
  std::size_t size() const { return factors_.size(); }
  bool is_one() const { return factors_.empty(); }

  /// Exponent of p, zero when p does not divide the value.
  unsigned exponent_of(const Int& p) const {
    auto it = std::lower_bound(factors_.begin(), factors_.end(), p,
                               [](const value_type& pp, const Int& q) { return pp.prime < q; });
    return (it != factors_.end() && it->prime == p) ? it->exponent : 0u;
  }

  bool divides(const basic_factorization& other) const {
    return std::all_of(factors_.begin(), factors_.end(), [&](const value_type& pp) {
      return other.exponent_of(pp.prime) >= pp.exponent;
    });
  }

  bool is_squarefree() const {
    return std::all_of(factors_.begin(), factors_.end(),
                       [](const value_type& pp) { return pp.exponent == 1; });
  }

  big_nat value() const {
    big_nat v = 1;
    for (const auto& [p, e] : factors_) v *= boost::multiprecision::pow(to_big(p), e);
    return v;
  }

  /// Value as std::uint64_t; throws resource_error on overflow.
  std::uint64_t value_u64() const
    requires std::same_as<Int, std::uint64_t>
  {
    std::uint64_t v = 1;
    for (const auto& [p, e] : factors_)
      for (unsigned i = 0; i < e; ++i)
        if (__builtin_mul_overflow(v, p, &v)) throw resource_error("factorization value exceeds 64 bits");
    return v;
  }

  basic_factorization& operator*=(const basic_factorization& other) {
    if (other.factors_.empty()) return *this;
    if (factors_.empty()) {
      factors_ = other.factors_;
      return *this;
    }
    storage merged;
    merged.reserve(factors_.size() + other.factors_.size());
    auto a = factors_.begin();
    auto b = other.factors_.begin();
    while (a != factors_.end() && b != other.factors_.end()) {
      if (a->prime < b->prime) {
        merged.push_back(*a++);
      } else if (b->prime < a->prime) {
        merged.push_back(*b++);
      } else {
        merged.push_back({a->prime, a->exponent + b->exponent});
        ++a;
        ++b;
      }
    }
    merged.insert(merged.end(), a, factors_.end());
    merged.insert(merged.end(), b, other.factors_.end());
    factors_ = std::move(merged);
    return *this;
  }

  friend basic_factorization operator*(basic_factorization lhs, const basic_factorization& rhs) {
    lhs *= rhs;
    return lhs;
  }

  /// Multiplies in p^e for a prime p; p need not be new.
  void multiply_prime_power(const Int& p, unsigned e) {
    if (!e) return;
    auto it = std::lower_bound(factors_.begin(), factors_.end(), p,
                               [](const value_type& pp, const Int& q) { return pp.prime < q; });
    if (it != factors_.end() && it->prime == p)
      it->exponent += e;
    else
      factors_.insert(it, value_type{p, e});
  }

  friend bool operator==(const basic_factorization&, const basic_factorization&) = default;

  std::string to_string() const {
    if (factors_.empty()) return "1";
    std::string out;
    for (const auto& [p, e] : factors_) {
      if (!out.empty()) out += " * ";
      if constexpr (std::same_as<Int, big_nat>)
        out += p.str();
      else
        out += std::to_string(p);
      if (e > 1) out += "^" + std::to_string(e);
    }
    return out;
  }

  friend std::ostream& operator<<(std::ostream& os, const basic_factorization& f) {
    return os << f.to_string();
  }

 private:
  void validate() const {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (factors_[i].exponent == 0) throw argument_error("factorization exponent must be >= 1");
      if (factors_[i].prime < 2) throw argument_error("factorization prime must be >= 2");
      if (i && !(factors_[i - 1].prime < factors_[i].prime))
        throw argument_error("factorization primes must be strictly increasing");
    }
  }

  storage factors_;
};

using factorization = basic_factorization<std::uint64_t>;
using big_factorization = basic_factorization<big_nat>;

inline big_factorization widen(const factorization& f) {
  big_factorization::storage items;
  items.reserve(f.size());
  for (const auto& [p, e] : f) items.push_back({big_nat(p), e});
  return big_factorization::from_canonical(std::move(items));
}

}  // namespace phipsi
