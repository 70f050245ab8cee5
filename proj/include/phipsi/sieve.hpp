// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "phipsi/error.hpp"
#include "phipsi/factorization.hpp"
#include "phipsi/iterated_log.hpp"

namespace phipsi {

inline constexpr std::size_t default_segment_size = std::size_t{1} << 22;
inline constexpr std::size_t default_table_budget = std::size_t{1} << 27;

inline std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && (r > n / r)) --r;
  while ((r + 1) <= n / (r + 1)) ++r;
  return r;
}

/// Primes <= limit by a plain sieve of Eratosthenes. Used for sieving primes up to sqrt(hi).
inline std::vector<std::uint32_t> base_primes(std::uint64_t limit) {
  std::vector<std::uint32_t> primes;
  if (limit < 2) return primes;
  std::vector<char> composite(limit + 1, 0);
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = 1;
  }
  return primes;
}

/// Smallest-prime-factor lookup for [lo, hi). Primes are stored as 0, so any range below 2^64 works
/// with 32-bit entries. Immutable after construction.
class spf_table {
 public:
  spf_table(std::uint64_t lo, std::uint64_t hi, std::shared_ptr<const std::vector<std::uint32_t>> primes)
      : lo_(lo), hi_(hi), spf_(hi - lo, 0), base_(std::move(primes)) {
    for (std::uint32_t p : *base_) {
      const std::uint64_t pp = std::uint64_t{p} * p;
      if (pp >= hi_) break;
      std::uint64_t start = std::max(pp, (lo_ + p - 1) / p * p);
      for (std::uint64_t m = start; m < hi_; m += p)
        if (!spf_[m - lo_]) spf_[m - lo_] = p;
    }
  }

  std::uint64_t lo() const { return lo_; }
  std::uint64_t hi() const { return hi_; }
  bool contains(std::uint64_t n) const { return n >= lo_ && n < hi_; }

  std::uint64_t spf(std::uint64_t n) const {
    if (!contains(n) || n < 2)
      throw argument_error("spf: " + std::to_string(n) + " outside [" + std::to_string(lo_) + ", " +
                           std::to_string(hi_) + ")");
    return spf_unchecked(n);
  }

  std::uint64_t spf_unchecked(std::uint64_t n) const {
    const std::uint32_t s = spf_[n - lo_];
    return s ? s : n;
  }

  bool is_prime(std::uint64_t n) const { return n >= 2 && spf(n) == n; }

  /// Canonical factorization of n (n = 1 always allowed). Cofactors that fall below lo are
  /// finished by trial division over the table's base primes.
  factorization factorize(std::uint64_t n) const {
    if (n == 1) return {};
    if (!contains(n))
      throw argument_error("factorize: " + std::to_string(n) + " outside table range [" +
                           std::to_string(lo_) + ", " + std::to_string(hi_) + ")");
    factorization::storage out;
    while (n > 1 && contains(n)) {
      const std::uint64_t p = spf_unchecked(n);
      push(out, p);
      n /= p;
    }
    if (n > 1) {
      for (std::uint32_t p : *base_) {
        if (std::uint64_t{p} * p > n) break;
        while (n % p == 0) {
          push(out, p);
          n /= p;
        }
      }
      if (n > 1) push(out, n);
    }
    return factorization::from_canonical(std::move(out));
  }

 private:
  static void push(factorization::storage& out, std::uint64_t p) {
    if (!out.empty() && out.back().prime == p)
      ++out.back().exponent;
    else
      out.push_back({p, 1});
  }

  std::uint64_t lo_;
  std::uint64_t hi_;
  std::vector<std::uint32_t> spf_;
  std::shared_ptr<const std::vector<std::uint32_t>> base_;
};

/// Builds the smallest-prime-factor table for [lo, hi).
inline spf_table build_spf(std::uint64_t lo, std::uint64_t hi, std::size_t budget = default_segment_size) {
  if (lo < 2) throw argument_error("build_spf: lo must be >= 2");
  if (hi <= lo) throw argument_error("build_spf: need lo < hi");
  if (hi - lo > budget)
    throw resource_error("build_spf: " + std::to_string(hi - lo) + " entries exceed budget of " +
                         std::to_string(budget));
  auto primes = std::make_shared<const std::vector<std::uint32_t>>(base_primes(isqrt(hi - 1)));
  return spf_table(lo, hi, std::move(primes));
}

inline factorization factorize(std::uint64_t n, const spf_table& table) { return table.factorize(n); }

struct sieve_options {
  std::size_t segment_size = default_segment_size;
  std::size_t max_entries = default_table_budget;
  unsigned workers = 1;
};

/// Adjacent spf_table segments covering [2, limit). This is the factorization context used by
/// the arithmetic and experiment code: factor(n) works for every 1 <= n < limit.
class spf_index {
 public:
  explicit spf_index(std::uint64_t limit, sieve_options opts = {}) : limit_(std::max<std::uint64_t>(limit, 3)) {
    if (opts.segment_size == 0) throw argument_error("segment_size must be positive");
    if (limit_ - 2 > opts.max_entries)
      throw resource_error("spf_index: " + std::to_string(limit_ - 2) + " entries exceed budget of " +
                           std::to_string(opts.max_entries));
    segment_ = opts.segment_size;
    auto primes = std::make_shared<const std::vector<std::uint32_t>>(base_primes(isqrt(limit_ - 1)));
    const std::size_t count = (limit_ - 2 + segment_ - 1) / segment_;
    std::vector<std::unique_ptr<spf_table>> built(count);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        const std::uint64_t lo = 2 + i * segment_;
        const std::uint64_t hi = std::min<std::uint64_t>(lo + segment_, limit_);
        built[i] = std::make_unique<spf_table>(lo, hi, primes);
      }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(count)));
    if (workers == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    segments_.reserve(count);
    for (auto& t : built) segments_.push_back(std::move(*t));
  }

  std::uint64_t limit() const { return limit_; }
  const std::vector<spf_table>& segments() const { return segments_; }

  std::uint64_t spf(std::uint64_t n) const {
    check(n);
    return segments_[(n - 2) / segment_].spf_unchecked(n);
  }

  bool is_prime(std::uint64_t n) const { return n >= 2 && spf(n) == n; }

  factorization factor(std::uint64_t n) const {
    if (n == 0) throw argument_error("factor: 0 has no factorization");
    if (n == 1) return {};
    check(n);
    factorization::storage out;
    while (n > 1) {
      const std::uint64_t p = segments_[(n - 2) / segment_].spf_unchecked(n);
      if (!out.empty() && out.back().prime == p)
        ++out.back().exponent;
      else
        out.push_back({p, 1});
      n /= p;
    }
    return factorization::from_canonical(std::move(out));
  }

 private:
  void check(std::uint64_t n) const {
    if (n < 2 || n >= limit_)
      throw argument_error("spf_index: " + std::to_string(n) + " outside [2, " + std::to_string(limit_) + ")");
  }

  std::uint64_t limit_;
  std::size_t segment_ = default_segment_size;
  std::vector<spf_table> segments_;
};

/// Calls fn(p) for every prime p in [lo, hi), in increasing order.
template <class Fn>
void for_each_prime(std::uint64_t lo, std::uint64_t hi, Fn&& fn, std::size_t segment = default_segment_size) {
  if (hi <= lo) throw argument_error("primes_in: need lo < hi");
  lo = std::max<std::uint64_t>(lo, 2);
  if (hi <= lo) return;
  const auto primes = base_primes(isqrt(hi - 1));
  std::vector<char> composite;
  for (std::uint64_t seg_lo = lo; seg_lo < hi; seg_lo += segment) {
    const std::uint64_t seg_hi = std::min<std::uint64_t>(seg_lo + segment, hi);
    composite.assign(seg_hi - seg_lo, 0);
    for (std::uint32_t p : primes) {
      const std::uint64_t pp = std::uint64_t{p} * p;
      if (pp >= seg_hi) break;
      for (std::uint64_t m = std::max(pp, (seg_lo + p - 1) / p * p); m < seg_hi; m += p) composite[m - seg_lo] = 1;
    }
    for (std::uint64_t n = seg_lo; n < seg_hi; ++n)
      if (!composite[n - seg_lo]) fn(n);
  }
}

/// All primes in [lo, hi) in increasing order.
inline std::vector<std::uint64_t> primes_in(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  for_each_prime(lo, hi, [&](std::uint64_t p) { out.push_back(p); });
  return out;
}

/// Trial division; fine for the small moduli and test values it is used on.
inline factorization trial_factor(std::uint64_t n) {
  if (n == 0) throw argument_error("trial_factor: 0 has no factorization");
  factorization::storage out;
  auto take = [&](std::uint64_t p) {
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e) out.push_back({p, e});
  };
  take(2);
  for (std::uint64_t p = 3; p <= n / p; p += 2) take(p);
  if (n > 1) out.push_back({n, 1});
  return factorization::from_canonical(std::move(out));
}

/// M(x) = lcm(1..x), or any LCM of prime powers, kept in factored form.
struct lcm_object {
  std::uint64_t x = 1;
  factorization factors;

  big_nat value() const { return factors.value(); }
};

/// lcm(1, 2, ..., x); the exponent of p is the largest a with p^a <= x.
inline lcm_object lcm_one_to(std::uint64_t x) {
  if (x < 1) throw argument_error("lcm_one_to: x must be >= 1");
  factorization::storage items;
  if (x >= 2) {
    for_each_prime(2, x + 1, [&](std::uint64_t p) {
      unsigned a = 0;
      for (std::uint64_t pa = 1; pa <= x / p; pa *= p) ++a;
      items.push_back({p, a});
    });
  }
  return {x, factorization::from_canonical(std::move(items))};
}

/// LCM of all prime powers p^a strictly below threshold.
inline factorization lcm_below(double threshold) {
  factorization::storage items;
  if (threshold > 2.0) {
    const auto limit = static_cast<std::uint64_t>(std::ceil(threshold));
    for_each_prime(2, limit, [&](std::uint64_t p) {
      if (!(static_cast<double>(p) < threshold)) return;
      unsigned a = 1;
      for (double pa = static_cast<double>(p) * p; pa < threshold; pa *= p) ++a;
      items.push_back({p, a});
    });
  }
  return factorization::from_canonical(std::move(items));
}

/// M_0(x) = LCM{p^a : p^a < g(x)} with g(x) = c1 log_2 x / log_3 x.
struct m_zero_object {
  double x;
  double c1;
  double g;
  factorization factors;

  big_nat value() const { return factors.value(); }
};

inline m_zero_object m_zero(double x, double c1 = 1.0) {
  const double g = lcm_threshold(x, c1);
  return {x, c1, g, lcm_below(g)};
}

}  // namespace phipsi
