// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include "oracle.hpp"
#include "phipsi/sieve.hpp"

using namespace phipsi;
using Catch::Approx;

namespace {

factorization from_map(const oracle::factor_map& m) {
  factorization::storage items;
  for (auto [p, e] : m) items.push_back({p, e});
  return factorization::from_canonical(std::move(items));
}

}  // namespace

TEST_CASE("build_spf small ranges", "[sieve]") {
  const auto t = build_spf(2, 13);
  CHECK(t.spf(12) == 2);
  CHECK(t.spf(11) == 11);
  CHECK(t.spf(9) == 3);

  const auto u = build_spf(100, 110);
  CHECK(u.spf(101) == 101);
  CHECK(u.spf(105) == 3);

  const auto v = build_spf(1'000'000, 1'000'010);
  CHECK(v.spf(1'000'000) == 2);
}

TEST_CASE("build_spf rejects bad ranges", "[sieve][errors]") {
  CHECK_THROWS_AS(build_spf(1, 10), argument_error);
  CHECK_THROWS_AS(build_spf(10, 10), argument_error);
  CHECK_THROWS_AS(build_spf(2, 1'000'000, 1000), resource_error);
  const auto t = build_spf(100, 110);
  CHECK_THROWS_AS(t.spf(99), argument_error);
  CHECK_THROWS_AS(t.factorize(110), argument_error);
}

TEST_CASE("spf table invariants", "[sieve]") {
  const auto t = build_spf(2, 5000);
  for (std::uint64_t n = 2; n < 5000; ++n) {
    const auto p = t.spf(n);
    REQUIRE(n % p == 0);
    REQUIRE(oracle::is_prime(p));
    for (std::uint64_t q = 2; q < p; ++q) REQUIRE(n % q != 0);
    REQUIRE((p == n) == oracle::is_prime(n));
  }
}

TEST_CASE("factorize examples", "[sieve]") {
  const auto t = build_spf(2, 4000);
  CHECK(factorize(12, t) == factorization{{2, 2}, {3, 1}});
  CHECK(factorize(1, t).is_one());
  CHECK(factorize(3599, t) == factorization{{59, 1}, {61, 1}});
  CHECK(factorize(3599, t) == from_map(oracle::trial_division(3599)));
}

TEST_CASE("factorize matches trial division up to 1e5", "[sieve][oracle]") {
  const spf_index idx(100'001);
  for (std::uint64_t n = 1; n <= 100'000; ++n) {
    const auto f = idx.factor(n);
    REQUIRE(f == from_map(oracle::trial_division(n)));
    REQUIRE(f.value() == n);
  }
}

TEST_CASE("segment tables finish cofactors below their range", "[sieve]") {
  // 105 = 3 * 35 and 35 lies below the table.
  const auto t = build_spf(100, 110);
  CHECK(t.factorize(105) == factorization{{3, 1}, {5, 1}, {7, 1}});
  CHECK(t.factorize(108) == factorization{{2, 2}, {3, 3}});
}

TEST_CASE("adjacent segments agree with one covering table", "[sieve][property]") {
  const auto whole = build_spf(2, 60'000);
  const auto left = build_spf(2, 23'457);
  const auto right = build_spf(23'457, 60'000);
  for (std::uint64_t n = 2; n < 60'000; ++n) {
    const auto& part = n < 23'457 ? left : right;
    REQUIRE(part.factorize(n) == whole.factorize(n));
  }
}

TEST_CASE("spf_index is independent of segment size and workers", "[sieve][property]") {
  const spf_index a(200'000, {std::size_t{1} << 16, default_table_budget, 1});
  const spf_index b(200'000, {std::size_t{1} << 20, default_table_budget, 4});
  for (std::uint64_t n = 1; n < 200'000; n += 7) REQUIRE(a.factor(n) == b.factor(n));
  CHECK(a.segments().size() == 4);
  CHECK_THROWS_AS(spf_index(1'000'000, {std::size_t{1} << 16, 1000, 1}), resource_error);
  CHECK_THROWS_AS(a.factor(200'000), argument_error);
}

TEST_CASE("primes_in", "[sieve]") {
  CHECK(primes_in(2, 11) == std::vector<std::uint64_t>{2, 3, 5, 7});
  CHECK(primes_in(14, 17).empty());
  CHECK(primes_in(1'000'000, 1'000'020) == std::vector<std::uint64_t>{1'000'003});
  CHECK(primes_in(0, 3) == std::vector<std::uint64_t>{2});
  CHECK_THROWS_AS(primes_in(5, 5), argument_error);

  std::vector<std::uint64_t> brute;
  for (std::uint64_t n = 0; n < 3000; ++n)
    if (oracle::is_prime(n)) brute.push_back(n);
  CHECK(primes_in(0, 3000) == brute);
  // Crossing several small segments.
  std::vector<std::uint64_t> segmented;
  for_each_prime(0, 3000, [&](std::uint64_t p) { segmented.push_back(p); }, 128);
  CHECK(segmented == brute);
}

TEST_CASE("lcm_one_to", "[sieve]") {
  CHECK(lcm_one_to(1).value() == 1);
  CHECK(lcm_one_to(5).value() == 60);
  CHECK(lcm_one_to(5).factors == factorization{{2, 2}, {3, 1}, {5, 1}});
  CHECK(lcm_one_to(10).value() == 2520);
  CHECK(lcm_one_to(10).factors == factorization{{2, 3}, {3, 2}, {5, 1}, {7, 1}});
  CHECK_THROWS_AS(lcm_one_to(0), argument_error);
}

TEST_CASE("lcm_one_to is divisible by 1..x and by no prime above x", "[sieve][property]") {
  for (std::uint64_t x = 1; x <= 50; ++x) {
    const auto m = lcm_one_to(x);
    const big_nat v = m.value();
    for (std::uint64_t k = 1; k <= x; ++k) REQUIRE(v % k == 0);
    for (std::uint64_t p = x + 1; p < 200; ++p)
      if (oracle::is_prime(p)) REQUIRE(v % p != 0);
    // Exponent of p is the largest a with p^a <= x.
    for (const auto& [p, a] : m.factors) {
      REQUIRE(boost::multiprecision::pow(big_nat(p), a) <= x);
      REQUIRE(boost::multiprecision::pow(big_nat(p), a + 1) > x);
    }
  }
}

TEST_CASE("m_zero", "[sieve]") {
  const auto m6 = m_zero(1e6, 1.0);
  CHECK(m6.g == Approx(2.71994968497181818).epsilon(1e-12));
  CHECK(m6.value() == 2);

  const auto m80 = m_zero(1e80, 1.0);
  CHECK(m80.g == Approx(3.15791364652783347).epsilon(1e-12));
  CHECK(m80.value() == 6);

  // Small c1 drives g(x) to <= 2: empty LCM.
  CHECK(m_zero(1e6, 0.5).value() == 1);
  // Strict inequality: a threshold of exactly 4 excludes 4 itself.
  CHECK(lcm_below(4.0).value() == 6);
  CHECK(lcm_below(4.5).value() == 12);

  CHECK_THROWS_AS(m_zero(15.0, 1.0), domain_error);
  CHECK_THROWS_AS(m_zero(1e6, 0.0), argument_error);
}
