// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <string>

#include "phipsi/bigint.hpp"
#include "phipsi/error.hpp"

namespace phipsi {

namespace detail {

inline unsigned bit_length(const big_nat& v) { return v == 0 ? 0u : static_cast<unsigned>(msb(v)) + 1; }

/// num/den rounded to nearest (ties to even) in binary64. Both operands non-negative, den > 0.
inline double divide_to_double(const big_nat& num, const big_nat& den) {
  if (num == 0) return 0.0;
  constexpr std::uint64_t exact_limit = std::uint64_t{1} << 53;
  if (num <= exact_limit && den <= exact_limit)
    return static_cast<double>(static_cast<std::uint64_t>(num)) / static_cast<double>(static_cast<std::uint64_t>(den));

  // Scale so the integer quotient carries 54 or 55 significant bits, then round by hand.
  const int shift = 54 - (static_cast<int>(bit_length(num)) - static_cast<int>(bit_length(den)));
  big_nat q, r;
  if (shift >= 0)
    divide_qr(big_nat(num << shift), den, q, r);
  else
    divide_qr(num, big_nat(den << -shift), q, r);
  bool sticky = r != 0;
  int exp2 = -shift;
  auto mant = static_cast<std::uint64_t>(q);
  while (mant >= (std::uint64_t{1} << 54)) {
    sticky = sticky || (mant & 1);
    mant >>= 1;
    ++exp2;
  }
  // mant now has exactly 54 bits: 53 kept plus one rounding bit.
  const bool round_bit = mant & 1;
  mant >>= 1;
  ++exp2;
  if (round_bit && (sticky || (mant & 1))) ++mant;
  return std::ldexp(static_cast<double>(mant), exp2);
}

}  // namespace detail

/// Reduced non-negative fraction of arbitrary-precision naturals.
class exact_ratio {
 public:
  exact_ratio() : num_(0), den_(1) {}
  exact_ratio(big_nat num, big_nat den = 1) : num_(std::move(num)), den_(std::move(den)) {
    if (den_ == 0) throw argument_error("exact_ratio: zero denominator");
    if (num_ < 0 || den_ < 0) throw argument_error("exact_ratio: negative operand");
    reduce();
  }
  exact_ratio(std::uint64_t num, std::uint64_t den = 1) : exact_ratio(big_nat(num), big_nat(den)) {}

  const big_nat& num() const { return num_; }
  const big_nat& den() const { return den_; }
  bool is_zero() const { return num_ == 0; }

  double to_double() const { return detail::divide_to_double(num_, den_); }
  std::string str() const { return num_.str() + "/" + den_.str(); }

  friend exact_ratio operator*(const exact_ratio& a, const exact_ratio& b) {
    return exact_ratio(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend exact_ratio operator/(const exact_ratio& a, const exact_ratio& b) {
    if (b.num_ == 0) throw argument_error("exact_ratio: division by zero");
    return exact_ratio(a.num_ * b.den_, a.den_ * b.num_);
  }
  friend exact_ratio operator+(const exact_ratio& a, const exact_ratio& b) {
    return exact_ratio(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  exact_ratio& operator*=(const exact_ratio& b) { return *this = *this * b; }
  exact_ratio& operator+=(const exact_ratio& b) { return *this = *this + b; }

  friend bool operator==(const exact_ratio& a, const exact_ratio& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend std::strong_ordering operator<=>(const exact_ratio& a, const exact_ratio& b) {
    const big_nat lhs = a.num_ * b.den_;
    const big_nat rhs = b.num_ * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (rhs < lhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend std::ostream& operator<<(std::ostream& os, const exact_ratio& r) { return os << r.str(); }

 private:
  void reduce() {
    if (num_ == 0) {
      den_ = 1;
      return;
    }
    const big_nat g = gcd(num_, den_);
    if (g != 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  big_nat num_;
  big_nat den_;
};

/// Sign plus exact magnitude; sign is 0 exactly when the magnitude is 0.
class signed_exact_ratio {
 public:
  signed_exact_ratio() = default;
  signed_exact_ratio(int sign, exact_ratio magnitude) : sign_(sign), magnitude_(std::move(magnitude)) {
    if (sign_ < -1 || sign_ > 1) throw argument_error("signed_exact_ratio: sign must be -1, 0 or +1");
    if (magnitude_.is_zero()) sign_ = 0;
    if (sign_ == 0 && !magnitude_.is_zero()) throw argument_error("signed_exact_ratio: zero sign needs zero magnitude");
  }

  int sign() const { return sign_; }
  const exact_ratio& magnitude() const { return magnitude_; }
  double to_double() const { return sign_ * magnitude_.to_double(); }

  friend signed_exact_ratio operator+(const signed_exact_ratio& a, const signed_exact_ratio& b) {
    if (a.sign_ == 0) return b;
    if (b.sign_ == 0) return a;
    if (a.sign_ == b.sign_) return {a.sign_, a.magnitude_ + b.magnitude_};
    const big_nat lhs = a.magnitude_.num() * b.magnitude_.den();
    const big_nat rhs = b.magnitude_.num() * a.magnitude_.den();
    const big_nat den = a.magnitude_.den() * b.magnitude_.den();
    if (lhs == rhs) return {};
    if (lhs > rhs) return {a.sign_, exact_ratio(big_nat(lhs - rhs), den)};
    return {b.sign_, exact_ratio(big_nat(rhs - lhs), den)};
  }
  signed_exact_ratio& operator+=(const signed_exact_ratio& b) { return *this = *this + b; }

  friend signed_exact_ratio operator*(const signed_exact_ratio& a, const signed_exact_ratio& b) {
    return {a.sign_ * b.sign_, a.magnitude_ * b.magnitude_};
  }

  friend bool operator==(const signed_exact_ratio&, const signed_exact_ratio&) = default;

  std::string str() const { return (sign_ < 0 ? "-" : "") + magnitude_.str(); }
  friend std::ostream& operator<<(std::ostream& os, const signed_exact_ratio& r) { return os << r.str(); }

 private:
  int sign_ = 0;
  exact_ratio magnitude_;
};

}  // namespace phipsi
