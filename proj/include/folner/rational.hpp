#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "folner/errors.hpp"

namespace folner {

// Reduced fraction over int64 with a positive denominator.
// Comparisons cross-multiply in __int128, so no magnitude is lost;
// construction and arithmetic throw OverflowError outside int64.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw ParseError("rational with zero denominator");
    if (den_ < 0) {
      num_ = detail::checked_sub(0, num_);
      den_ = detail::checked_sub(0, den_);
    }
    reduce();
  }
  static Rational integer(std::int64_t n) { return Rational(n, 1); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const {
    return (__int128)num_ * o.den_ < (__int128)o.num_ * den_;
  }
  bool operator<=(const Rational& o) const {
    return (__int128)num_ * o.den_ <= (__int128)o.num_ * den_;
  }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return o <= *this; }

  Rational operator+(const Rational& o) const {
    return from_int128((__int128)num_ * o.den_ + (__int128)o.num_ * den_,
                       (__int128)den_ * o.den_);
  }
  Rational operator-(const Rational& o) const {
    return from_int128((__int128)num_ * o.den_ - (__int128)o.num_ * den_,
                       (__int128)den_ * o.den_);
  }
  Rational operator*(const Rational& o) const {
    return from_int128((__int128)num_ * o.num_, (__int128)den_ * o.den_);
  }
  Rational operator/(const Rational& o) const {
    if (o.num_ == 0) throw ParseError("rational division by zero");
    return from_int128((__int128)num_ * o.den_, (__int128)den_ * o.num_);
  }

  // lhs <= (*this) * scale, decided exactly. The workhorse of every
  // invariance check: |boundary| <= delta * |set|.
  bool le_times(std::int64_t lhs, std::int64_t scale) const {
    return (__int128)lhs * den_ <= (__int128)num_ * scale;
  }
  bool lt_times(std::int64_t lhs, std::int64_t scale) const {
    return (__int128)lhs * den_ < (__int128)num_ * scale;
  }

  // floor((*this) * scale), exact. scale >= 0.
  std::int64_t floor_times(std::int64_t scale) const {
    __int128 p = (__int128)num_ * scale;
    __int128 q = den_;
    __int128 f = p >= 0 ? p / q : -(((-p) + q - 1) / q);
    return narrow(f);
  }
  // ceil((*this) * scale), exact. scale >= 0.
  std::int64_t ceil_times(std::int64_t scale) const {
    __int128 p = (__int128)num_ * scale;
    __int128 q = den_;
    __int128 c = p >= 0 ? (p + q - 1) / q : -((-p) / q);
    return narrow(c);
  }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Accepts "p", "p/q", optional leading minus on either part.
  static Rational parse(const std::string& text) {
    auto slash = text.find('/');
    try {
      if (slash == std::string::npos) {
        return Rational(parse_int(text), 1);
      }
      return Rational(parse_int(text.substr(0, slash)),
                      parse_int(text.substr(slash + 1)));
    } catch (const OverflowError&) {
      throw ParseError("rational out of range: " + text);
    }
  }

 private:
  void reduce() {
    if (num_ == 0) {
      den_ = 1;
      return;
    }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    num_ /= g;
    den_ /= g;
  }

  static std::int64_t narrow(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN) throw OverflowError("rational value exceeds int64");
    return (std::int64_t)v;
  }

  static Rational from_int128(__int128 num, __int128 den) {
    if (den == 0) throw ParseError("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    __int128 a = num < 0 ? -num : num;
    __int128 b = den;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a != 0) {
      num /= a;
      den /= a;
    }
    Rational r;
    r.num_ = narrow(num);
    r.den_ = narrow(den);
    return r;
  }

  static std::int64_t parse_int(const std::string& s) {
    if (s.empty()) throw ParseError("empty integer literal");
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::invalid_argument&) {
      throw ParseError("bad integer literal: " + s);
    } catch (const std::out_of_range&) {
      throw OverflowError("integer literal out of range: " + s);
    }
    if (pos != s.size()) throw ParseError("bad integer literal: " + s);
    return v;
  }

  std::int64_t num_;
  std::int64_t den_;
};

}  // namespace folner
