#pragma once
// Exact rational arithmetic on 64-bit numerator/denominator.
// All operations go through 128-bit intermediates and throw bouton::overflow_error
// when a reduced result no longer fits in 64 bits, so results are exact or absent.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bouton {

class overflow_error : public std::runtime_error {
 public:
  explicit overflow_error(const std::string& what) : std::runtime_error(what) {}
};

class rational_error : public std::runtime_error {
 public:
  explicit rational_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

using i128 = __int128;

inline std::int64_t checked_narrow(i128 v, const char* ctx) {
  if (v > i128(INT64_MAX) || v < i128(INT64_MIN))
    throw overflow_error(std::string("rational overflow in ") + ctx);
  return static_cast<std::int64_t>(v);
}

inline i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace detail

class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT: implicit by design
  Rational(std::int64_t n, std::int64_t d) {
    if (d == 0) throw rational_error("rational with zero denominator");
    detail::i128 nn = n, dd = d;
    if (dd < 0) {
      nn = -nn;
      dd = -dd;
    }
    detail::i128 g = detail::gcd128(nn, dd);
    if (g > 1) {
      nn /= g;
      dd /= g;
    }
    num_ = detail::checked_narrow(nn, "construction");
    den_ = detail::checked_narrow(dd, "construction");
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_one() const { return num_ == 1 && den_ == 1; }
  bool is_integer() const { return den_ == 1; }
  bool is_negative() const { return num_ < 0; }
  int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

  Rational abs() const { return num_ < 0 ? Rational(-num_, den_) : *this; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return reduce(detail::i128(a.num_) * b.den_ + detail::i128(b.num_) * a.den_,
                  detail::i128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return reduce(detail::i128(a.num_) * b.den_ - detail::i128(b.num_) * a.den_,
                  detail::i128(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return reduce(detail::i128(a.num_) * b.num_, detail::i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw rational_error("rational division by zero");
    return reduce(detail::i128(a.num_) * b.den_, detail::i128(a.den_) * b.num_);
  }
  Rational operator-() const { return Rational(-num_, den_); }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return detail::i128(a.num_) * b.den_ < detail::i128(b.num_) * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  // Integer power; negative exponents invert (pow of zero with e < 0 throws).
  Rational pow(std::int64_t e) const {
    if (e == 0) return Rational(1);
    if (num_ == 0) {
      if (e < 0) throw rational_error("zero raised to negative power");
      return Rational(0);
    }
    Rational base = *this;
    if (e < 0) {
      base = Rational(base.den_, base.num_);
      e = -e;
    }
    Rational acc(1);
    while (e > 0) {
      if (e & 1) acc *= base;
      base = (e > 1) ? base * base : base;
      e >>= 1;
    }
    return acc;
  }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  // "p" for integers, "p/q" otherwise.
  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Accepts "p", "p/q", optional leading sign, surrounding whitespace.
  static Rational from_string(std::string_view s) {
    auto trim = [](std::string_view v) {
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
      return v;
    };
    s = trim(s);
    auto slash = s.find('/');
    auto parse_int = [&trim](std::string_view v) -> std::int64_t {
      v = trim(v);
      if (v.empty()) throw rational_error("empty integer in rational literal");
      std::size_t i = 0;
      bool neg = false;
      if (v[0] == '+' || v[0] == '-') {
        neg = v[0] == '-';
        i = 1;
      }
      if (i == v.size()) throw rational_error("sign without digits in rational literal");
      detail::i128 acc = 0;
      for (; i < v.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(v[i])))
          throw rational_error("invalid character in rational literal: '" + std::string(v) + "'");
        acc = acc * 10 + (v[i] - '0');
        if (acc > detail::i128(INT64_MAX)) throw overflow_error("rational literal too large");
      }
      return neg ? -static_cast<std::int64_t>(acc) : static_cast<std::int64_t>(acc);
    };
    if (slash == std::string_view::npos) return Rational(parse_int(s));
    return Rational(parse_int(s.substr(0, slash)), parse_int(s.substr(slash + 1)));
  }

  std::size_t hash() const {
    std::size_t h = std::hash<std::int64_t>{}(num_);
    h ^= std::hash<std::int64_t>{}(den_) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }

 private:
  static Rational reduce(detail::i128 n, detail::i128 d) {
    if (d == 0) throw rational_error("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    detail::i128 g = detail::gcd128(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    Rational r;
    r.num_ = detail::checked_narrow(n, "arithmetic");
    r.den_ = detail::checked_narrow(d, "arithmetic");
    return r;
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// Exact integer n-th root: largest r with r^n == v, if v is a perfect n-th power.
inline std::optional<std::int64_t> exact_nth_root(std::int64_t v, int n) {
  if (n <= 0) return std::nullopt;
  if (n == 1) return v;
  bool neg = v < 0;
  if (neg && n % 2 == 0) return std::nullopt;
  std::uint64_t mag = neg ? static_cast<std::uint64_t>(-(v + 1)) + 1 : static_cast<std::uint64_t>(v);
  if (mag <= 1) return v;
  // Floor root by floating-point seed plus local correction, then verify exactly.
  double seed = std::pow(static_cast<double>(mag), 1.0 / n);
  for (std::int64_t r = std::max<std::int64_t>(1, static_cast<std::int64_t>(seed) - 2);
       r <= static_cast<std::int64_t>(seed) + 2; ++r) {
    detail::i128 acc = 1;
    bool over = false;
    for (int i = 0; i < n; ++i) {
      acc *= r;
      if (acc > detail::i128(UINT64_MAX)) {
        over = true;
        break;
      }
    }
    if (!over && acc == detail::i128(mag)) return neg ? -r : r;
  }
  return std::nullopt;
}

// Continued-fraction rationalization: best rational approximation to x with
// denominator at most max_den, if one lies within tol of x.
inline std::optional<Rational> rationalize(double x, std::int64_t max_den = 1000000,
                                           double tol = 1e-9) {
  if (!std::isfinite(x)) return std::nullopt;
  double target = x;
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = x;
  for (int iter = 0; iter < 64; ++iter) {
    double fl = std::floor(frac);
    if (fl > 9.2e18 || fl < -9.2e18) return std::nullopt;
    auto a = static_cast<std::int64_t>(fl);
    detail::i128 p2 = detail::i128(a) * p1 + p0;
    detail::i128 q2 = detail::i128(a) * q1 + q0;
    if (q2 > max_den || p2 > INT64_MAX || p2 < INT64_MIN) break;
    p0 = p1; q0 = q1;
    p1 = static_cast<std::int64_t>(p2);
    q1 = static_cast<std::int64_t>(q2);
    double approx = static_cast<double>(p1) / static_cast<double>(q1);
    if (std::abs(approx - target) <= tol * std::max(1.0, std::abs(target)))
      return Rational(p1, q1);
    double rem = frac - fl;
    if (rem < 1e-15) break;
    frac = 1.0 / rem;
  }
  double approx = q1 ? static_cast<double>(p1) / static_cast<double>(q1) : 0.0;
  if (q1 && std::abs(approx - target) <= tol * std::max(1.0, std::abs(target)))
    return Rational(p1, q1);
  return std::nullopt;
}

}  // namespace bouton
