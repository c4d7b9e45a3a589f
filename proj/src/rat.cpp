// rat.cpp - exact rational arithmetic with overflow detection.

#include "widthlab/rat.hpp"

#include <numeric>
#include <ostream>
#include <stdexcept>

namespace widthlab {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("Rat: addition overflow");
  return out;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("Rat: multiplication overflow");
  return out;
}

std::int64_t checked_negate(std::int64_t a) {
  if (a == INT64_MIN) throw std::overflow_error("Rat: negation overflow");
  return -a;
}

}  // namespace

Rat::Rat(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
  if (den_ == 0) throw std::domain_error("Rat: zero denominator");
  if (den_ < 0) {
    num_ = checked_negate(num_);
    den_ = checked_negate(den_);
  }
  const std::int64_t g = std::gcd(num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
  if (num_ == 0) den_ = 1;
}

Rat Rat::operator-() const {
  Rat r;
  r.num_ = checked_negate(num_);
  r.den_ = den_;
  return r;
}

Rat Rat::operator+(const Rat& o) const {
  // Reduce by gcd of denominators first so intermediate products stay small.
  const std::int64_t g = std::gcd(den_, o.den_);
  const std::int64_t lhs = checked_mul(num_, o.den_ / g);
  const std::int64_t rhs = checked_mul(o.num_, den_ / g);
  return Rat(checked_add(lhs, rhs), checked_mul(den_, o.den_ / g));
}

Rat Rat::operator-(const Rat& o) const { return *this + (-o); }

Rat Rat::operator*(const Rat& o) const {
  // Cross-reduce before multiplying to keep components minimal.
  const std::int64_t g1 = std::gcd(num_, o.den_);
  const std::int64_t g2 = std::gcd(o.num_, den_);
  return Rat(checked_mul(num_ / g1, o.num_ / g2), checked_mul(den_ / g2, o.den_ / g1));
}

Rat Rat::operator/(const Rat& o) const {
  if (o.num_ == 0) throw std::domain_error("Rat: division by zero");
  return *this * Rat(o.den_, o.num_);
}

bool Rat::operator<(const Rat& o) const {
  // Denominators are positive, so the comparison reduces to cross products;
  // __int128 makes them exact for any representable operands.
  return static_cast<__int128>(num_) * o.den_ < static_cast<__int128>(o.num_) * den_;
}

std::string Rat::to_string() const {
  std::string s = std::to_string(num_);
  if (den_ != 1) {
    s += '/';
    s += std::to_string(den_);
  }
  return s;
}

Rat Rat::parse(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("Rat: empty string");
  std::size_t slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const std::int64_t n = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument("");
      return Rat(n);
    }
    const std::string num_part = text.substr(0, slash);
    const std::string den_part = text.substr(slash + 1);
    if (num_part.empty() || den_part.empty()) throw std::invalid_argument("");
    const std::int64_t n = std::stoll(num_part, &used);
    if (used != num_part.size()) throw std::invalid_argument("");
    const std::int64_t d = std::stoll(den_part, &used);
    if (used != den_part.size()) throw std::invalid_argument("");
    return Rat(n, d);
  } catch (const std::domain_error&) {
    throw;  // zero denominator: keep the specific error
  } catch (const std::exception&) {
    throw std::invalid_argument("Rat: cannot parse '" + text + "'");
  }
}

std::ostream& operator<<(std::ostream& out, const Rat& r) { return out << r.to_string(); }

}  // namespace widthlab
