// rat.hpp - exact rational arithmetic for scale exponents.
//
// Width-scaling exponents (1/2, -3/2, ...) must compare and combine exactly;
// no floating point is used anywhere in this type. Values are kept in lowest
// terms with a positive denominator. Components are 64-bit; any arithmetic
// that would overflow throws instead of wrapping (the exponents this library
// manipulates are tiny, so overflow always indicates a bug).

#ifndef WIDTHLAB_RAT_HPP
#define WIDTHLAB_RAT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

namespace widthlab {

class Rat {
 public:
  // Zero by default; integers promote implicitly (exponent arithmetic mixes
  // rationals and small integer constants freely).
  constexpr Rat() : num_(0), den_(1) {}
  Rat(std::int64_t value) : num_(value), den_(1) {}  // NOLINT(google-explicit-constructor)
  // Normalizes sign and reduces to lowest terms. Throws std::domain_error on
  // a zero denominator, std::overflow_error if normalization overflows.
  Rat(std::int64_t num, std::int64_t den);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  Rat operator-() const;
  Rat operator+(const Rat& o) const;
  Rat operator-(const Rat& o) const;
  Rat operator*(const Rat& o) const;
  // Exact division; throws std::domain_error when dividing by zero.
  Rat operator/(const Rat& o) const;

  Rat& operator+=(const Rat& o) { return *this = *this + o; }
  Rat& operator-=(const Rat& o) { return *this = *this - o; }
  Rat& operator*=(const Rat& o) { return *this = *this * o; }
  Rat& operator/=(const Rat& o) { return *this = *this / o; }

  // Total order via 128-bit cross multiplication (never overflows).
  bool operator==(const Rat& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rat& o) const { return !(*this == o); }
  bool operator<(const Rat& o) const;
  bool operator>(const Rat& o) const { return o < *this; }
  bool operator<=(const Rat& o) const { return !(o < *this); }
  bool operator>=(const Rat& o) const { return !(*this < o); }

  bool is_zero() const { return num_ == 0; }
  bool is_negative() const { return num_ < 0; }
  bool is_integer() const { return den_ == 1; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  // "p/q" with the sign on the numerator; integers render without "/q"
  // ("-3/2", "1/2", "0"). parse() accepts both forms and throws
  // std::invalid_argument on anything else.
  std::string to_string() const;
  static Rat parse(const std::string& text);

 private:
  std::int64_t num_;
  std::int64_t den_;  // > 0 always
};

inline Rat min(const Rat& a, const Rat& b) { return a < b ? a : b; }
inline Rat max(const Rat& a, const Rat& b) { return a < b ? b : a; }

// Convenience factory mirroring the two-argument constructor.
inline Rat rat(std::int64_t num, std::int64_t den = 1) { return Rat(num, den); }

std::ostream& operator<<(std::ostream& out, const Rat& r);

}  // namespace widthlab

#endif  // WIDTHLAB_RAT_HPP
