#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace padic {

using BigInt = boost::multiprecision::cpp_int;

// Reduced fraction with positive denominator; arbitrary precision.
using Frac = boost::multiprecision::cpp_rational;

using Complex = std::complex<double>;

inline Frac make_frac(const BigInt& num, const BigInt& den) {
  if (den == 0) throw std::domain_error("fraction with zero denominator");
  return Frac(num, den);
}

inline BigInt numerator_of(const Frac& f) { return boost::multiprecision::numerator(f); }
inline BigInt denominator_of(const Frac& f) { return boost::multiprecision::denominator(f); }

inline double to_double(const Frac& f) { return f.convert_to<double>(); }

// Every finite double is a dyadic rational, so this conversion is exact.
inline Frac exact_frac(double x) {
  if (!std::isfinite(x)) throw std::domain_error("non-finite value has no rational form");
  int exp = 0;
  double mant = std::frexp(x, &exp);
  // mant * 2^53 is an integer for any double.
  auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
  exp -= 53;
  Frac r(scaled);
  if (exp > 0) {
    r *= Frac(BigInt(1) << exp);
  } else if (exp < 0) {
    r /= Frac(BigInt(1) << (-exp));
  }
  return r;
}

inline Frac pow2(int e) {
  if (e >= 0) return Frac(BigInt(1) << e);
  return Frac(BigInt(1), BigInt(1) << (-e));
}

inline std::string to_string(const Frac& f) {
  if (denominator_of(f) == 1) return numerator_of(f).str();
  return numerator_of(f).str() + "/" + denominator_of(f).str();
}

inline Frac frac_abs(const Frac& f) { return f < 0 ? Frac(-f) : f; }

// Overflow-checked 64-bit product; the grid never silently wraps.
inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("64-bit integer overflow");
  return out;
}

}  // namespace padic
