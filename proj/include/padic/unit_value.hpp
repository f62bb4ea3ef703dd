#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "padic/rational.hpp"

namespace padic {

/// Fraction of a full turn, kept reduced in [0, 1).
class Phase {
 public:
  constexpr Phase() = default;

  Phase(std::int64_t num, std::int64_t den) {
    if (den <= 0) throw std::domain_error("phase denominator must be positive");
    num %= den;
    if (num < 0) num += den;
    const auto g = std::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  Frac turns() const { return Frac(num_, den_); }

  friend Phase operator+(const Phase& a, const Phase& b) {
    const auto l = std::lcm(a.den_, b.den_);
    return Phase(a.num_ * (l / a.den_) + b.num_ * (l / b.den_), l);
  }

  Phase operator-() const { return Phase(-num_, den_); }

  friend bool operator==(const Phase&, const Phase&) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// sqrt(radicand) * exp(2 pi i * phase).  Radicand 0 is the zero value.
/// Products and conjugates stay exact; rounding only happens in to_complex().
class UnitValue {
 public:
  constexpr UnitValue() = default;

  UnitValue(std::uint64_t radicand, Phase phase) : radicand_(radicand), phase_(radicand == 0 ? Phase{} : phase) {}

  static UnitValue one() { return UnitValue(1, Phase{}); }
  static UnitValue zero() { return UnitValue(); }

  std::uint64_t radicand() const { return radicand_; }
  const Phase& phase() const { return phase_; }
  bool is_zero() const { return radicand_ == 0; }

  friend UnitValue operator*(const UnitValue& a, const UnitValue& b) {
    if (a.is_zero() || b.is_zero()) return zero();
    std::uint64_t r = 0;
    if (__builtin_mul_overflow(a.radicand_, b.radicand_, &r)) throw std::overflow_error("unit value radicand overflow");
    return UnitValue(r, a.phase_ + b.phase_);
  }

  UnitValue conj() const { return UnitValue(radicand_, -phase_); }

  /// |value| squared, exactly.
  std::uint64_t norm() const { return radicand_; }

  Complex to_complex() const {
    if (is_zero()) return {0.0, 0.0};
    const double mag = std::sqrt(static_cast<double>(radicand_));
    // Quarter turns are returned without trigonometric rounding.
    switch (phase_.den()) {
      case 1:
        return {mag, 0.0};
      case 2:
        return {-mag, 0.0};
      case 4:
        return phase_.num() == 1 ? Complex{0.0, mag} : Complex{0.0, -mag};
      default:
        break;
    }
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(phase_.num()) / static_cast<double>(phase_.den());
    return {mag * std::cos(angle), mag * std::sin(angle)};
  }

  /// Exact real value when the radicand is a perfect square and the phase is
  /// 0 or 1/2; empty otherwise.
  std::optional<Frac> exact_real() const {
    if (is_zero()) return Frac(0);
    if (phase_.den() > 2) return std::nullopt;
    auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(radicand_)));
    while (root * root > radicand_) --root;
    while ((root + 1) * (root + 1) <= radicand_) ++root;
    if (root * root != radicand_) return std::nullopt;
    Frac v(root);
    return phase_.den() == 2 ? Frac(-v) : v;
  }

  friend bool operator==(const UnitValue&, const UnitValue&) = default;

 private:
  std::uint64_t radicand_ = 0;
  Phase phase_{};
};

}  // namespace padic
