#pragma once

#include <cmath>

#include "nkflow/errors.hpp"

namespace nkflow {

/// A real value paired with its first derivative in the flow parameter s.
///
/// All form coefficients in the engine are jets, so the d_s channel of the
/// exterior derivative is exact: arithmetic carries the derivative through
/// the product, quotient and power rules.
struct Jet {
  double val{0.0};
  double dds{0.0};

  constexpr Jet() = default;
  constexpr Jet(double v) : val(v) {}  // NOLINT: implicit on purpose
  constexpr Jet(double v, double d) : val(v), dds(d) {}

  /// The jet of the flow coordinate itself at value s: (s, 1).
  static constexpr Jet coordinate(double s) { return Jet{s, 1.0}; }

  constexpr Jet operator-() const { return {-val, -dds}; }
  constexpr Jet& operator+=(const Jet& o) {
    val += o.val;
    dds += o.dds;
    return *this;
  }
  constexpr Jet& operator-=(const Jet& o) {
    val -= o.val;
    dds -= o.dds;
    return *this;
  }
  constexpr Jet& operator*=(const Jet& o) {
    dds = val * o.dds + dds * o.val;
    val *= o.val;
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    if (o.val == 0.0) throw domain_error("jet division by zero value");
    dds = (dds * o.val - val * o.dds) / (o.val * o.val);
    val /= o.val;
    return *this;
  }
};

constexpr Jet operator+(Jet a, const Jet& b) { return a += b; }
constexpr Jet operator-(Jet a, const Jet& b) { return a -= b; }
constexpr Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator/(Jet a, const Jet& b) { return a /= b; }

/// a^p for real exponent p; requires a.val > 0.
inline Jet pow(const Jet& a, double p) {
  if (a.val <= 0.0) throw domain_error("jet pow requires positive value");
  const double v = std::pow(a.val, p);
  return {v, p * std::pow(a.val, p - 1.0) * a.dds};
}

inline Jet sqrt(const Jet& a) { return pow(a, 0.5); }

/// |a|; undefined derivative at a.val == 0.
inline Jet abs(const Jet& a) { return a.val < 0.0 ? -a : a; }

inline bool isfinite(const Jet& a) {
  return std::isfinite(a.val) && std::isfinite(a.dds);
}

}  // namespace nkflow
