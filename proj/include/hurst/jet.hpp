#pragma once

#include <cmath>

namespace hurst {

/// Truncated Taylor jet: value with first and second derivative along one
/// direction. Enough forward-mode differentiation for the symbol integrals.
struct Jet {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;

  constexpr Jet() = default;
  constexpr Jet(double value) : v(value) {}  // NOLINT: constants lift implicitly
  constexpr Jet(double value, double first, double second) : v(value), d1(first), d2(second) {}

  static constexpr Jet variable(double x) { return {x, 1.0, 0.0}; }

  Jet& operator+=(const Jet& o) { v += o.v; d1 += o.d1; d2 += o.d2; return *this; }
  Jet& operator-=(const Jet& o) { v -= o.v; d1 -= o.d1; d2 -= o.d2; return *this; }
  Jet& operator*=(const Jet& o) {
    *this = Jet{v * o.v, d1 * o.v + v * o.d1, d2 * o.v + 2.0 * d1 * o.d1 + v * o.d2};
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    const double inv = 1.0 / o.v;
    const double q = v * inv;
    const double q1 = (d1 - q * o.d1) * inv;
    const double q2 = (d2 - 2.0 * q1 * o.d1 - q * o.d2) * inv;
    *this = Jet{q, q1, q2};
    return *this;
  }
};

inline Jet operator-(const Jet& a) { return {-a.v, -a.d1, -a.d2}; }
inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator/(Jet a, const Jet& b) { return a /= b; }

/// Chain rule for a scalar function with known f, f', f'' at a.v.
inline Jet chain(const Jet& a, double f0, double f1, double f2) {
  return {f0, f1 * a.d1, f2 * a.d1 * a.d1 + f1 * a.d2};
}

inline Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
inline Jet log(const Jet& a) { return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

}  // namespace hurst
