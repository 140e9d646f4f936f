#pragma once

#include <cmath>

namespace gcpc {

// Balanced three-phase quantity projected onto a rotating dq frame (p.u.).
struct DqVector {
  double d = 0.0;
  double q = 0.0;

  constexpr DqVector& operator+=(const DqVector& o) {
    d += o.d;
    q += o.q;
    return *this;
  }
  constexpr DqVector& operator-=(const DqVector& o) {
    d -= o.d;
    q -= o.q;
    return *this;
  }
  constexpr DqVector& operator*=(double s) {
    d *= s;
    q *= s;
    return *this;
  }

  friend constexpr DqVector operator+(DqVector a, const DqVector& b) { return a += b; }
  friend constexpr DqVector operator-(DqVector a, const DqVector& b) { return a -= b; }
  friend constexpr DqVector operator-(const DqVector& a) { return {-a.d, -a.q}; }
  friend constexpr DqVector operator*(double s, DqVector a) { return a *= s; }
  friend constexpr DqVector operator*(DqVector a, double s) { return a *= s; }
  friend constexpr bool operator==(const DqVector&, const DqVector&) = default;
};

inline double norm(const DqVector& v) { return std::hypot(v.d, v.q); }

inline bool is_finite(const DqVector& v) { return std::isfinite(v.d) && std::isfinite(v.q); }

// Multiplication by j: (d, q) -> (-q, d). Carries the omega0 cross-coupling.
constexpr DqVector cross(const DqVector& v) { return {-v.q, v.d}; }

// Re-expresses v in a frame leading the current one by `delta` rad, i.e. v * e^{-j delta}.
inline DqVector rotate(const DqVector& v, double delta) {
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  return {v.d * c + v.q * s, -v.d * s + v.q * c};
}

// Real power of a voltage/current pair expressed in the same frame.
constexpr double active_power(const DqVector& v, const DqVector& i) { return v.d * i.d + v.q * i.q; }

}  // namespace gcpc
