#pragma once

#include <cmath>
#include <numbers>

namespace hetmtt {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  constexpr Vec2& operator/=(double s) { x /= s; y /= s; return *this; }

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return a /= s; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double squared_norm(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
constexpr double squared_distance(Vec2 a, Vec2 b) { return squared_norm(a - b); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Angle of a vector in the global frame, in (-pi, pi].
inline double angle_of(Vec2 v) { return std::atan2(v.y, v.x); }

inline Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

/// Rotates `p` by `angle` about `pivot`.
inline Vec2 rotate_about(Vec2 p, Vec2 pivot, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Vec2 d = p - pivot;
  return pivot + Vec2{c * d.x - s * d.y, s * d.x + c * d.y};
}

}  // namespace hetmtt
