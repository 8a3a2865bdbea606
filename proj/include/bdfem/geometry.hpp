#pragma once

#include <array>
#include <cmath>

namespace bdfem {

struct Vec2 {
  double x = 0.0, y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
  friend Vec2 operator/(Vec2 v, double s) { return {v.x / s, v.y / s}; }
  Vec2& operator+=(Vec2 b) { x += b.x; y += b.y; return *this; }
  Vec2& operator-=(Vec2 b) { x -= b.x; y -= b.y; return *this; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

/// Counterclockwise 90-degree rotation.
inline Vec2 rot90(Vec2 v) { return {-v.y, v.x}; }

/// 2x2 matrix with rows indexed first: m[k][l] ~ entry (k,l).
struct Mat2 {
  std::array<std::array<double, 2>, 2> a{{{0.0, 0.0}, {0.0, 0.0}}};
  double& operator()(int k, int l) { return a[k][l]; }
  double operator()(int k, int l) const { return a[k][l]; }
  friend Mat2 operator-(const Mat2& m, const Mat2& n) {
    Mat2 r;
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) r(k, l) = m(k, l) - n(k, l);
    return r;
  }
  double frobenius2() const {
    double s = 0;
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) s += a[k][l] * a[k][l];
    return s;
  }
};

inline double signed_area(Vec2 a, Vec2 b, Vec2 c) {
  return 0.5 * cross(b - a, c - a);
}

/// Barycentric coordinates of p with respect to triangle (a,b,c).
inline std::array<double, 3> barycentric(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
  const double area2 = cross(b - a, c - a);
  return {cross(b - p, c - p) / area2, cross(c - p, a - p) / area2,
          cross(a - p, b - p) / area2};
}

inline Vec2 from_barycentric(Vec2 a, Vec2 b, Vec2 c,
                             const std::array<double, 3>& l) {
  return l[0] * a + l[1] * b + l[2] * c;
}

/// Longest edge length = diam(K) for a triangle.
inline double triangle_diameter(Vec2 a, Vec2 b, Vec2 c) {
  return std::max({dist(a, b), dist(b, c), dist(c, a)});
}

inline double point_segment_distance(Vec2 a, Vec2 b, Vec2 p) {
  const Vec2 d = b - a;
  const double len2 = dot(d, d);
  double t = len2 > 0 ? dot(p - a, d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return dist(p, a + t * d);
}

/// Distance from p to the closed triangle (a,b,c); zero if p lies inside.
inline double point_triangle_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
  const auto l = barycentric(a, b, c, p);
  if (l[0] >= 0 && l[1] >= 0 && l[2] >= 0) return 0.0;
  return std::min({point_segment_distance(a, b, p),
                   point_segment_distance(b, c, p),
                   point_segment_distance(c, a, p)});
}

}  // namespace bdfem
