// Copyright 2026 The Mochi Authors
// SPDX-License-Identifier: Apache-2.0

// Core numeric types and the primitive tests shared by every other module.
// Everything here is a pure function over values.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "mochi/error.hpp"

namespace mochi {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  constexpr double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x; y += o.y; z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x; y -= o.y; z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s; y *= s; z *= s;
    return *this;
  }

  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
constexpr double length_squared(const Vec3& a) { return dot(a, a); }
inline double length(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalize(const Vec3& a) { return a / length(a); }
constexpr Vec3 min(const Vec3& a, const Vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
constexpr Vec3 max(const Vec3& a, const Vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}
inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

struct Aabb {
  Vec3 min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};
  Vec3 max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};

  static constexpr Aabb around(const Vec3& center, double half_extent) {
    const Vec3 h{half_extent, half_extent, half_extent};
    return {center - h, center + h};
  }

  constexpr bool valid() const { return min.x <= max.x && min.y <= max.y && min.z <= max.z; }

  constexpr void expand(const Vec3& p) {
    min = mochi::min(min, p);
    max = mochi::max(max, p);
  }
  constexpr void expand(const Aabb& b) {
    min = mochi::min(min, b.min);
    max = mochi::max(max, b.max);
  }

  constexpr Vec3 extent() const { return max - min; }
  constexpr Vec3 centroid() const { return (min + max) * 0.5; }
  inline double diagonal() const { return length(extent()); }

  constexpr double surface_area() const {
    if (!valid()) return 0.0;
    const Vec3 e = extent();
    return 2.0 * (e.x * e.y + e.y * e.z + e.z * e.x);
  }

  constexpr bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }
  constexpr bool contains(const Aabb& b) const { return contains(b.min) && contains(b.max); }
  constexpr bool overlaps(const Aabb& b) const {
    return min.x <= b.max.x && b.min.x <= max.x && min.y <= b.max.y && b.min.y <= max.y &&
           min.z <= b.max.z && b.min.z <= max.z;
  }

  constexpr int longest_axis() const {
    const Vec3 e = extent();
    if (e.x >= e.y && e.x >= e.z) return 0;
    return e.y >= e.z ? 1 : 2;
  }

  friend constexpr bool operator==(const Aabb&, const Aabb&) = default;
};

/// A finite ray. `direction` must be unit length; `ray_id` is opaque to the kernel.
struct Ray {
  Vec3 origin;
  Vec3 direction;
  double t_min = 0.0;
  double t_max = 0.0;
  std::uint64_t ray_id = 0;

  constexpr Vec3 at(double t) const { return origin + direction * t; }
};

inline constexpr double kUnitDirectionTolerance = 1e-9;

inline bool is_valid(const Ray& ray) {
  return is_finite(ray.origin) && is_finite(ray.direction) && ray.t_min >= 0.0 &&
         ray.t_max >= ray.t_min &&
         std::abs(length(ray.direction) - 1.0) <= kUnitDirectionTolerance;
}

struct Sphere {
  Vec3 center;
  double radius = 1.0;
  double mass = 1.0;
  Vec3 velocity;

  Aabb bounds() const { return Aabb::around(center, radius); }
};

inline void validate(const Sphere& s) {
  if (!is_finite(s.center) || !is_finite(s.velocity) || !std::isfinite(s.radius) ||
      !std::isfinite(s.mass))
    throw InvalidScene("sphere has non-finite fields");
  if (!(s.radius > 0.0)) throw InvalidScene("sphere radius must be positive");
  if (!(s.mass > 0.0)) throw InvalidScene("sphere mass must be positive");
}

enum class TriangleKind : std::uint8_t { Original, AuxAB, AuxBC, AuxCA };

struct Triangle {
  Vec3 a;
  Vec3 b;
  Vec3 c;
  Vec3 normal;
  std::uint32_t source_id = 0;
  TriangleKind kind = TriangleKind::Original;

  Aabb bounds() const {
    Aabb box{a, a};
    box.expand(b);
    box.expand(c);
    return box;
  }
  double longest_edge() const {
    return std::sqrt(std::max({length_squared(b - a), length_squared(c - b), length_squared(a - c)}));
  }
};

inline constexpr double kCoplanarTolerance = 1e-9;
inline constexpr double kBarycentricTolerance = 1e-9;
inline constexpr double kDegenerateAreaRatio = 1e-12;

inline bool is_degenerate(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double area = 0.5 * length(cross(b - a, c - a));
  const double longest =
      std::max({length_squared(b - a), length_squared(c - b), length_squared(a - c)});
  return !(area >= kDegenerateAreaRatio * longest) || !(longest > 0.0);
}

/// Builds a triangle with its right-handed unit normal; rejects degenerate input.
inline Triangle make_triangle(const Vec3& a, const Vec3& b, const Vec3& c, std::uint32_t source_id,
                              TriangleKind kind = TriangleKind::Original) {
  if (!is_finite(a) || !is_finite(b) || !is_finite(c))
    throw InvalidScene("triangle has non-finite vertices");
  if (is_degenerate(a, b, c))
    throw DegenerateTriangle("triangle " + std::to_string(source_id) + " has near-zero area");
  return {a, b, c, normalize(cross(b - a, c - a)), source_id, kind};
}

/// Slab test. Returns the entry parameter clipped to [t_min, t_max]; a ray starting
/// inside the box hits at t_min.
inline std::optional<double> ray_aabb_intersect(const Ray& ray, const Aabb& box) {
  double t_near = ray.t_min;
  double t_far = ray.t_max;
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis];
    const double d = ray.direction[axis];
    if (d == 0.0) {
      if (o < box.min[axis] || o > box.max[axis]) return std::nullopt;
      continue;
    }
    double t0 = (box.min[axis] - o) / d;
    double t1 = (box.max[axis] - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  return t_near;
}

struct TriangleHit {
  double t = 0.0;
  double u = 0.0;  // weight of b
  double v = 0.0;  // weight of c
};

/// Moller-Trumbore. Rays lying in (or parallel to) the triangle's plane always miss:
/// ray tracing hardware leaves that case undefined and the reductions must not rely on it.
inline std::optional<TriangleHit> ray_triangle_intersect(const Ray& ray, const Triangle& tri) {
  const Vec3 e1 = tri.b - tri.a;
  const Vec3 e2 = tri.c - tri.a;
  const Vec3 n = cross(e1, e2);
  const double n_len = length(n);
  if (std::abs(dot(ray.direction, n)) < kCoplanarTolerance * n_len) return std::nullopt;

  const Vec3 p = cross(ray.direction, e2);
  const double det = dot(e1, p);
  const double inv_det = 1.0 / det;
  const Vec3 s = ray.origin - tri.a;
  const double u = dot(s, p) * inv_det;
  if (u < -kBarycentricTolerance || u > 1.0 + kBarycentricTolerance) return std::nullopt;
  const Vec3 q = cross(s, e1);
  const double v = dot(ray.direction, q) * inv_det;
  if (v < -kBarycentricTolerance || u + v > 1.0 + kBarycentricTolerance) return std::nullopt;
  const double t = dot(e2, q) * inv_det;
  if (t < ray.t_min || t > ray.t_max) return std::nullopt;
  return TriangleHit{t, u, v};
}

/// Distance from p to the closed segment [a, b] is within tol.
inline bool point_on_segment(const Vec3& p, const Vec3& a, const Vec3& b, double tol) {
  const Vec3 ab = b - a;
  const double len2 = length_squared(ab);
  double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return length(p - (a + ab * s)) <= tol;
}

}  // namespace mochi
