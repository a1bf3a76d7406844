// Copyright 2026 The Mochi Authors
// SPDX-License-Identifier: Apache-2.0

// Seeded scene generators and the plain-text scene file format.
//
//   mochi-scene 1
//   shape sphere                     (or: shape ellipsoid)
//   count <n>
//   meta <key> <value>               (zero or more, informational)
//   columns x y z radius mass vx vy vz   (ellipsoid: x y z ax ay az)
//   end_header
//   <one whitespace-separated record per object, %.17g>

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mochi/error.hpp"
#include "mochi/geometry.hpp"
#include "mochi/mesh.hpp"
#include "mochi/reductions.hpp"

namespace mochi {

enum class SceneShape { Sphere, Ellipsoid };

struct Scene {
  SceneShape shape = SceneShape::Sphere;
  std::vector<Sphere> spheres;
  std::vector<Ellipsoid> ellipsoids;
  std::map<std::string, std::string> meta;

  std::size_t size() const { return shape == SceneShape::Sphere ? spheres.size() : ellipsoids.size(); }
};

namespace detail {

inline constexpr std::uint64_t kRadiusStream = 0x9e3779b97f4a7c15ull;
inline constexpr std::uint64_t kVelocityStream = 0xbf58476d1ce4e5b9ull;

inline Vec3 random_direction(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const Vec3 v{u(rng), u(rng), u(rng)};
    const double l2 = length_squared(v);
    if (l2 > 1e-6 && l2 <= 1.0) return v / std::sqrt(l2);
  }
}

inline std::vector<Vec3> unit_cube_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts(n);
  for (Vec3& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

inline void assign_velocities(std::vector<Sphere>& spheres, double speed, std::uint64_t seed) {
  if (speed == 0.0) return;
  std::mt19937_64 rng(seed ^ kVelocityStream);
  for (Sphere& s : spheres) s.velocity = random_direction(rng) * speed;
}

}  // namespace detail

/// Centers uniform in the unit cube; the same seed yields the same centers for any
/// radius.
inline std::vector<Sphere> uniform_spheres(std::size_t n, double radius, std::uint64_t seed,
                                           double speed = 0.0) {
  if (n == 0 || !(radius > 0.0)) throw InvalidParams("uniform scene needs n >= 1 and radius > 0");
  std::vector<Sphere> spheres;
  spheres.reserve(n);
  for (const Vec3& c : detail::unit_cube_points(n, seed)) spheres.push_back({c, radius, 1.0, {}});
  detail::assign_velocities(spheres, speed, seed);
  return spheres;
}

/// Radii ~ Normal(mean, sd), redrawn until above r_min.
inline std::vector<Sphere> gaussian_spheres(std::size_t n, double mean, double sd, double r_min,
                                            std::uint64_t seed, double speed = 0.0) {
  if (n == 0 || !(mean > 0.0) || !(sd > 0.0) || !(r_min > 0.0))
    throw InvalidParams("gaussian scene needs n >= 1 and positive mean, sd, r_min");
  std::mt19937_64 rng(seed ^ detail::kRadiusStream);
  std::normal_distribution<double> normal(mean, sd);
  std::vector<Sphere> spheres;
  spheres.reserve(n);
  for (const Vec3& c : detail::unit_cube_points(n, seed)) {
    double r = normal(rng);
    while (!(r > r_min)) r = normal(rng);
    spheres.push_back({c, r, 1.0, {}});
  }
  detail::assign_velocities(spheres, speed, seed);
  return spheres;
}

/// Axis-aligned ellipsoids with semi-axes in [0.5, 1.5] x mean_axis.
inline std::vector<Ellipsoid> random_ellipsoids(std::size_t n, double mean_axis, std::uint64_t seed) {
  if (n == 0 || !(mean_axis > 0.0)) throw InvalidParams("ellipsoid scene needs n >= 1, axis > 0");
  std::mt19937_64 rng(seed ^ detail::kRadiusStream);
  std::uniform_real_distribution<double> f(0.5, 1.5);
  std::vector<Ellipsoid> out;
  out.reserve(n);
  for (const Vec3& c : detail::unit_cube_points(n, seed))
    out.push_back({c, {f(rng) * mean_axis, f(rng) * mean_axis, f(rng) * mean_axis}});
  return out;
}

/// Unindexed triangles with vertices within `size` of a uniform center.
inline std::vector<std::array<Vec3, 3>> random_triangle_soup(std::size_t n, double size,
                                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> off(-size, size);
  std::vector<std::array<Vec3, 3>> tris;
  tris.reserve(n);
  while (tris.size() < n) {
    const Vec3 c{u(rng), u(rng), u(rng)};
    std::array<Vec3, 3> t;
    for (Vec3& v : t) v = c + Vec3{off(rng), off(rng), off(rng)};
    if (!is_degenerate(t[0], t[1], t[2]) &&
        length(cross(t[1] - t[0], t[2] - t[0])) > 1e-3 * size * size)
      tris.push_back(t);
  }
  return tris;
}

// ---------------------------------------------------------------------------
// Synthetic deforming mesh: a sheet folding back through itself (self-collisions)
// and a closed sphere mesh sinking through the sheet (inter-object collisions).

struct DeformingMeshParams {
  std::size_t frames = 20;
  std::size_t sheet_cells = 16;
  std::size_t sphere_rings = 8;
  std::size_t sphere_segments = 12;
};

/// Face list shared by every frame of the deforming mesh.
inline std::vector<Face> deforming_mesh_faces(const DeformingMeshParams& p) {
  std::vector<Face> faces;
  const auto g = static_cast<std::uint32_t>(p.sheet_cells);
  const auto row = g + 1;
  for (std::uint32_t j = 0; j < g; ++j)
    for (std::uint32_t i = 0; i < g; ++i) {
      const std::uint32_t v00 = j * row + i, v10 = v00 + 1, v01 = v00 + row, v11 = v01 + 1;
      faces.push_back({v00, v10, v11});
      faces.push_back({v00, v11, v01});
    }
  const std::uint32_t base = row * row;
  const auto rings = static_cast<std::uint32_t>(p.sphere_rings);
  const auto segs = static_cast<std::uint32_t>(p.sphere_segments);
  // vertices: north pole, (rings-1) rings of segs, south pole
  const std::uint32_t north = base;
  const std::uint32_t south = base + 1 + (rings - 1) * segs;
  const auto ring_vertex = [&](std::uint32_t r, std::uint32_t s) {
    return base + 1 + r * segs + (s % segs);
  };
  for (std::uint32_t s = 0; s < segs; ++s) faces.push_back({north, ring_vertex(0, s + 1), ring_vertex(0, s)});
  for (std::uint32_t r = 0; r + 1 < rings - 1; ++r)
    for (std::uint32_t s = 0; s < segs; ++s) {
      faces.push_back({ring_vertex(r, s), ring_vertex(r, s + 1), ring_vertex(r + 1, s + 1)});
      faces.push_back({ring_vertex(r, s), ring_vertex(r + 1, s + 1), ring_vertex(r + 1, s)});
    }
  for (std::uint32_t s = 0; s < segs; ++s)
    faces.push_back({south, ring_vertex(rings - 2, s), ring_vertex(rings - 2, s + 1)});
  return faces;
}

inline std::vector<Vec3> deforming_mesh_vertices(const DeformingMeshParams& p, std::size_t frame) {
  const double phase = p.frames > 1 ? static_cast<double>(frame) / static_cast<double>(p.frames - 1) : 0.0;
  std::vector<Vec3> verts;
  const std::size_t g = p.sheet_cells;
  // Fold angle sweeps 20..215 degrees around the hinge x = 0.5; the folded half bends
  // quadratically so past 180 degrees it cuts back through the flat half.
  const double angle = (20.0 + 195.0 * phase) * std::numbers::pi / 180.0;
  for (std::size_t j = 0; j <= g; ++j)
    for (std::size_t i = 0; i <= g; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(g);
      const double y = static_cast<double>(j) / static_cast<double>(g);
      if (x <= 0.5) {
        verts.push_back({x, y, 0.0});
      } else {
        const double s = x - 0.5;
        verts.push_back({0.5 + s * std::cos(angle), y, s * std::sin(angle) + 3.0 * s * s});
      }
    }
  const Vec3 center{0.3, 0.55, 0.25 - 0.45 * phase};
  const double radius = 0.12;
  const std::size_t rings = p.sphere_rings, segs = p.sphere_segments;
  verts.push_back(center + Vec3{0, 0, radius});
  for (std::size_t r = 1; r < rings; ++r) {
    const double theta = std::numbers::pi * static_cast<double>(r) / static_cast<double>(rings);
    for (std::size_t s = 0; s < segs; ++s) {
      const double phi = 2.0 * std::numbers::pi * (static_cast<double>(s) + 0.37) / static_cast<double>(segs);
      verts.push_back(center + Vec3{radius * std::sin(theta) * std::cos(phi),
                                    radius * std::sin(theta) * std::sin(phi), radius * std::cos(theta)});
    }
  }
  verts.push_back(center - Vec3{0, 0, radius});
  return verts;
}

inline FrameSequence deforming_mesh_sequence(const DeformingMeshParams& p = {}) {
  const auto faces = deforming_mesh_faces(p);
  std::vector<TriangleFrame> frames;
  for (std::size_t f = 0; f < p.frames; ++f) frames.push_back(make_frame(deforming_mesh_vertices(p, f), faces));
  return make_sequence(std::move(frames));
}

// ---------------------------------------------------------------------------
// Scene files

inline void write_scene(std::ostream& out, const Scene& scene) {
  out << "mochi-scene 1\n";
  out << "shape " << (scene.shape == SceneShape::Sphere ? "sphere" : "ellipsoid") << "\n";
  out << "count " << scene.size() << "\n";
  for (const auto& [k, v] : scene.meta) out << "meta " << k << ' ' << v << "\n";
  char buf[512];
  if (scene.shape == SceneShape::Sphere) {
    out << "columns x y z radius mass vx vy vz\nend_header\n";
    for (const Sphere& s : scene.spheres) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                    s.center.x, s.center.y, s.center.z, s.radius, s.mass, s.velocity.x,
                    s.velocity.y, s.velocity.z);
      out << buf;
    }
  } else {
    out << "columns x y z ax ay az\nend_header\n";
    for (const Ellipsoid& e : scene.ellipsoids) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g\n", e.center.x,
                    e.center.y, e.center.z, e.semi_axes.x, e.semi_axes.y, e.semi_axes.z);
      out << buf;
    }
  }
}

inline Scene read_scene(std::istream& in) {
  Scene scene;
  std::string line;
  if (!std::getline(in, line) || line.rfind("mochi-scene", 0) != 0)
    throw ParseError("missing 'mochi-scene' magic");
  std::size_t count = 0;
  bool have_count = false;
  std::vector<std::string> columns;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string key;
    if (!(words >> key)) continue;
    if (key == "end_header") break;
    if (key == "shape") {
      std::string shape;
      words >> shape;
      if (shape == "sphere") scene.shape = SceneShape::Sphere;
      else if (shape == "ellipsoid") scene.shape = SceneShape::Ellipsoid;
      else throw ParseError("unknown shape '" + shape + "'");
    } else if (key == "count") {
      if (!(words >> count)) throw ParseError("malformed count");
      have_count = true;
    } else if (key == "meta") {
      std::string k, v;
      words >> k;
      std::getline(words >> std::ws, v);
      scene.meta[k] = v;
    } else if (key == "columns") {
      for (std::string c; words >> c;) columns.push_back(c);
    } else {
      throw ParseError("unknown header key '" + key + "'");
    }
  }
  if (!have_count) throw ParseError("missing count");
  const std::vector<std::string> expect =
      scene.shape == SceneShape::Sphere
          ? std::vector<std::string>{"x", "y", "z", "radius", "mass", "vx", "vy", "vz"}
          : std::vector<std::string>{"x", "y", "z", "ax", "ay", "az"};
  if (!columns.empty() && columns != expect) throw ParseError("unexpected column layout");
  for (std::size_t i = 0; i < count; ++i) {
    std::array<double, 8> v{};
    for (std::size_t k = 0; k < expect.size(); ++k)
      if (!(in >> v[k])) throw ParseError("record " + std::to_string(i) + " is truncated");
    if (scene.shape == SceneShape::Sphere) {
      Sphere s{{v[0], v[1], v[2]}, v[3], v[4], {v[5], v[6], v[7]}};
      validate(s);
      scene.spheres.push_back(s);
    } else {
      Ellipsoid e{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
      if (!(e.semi_axes.x > 0 && e.semi_axes.y > 0 && e.semi_axes.z > 0) || !is_finite(e.center))
        throw InvalidScene("ellipsoid " + std::to_string(i) + " has invalid axes");
      scene.ellipsoids.push_back(e);
    }
  }
  return scene;
}

inline void save_scene(const std::string& path, const Scene& scene) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParams("cannot write " + path);
  write_scene(out, scene);
}

inline Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_scene(in);
}

}  // namespace mochi
