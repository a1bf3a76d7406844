// Copyright 2026 The Mochi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mochi/collision_set.hpp"
#include "mochi/geometry.hpp"
#include "mochi/reductions.hpp"

namespace mochi {

struct ParticleSystem {
  std::vector<Sphere> spheres;
  double dt = 1e-3;
  std::optional<Aabb> bounds;  // reflecting walls
  Vec3 gravity;                // zero unless explicitly set
  std::uint64_t step_index = 0;
};

struct StepMetrics {
  std::uint64_t step = 0;
  std::uint64_t collisions = 0;        // pairs in contact this step
  std::uint64_t impulses_applied = 0;  // approaching pairs that were resolved
  std::uint64_t broad_phase_hits = 0;
  double cd_ms = 0.0;
  double step_ms = 0.0;
  /// Summed m * dv from wall reflections; external to the particle system.
  Vec3 wall_impulse;
  double kinetic_energy_before_response = 0.0;
  double kinetic_energy_after_response = 0.0;
};

inline Vec3 total_momentum(std::span<const Sphere> spheres) {
  Vec3 p;
  for (const Sphere& s : spheres) p += s.velocity * s.mass;
  return p;
}

/// Sum of m * |v|, the scale that momentum errors are measured against.
inline double momentum_magnitude_sum(std::span<const Sphere> spheres) {
  double total = 0.0;
  for (const Sphere& s : spheres) total += s.mass * length(s.velocity);
  return total;
}

inline double kinetic_energy(std::span<const Sphere> spheres) {
  double e = 0.0;
  for (const Sphere& s : spheres) e += 0.5 * s.mass * length_squared(s.velocity);
  return e;
}

/// Elastic impulse along the center line; skipped when the pair is already
/// separating. Returns true if velocities changed.
inline bool resolve_elastic(Sphere& a, Sphere& b) {
  const Vec3 delta = b.center - a.center;
  const double dist = length(delta);
  if (!(dist > 0.0)) return false;
  const Vec3 n = delta / dist;
  const double approach = dot(a.velocity - b.velocity, n);
  if (approach <= 0.0) return false;
  const double impulse = 2.0 * a.mass * b.mass / (a.mass + b.mass) * approach;
  a.velocity -= n * (impulse / a.mass);
  b.velocity += n * (impulse / b.mass);
  return true;
}

namespace detail {

inline void reflect_axis(Sphere& s, int axis, const Aabb& box, Vec3& impulse) {
  const double lo = box.min[axis] + s.radius;
  const double hi = box.max[axis] - s.radius;
  double& x = s.center[axis];
  double& v = s.velocity[axis];
  if (x < lo) {
    x = std::min(2.0 * lo - x, std::max(lo, hi));
    if (v < 0.0) {
      impulse[axis] += -2.0 * s.mass * v;
      v = -v;
    }
  } else if (x > hi) {
    x = std::max(2.0 * hi - x, std::min(lo, hi));
    if (v > 0.0) {
      impulse[axis] += -2.0 * s.mass * v;
      v = -v;
    }
  }
}

}  // namespace detail

/// One timestep: detect with edge rays, resolve contacts in ascending pair order,
/// integrate, reflect at the walls.
inline ParticleSystem step(ParticleSystem system, StepMetrics* metrics = nullptr,
                           const LaunchOptions& options = {}) {
  using Clock = std::chrono::steady_clock;
  StepMetrics m;
  m.step = system.step_index;
  const auto start = Clock::now();

  auto& spheres = system.spheres;
  if (!spheres.empty()) {
    CollisionSet contacts(static_cast<std::uint32_t>(spheres.size()));
    const auto cd_start = Clock::now();
    const LaunchStats stats = detect_spheres(std::span<const Sphere>(spheres), contacts, options);
    m.cd_ms = std::chrono::duration<double, std::milli>(Clock::now() - cd_start).count();
    m.broad_phase_hits = stats.broad_phase_hits;
    m.kinetic_energy_before_response = kinetic_energy(spheres);
    contacts.for_each_pair([&](std::uint32_t i, std::uint32_t j) {
      ++m.collisions;
      if (resolve_elastic(spheres[i], spheres[j])) ++m.impulses_applied;
    });
    m.kinetic_energy_after_response = kinetic_energy(spheres);
  }

  for (Sphere& s : spheres) {
    s.velocity += system.gravity * system.dt;
    s.center += s.velocity * system.dt;
    if (system.bounds)
      for (int axis = 0; axis < 3; ++axis) detail::reflect_axis(s, axis, *system.bounds, m.wall_impulse);
  }
  ++system.step_index;
  m.step_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  if (metrics) *metrics = m;
  return system;
}

inline ParticleSystem run(ParticleSystem system, std::uint64_t n_steps,
                          const std::function<void(const StepMetrics&)>& sink = {},
                          const LaunchOptions& options = {}) {
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    StepMetrics m;
    system = step(std::move(system), &m, options);
    if (sink) sink(m);
  }
  return system;
}

}  // namespace mochi
