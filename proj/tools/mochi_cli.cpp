// Copyright 2026 The Mochi Authors
// SPDX-License-Identifier: Apache-2.0

// mochi: scene generation, detection, verification, benchmarks and simulation.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mochi/collision_set.hpp"
#include "mochi/oracle.hpp"
#include "mochi/ply.hpp"
#include "mochi/reductions.hpp"
#include "mochi/scene.hpp"
#include "mochi/simulate.hpp"

namespace fs = std::filesystem;
using namespace mochi;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr std::size_t kOracleMaxObjects = 8192;
constexpr std::size_t kOracleMaxTriangles = 4000;

// ---------------------------------------------------------------------------
// Options shared across subcommands

struct GenParams {
  std::string kind = "uniform";
  std::size_t n = 10000;
  double radius = 0.001;
  double mean = 0.004;
  double sd = 0.005;
  double r_min = 1e-5;
  double axis = 0.004;
  double speed = 0.0;
  double size = 0.02;
  std::size_t frames = 20;
  std::uint64_t seed = 1;
};

void add_gen_options(CLI::App* cmd, GenParams& g) {
  cmd->add_option("--kind", g.kind, "uniform | gaussian | ellipsoid | deforming-mesh | soup")
      ->check(CLI::IsMember({"uniform", "gaussian", "ellipsoid", "deforming-mesh", "soup"}));
  cmd->add_option("--n", g.n, "object count (triangles for soup)");
  cmd->add_option("--radius", g.radius, "uniform radius");
  cmd->add_option("--mean", g.mean, "gaussian mean radius");
  cmd->add_option("--sd", g.sd, "gaussian radius standard deviation");
  cmd->add_option("--r-min", g.r_min, "gaussian truncation: radii are redrawn until above this");
  cmd->add_option("--axis", g.axis, "mean ellipsoid semi-axis");
  cmd->add_option("--speed", g.speed, "initial speed, random directions");
  cmd->add_option("--size", g.size, "triangle soup vertex spread");
  cmd->add_option("--frames", g.frames, "deforming-mesh frame count");
  cmd->add_option("--seed", g.seed, "PRNG seed");
}

struct DetectParams {
  int reduction = 2;
  std::string mode = "exact";
  bool refit = true;
  std::string adjacency;
  std::optional<double> epsilon;
  unsigned threads = 0;
  bool no_aux = false;
  bool no_vertex_probes = false;
};

void add_detect_options(CLI::App* cmd, DetectParams& d) {
  cmd->add_option("--reduction", d.reduction, "1 uniform spheres, 2 spheres, 3 implicit objects, 4 triangles")
      ->check(CLI::Range(1, 4));
  cmd->add_option("--mode", d.mode, "narrow phase for reduction 3: paper | exact")
      ->check(CLI::IsMember({"paper", "exact"}));
  cmd->add_flag("--refit,!--rebuild", d.refit, "BVH update between frames (reduction 4)");
  cmd->add_option("--adjacency", d.adjacency, "none | shared-vertex (default: shared-vertex for meshes, none for soups)")
      ->check(CLI::IsMember({"none", "shared-vertex"}));
  cmd->add_option("--epsilon", d.epsilon, "auxiliary triangle half-width (default 1e-4 x mean edge)");
  cmd->add_option("--threads", d.threads, "worker threads, 0 = hardware concurrency");
  cmd->add_flag("--no-aux", d.no_aux, "diagnostic: skip auxiliary triangles");
  cmd->add_flag("--no-vertex-probes", d.no_vertex_probes, "diagnostic: skip vertex probe rays");
}

// ---------------------------------------------------------------------------
// Inputs

struct MeshInput {
  FrameSequence sequence;
  bool soup = false;  // no two faces share a vertex
};

using Input = std::variant<Scene, MeshInput>;

bool is_soup(const TriangleFrame& frame) {
  std::vector<std::uint8_t> used(frame.vertices.size(), 0);
  for (const Face& f : frame.faces)
    for (std::uint32_t v : f)
      if (used[v]++) return false;
  return true;
}

MeshInput mesh_input(FrameSequence seq) {
  MeshInput m;
  m.soup = !seq.frames.empty() && is_soup(seq.frames.front());
  m.sequence = std::move(seq);
  return m;
}

Input load_input(const std::string& path) {
  if (fs::is_directory(path)) return mesh_input(load_sequence(path));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic.rfind("mochi-scene", 0) == 0) return load_scene(path);
  if (magic.rfind("ply", 0) == 0) return mesh_input(make_sequence({frame_from_ply(load_ply(path))}));
  return mesh_input(load_sequence(path));  // manifest
}

Scene generate_scene(const GenParams& g, std::uint64_t seed) {
  Scene scene;
  scene.meta["kind"] = g.kind;
  scene.meta["seed"] = std::to_string(seed);
  scene.meta["n"] = std::to_string(g.n);
  if (g.kind == "uniform") {
    scene.spheres = uniform_spheres(g.n, g.radius, seed, g.speed);
    scene.meta["radius"] = std::to_string(g.radius);
  } else if (g.kind == "gaussian") {
    scene.spheres = gaussian_spheres(g.n, g.mean, g.sd, g.r_min, seed, g.speed);
    scene.meta["mean"] = std::to_string(g.mean);
    scene.meta["sd"] = std::to_string(g.sd);
    scene.meta["r_min"] = std::to_string(g.r_min);
  } else if (g.kind == "ellipsoid") {
    scene.shape = SceneShape::Ellipsoid;
    scene.ellipsoids = random_ellipsoids(g.n, g.axis, seed);
    scene.meta["axis"] = std::to_string(g.axis);
  } else {
    throw InvalidParams("kind '" + g.kind + "' is not a particle scene");
  }
  return scene;
}

MeshInput generate_mesh(const GenParams& g, std::uint64_t seed) {
  if (g.kind == "soup") return mesh_input(make_sequence({make_soup_frame(random_triangle_soup(g.n, g.size, seed))}));
  DeformingMeshParams p;
  p.frames = g.frames;
  return mesh_input(deforming_mesh_sequence(p));
}

Input generate_input(const GenParams& g, std::uint64_t seed) {
  if (g.kind == "soup" || g.kind == "deforming-mesh") return generate_mesh(g, seed);
  return generate_scene(g, seed);
}

// ---------------------------------------------------------------------------
// Detection

/// Bit array when it fits the budget, sorted pair list otherwise.
class PairStore {
 public:
  explicit PairStore(std::uint32_t n) {
    if (CollisionSet::byte_size_for(n) <= memory_budget()) dense_.emplace(n);
    else sparse_ = std::make_unique<SparsePairSet>(n);
  }
  void mark(std::uint32_t i, std::uint32_t j) { dense_ ? dense_->mark(i, j) : sparse_->mark(i, j); }
  std::uint64_t count() { return dense_ ? dense_->count() : sparse_->count(); }
  std::vector<ObjectPair> pairs() { return dense_ ? dense_->pairs() : sparse_->pairs(); }
  const char* kind() const { return dense_ ? "bits" : "sparse"; }

 private:
  std::optional<CollisionSet> dense_;
  std::unique_ptr<SparsePairSet> sparse_;
};

struct FrameReport {
  std::size_t frame = 0;
  double aux_ms = 0, build_ms = 0, update_ms = 0, cd_ms = 0;
  std::uint64_t broad_phase_hits = 0, collisions = 0;
  std::vector<ObjectPair> pairs;
  std::uint64_t self_collisions = 0, inter_object_collisions = 0;
};

std::vector<ImplicitObject> implicit_objects(const Scene& scene) {
  std::vector<ImplicitObject> objects;
  if (scene.shape == SceneShape::Sphere)
    for (std::uint32_t k = 0; k < scene.spheres.size(); ++k) objects.push_back(make_sphere_object(k, scene.spheres[k]));
  else
    for (std::uint32_t k = 0; k < scene.ellipsoids.size(); ++k)
      objects.push_back(make_ellipsoid_object(k, scene.ellipsoids[k]));
  return objects;
}

FrameReport detect_scene(const Scene& scene, const DetectParams& d) {
  FrameReport r;
  const LaunchOptions launch{d.threads};
  if (d.reduction == 4) throw IncompatibleReduction("reduction 4 needs a triangle mesh, got a particle scene");
  if (d.reduction != 3 && scene.shape != SceneShape::Sphere)
    throw IncompatibleReduction("reductions 1 and 2 need spheres; use reduction 3 for ellipsoids");
  const auto n = static_cast<std::uint32_t>(scene.size());
  PairStore store(n);
  if (n > 0) {
    const std::span<const Sphere> spheres(scene.spheres);
    auto t0 = Clock::now();
    if (d.reduction == 1) {
      uniform_radius(spheres);
      const Bvh bvh = Bvh::build(representative_sphere_soup(spheres));
      r.build_ms = ms_since(t0);
      t0 = Clock::now();
      r.broad_phase_hits = launch_uniform_sphere_rays(bvh, spheres, store, launch).broad_phase_hits;
    } else if (d.reduction == 2) {
      for (const Sphere& s : spheres) validate(s);
      const Bvh bvh = Bvh::build(sphere_soup(spheres));
      r.build_ms = ms_since(t0);
      t0 = Clock::now();
      r.broad_phase_hits = launch_sphere_edge_rays(bvh, spheres, store, launch).broad_phase_hits;
    } else {
      const auto objects = implicit_objects(scene);
      const Bvh bvh = Bvh::build(object_soup(objects));
      r.build_ms = ms_since(t0);
      t0 = Clock::now();
      const auto mode = d.mode == "paper" ? NarrowPhaseMode::PaperPointTest : NarrowPhaseMode::ExactPairTest;
      r.broad_phase_hits = launch_object_edge_rays(bvh, std::span<const ImplicitObject>(objects), mode, store, launch)
                               .broad_phase_hits;
    }
    r.cd_ms = ms_since(t0);
  }
  r.collisions = store.count();
  r.pairs = store.pairs();
  return r;
}

TriangleDetectOptions triangle_options(const DetectParams& d, bool soup) {
  TriangleDetectOptions opt;
  if (d.adjacency.empty()) opt.adjacency = soup ? AdjacencyFilter::None : AdjacencyFilter::SharedVertex;
  else opt.adjacency = d.adjacency == "none" ? AdjacencyFilter::None : AdjacencyFilter::SharedVertex;
  opt.use_auxiliaries = !d.no_aux;
  opt.use_vertex_probes = !d.no_vertex_probes;
  opt.threads = d.threads;
  return opt;
}

std::vector<FrameReport> detect_mesh(MeshInput& mesh, const DetectParams& d) {
  if (d.reduction != 4) throw IncompatibleReduction("triangle meshes need reduction 4");
  TriangleSequenceDetector detector(d.refit ? BvhUpdate::Refit : BvhUpdate::Rebuild, triangle_options(d, mesh.soup),
                                    d.epsilon);
  std::vector<FrameReport> out;
  auto& frames = mesh.sequence.frames;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    FrameTimings t;
    const CollisionSet set = detector.detect(frames[f], &t);
    FrameReport r;
    r.frame = f;
    r.aux_ms = t.aux_ms;
    r.build_ms = t.build_ms;
    r.update_ms = t.update_ms;
    r.cd_ms = t.cd_ms;
    r.broad_phase_hits = t.stats.broad_phase_hits;
    r.collisions = set.count();
    r.pairs = set.pairs();
    const auto classes = classify_collisions(set, mesh.sequence.object_labels);
    r.self_collisions = classes.self_collisions.size();
    r.inter_object_collisions = classes.inter_object_collisions.size();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<FrameReport> detect_input(Input& input, const DetectParams& d) {
  if (auto* scene = std::get_if<Scene>(&input)) return {detect_scene(*scene, d)};
  return detect_mesh(std::get<MeshInput>(input), d);
}

// ---------------------------------------------------------------------------
// Oracle comparison

CollisionSet oracle_set(Input& input, std::size_t frame, const DetectParams& d) {
  if (auto* scene = std::get_if<Scene>(&input)) {
    if (scene->size() > kOracleMaxObjects)
      throw TooLargeForOracle(std::to_string(scene->size()) + " objects exceeds the oracle limit of " +
                              std::to_string(kOracleMaxObjects));
    return scene->shape == SceneShape::Sphere ? oracle::sphere_pairs_oracle(scene->spheres)
                                              : oracle::ellipsoid_pairs_oracle(scene->ellipsoids);
  }
  auto& mesh = std::get<MeshInput>(input);
  const auto& f = mesh.sequence.frames[frame];
  if (f.originals.size() > kOracleMaxTriangles)
    throw TooLargeForOracle(std::to_string(f.originals.size()) + " triangles exceeds the oracle limit of " +
                            std::to_string(kOracleMaxTriangles));
  return oracle::triangle_pairs_oracle(f, triangle_options(d, mesh.soup).adjacency);
}

void check_oracle_size(const Input& input) {
  if (const auto* scene = std::get_if<Scene>(&input)) {
    if (scene->size() > kOracleMaxObjects)
      throw TooLargeForOracle(std::to_string(scene->size()) + " objects exceeds the oracle limit of " +
                              std::to_string(kOracleMaxObjects));
    return;
  }
  for (const auto& f : std::get<MeshInput>(input).sequence.frames)
    if (f.originals.size() > kOracleMaxTriangles)
      throw TooLargeForOracle(std::to_string(f.originals.size()) + " triangles exceeds the oracle limit of " +
                              std::to_string(kOracleMaxTriangles));
}

struct VerifyTally {
  std::uint64_t missing = 0, extra = 0, instances = 0;
};

void verify_instance(Input& input, const DetectParams& d, const std::string& label, VerifyTally& tally,
                     std::ostream& log) {
  check_oracle_size(input);
  const auto reports = detect_input(input, d);
  for (const FrameReport& r : reports) {
    const CollisionSet want = oracle_set(input, r.frame, d);
    std::vector<ObjectPair> missing, extra;
    CollisionSet got(want.n_objects());
    for (const auto& [i, j] : r.pairs) got.mark(i, j);
    for (const auto& [i, j] : want.pairs())
      if (!got.contains(i, j)) missing.emplace_back(i, j);
    for (const auto& [i, j] : r.pairs)
      if (!want.contains(i, j)) extra.emplace_back(i, j);
    log << label;
    if (reports.size() > 1) log << " frame " << r.frame;
    log << ": engine " << r.collisions << " oracle " << want.count() << " missing " << missing.size() << " extra "
        << extra.size() << "\n";
    const auto show = [&](const char* what, const std::vector<ObjectPair>& list) {
      for (std::size_t k = 0; k < list.size() && k < 20; ++k)
        log << "  " << what << " (" << list[k].first << "," << list[k].second << ")\n";
      if (list.size() > 20) log << "  ... " << list.size() - 20 << " more " << what << "\n";
    };
    show("missing", missing);
    show("extra", extra);
    tally.missing += missing.size();
    tally.extra += extra.size();
    ++tally.instances;
  }
}

// ---------------------------------------------------------------------------
// CSV helpers

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw InvalidParams("cannot write " + path);
  return file;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_pairs(const std::string& path, const std::vector<FrameReport>& reports) {
  std::ofstream out(path);
  if (!out) throw InvalidParams("cannot write " + path);
  out << "frame,i,j\n";
  for (const auto& r : reports)
    for (const auto& [i, j] : r.pairs) out << r.frame << ',' << i << ',' << j << '\n';
}

// ---------------------------------------------------------------------------
// Benchmarks

struct BenchParams {
  std::string sweep = "n";
  std::vector<double> values;
  std::size_t n = 160000;
  double radius = 0.001;
  double mean = 0.004;
  double r_min = 1e-5;
  int reduction = 0;  // 0 = 1 for n/r sweeps, 2 for the sd sweep
  int runs = 5;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct BenchPoint {
  double build_ms = 0, cd_ms = 0;
  std::uint64_t broad_phase_hits = 0, collisions = 0;
  std::string store;
};

BenchPoint bench_once(const std::vector<Sphere>& spheres, int reduction, unsigned threads) {
  BenchPoint p;
  PairStore store(static_cast<std::uint32_t>(spheres.size()));
  p.store = store.kind();
  const std::span<const Sphere> s(spheres);
  auto t0 = Clock::now();
  const Bvh bvh = Bvh::build(reduction == 1 ? representative_sphere_soup(s) : sphere_soup(s));
  p.build_ms = ms_since(t0);
  t0 = Clock::now();
  const auto stats = reduction == 1 ? launch_uniform_sphere_rays(bvh, s, store, {threads})
                                    : launch_sphere_edge_rays(bvh, s, store, {threads});
  p.cd_ms = ms_since(t0);
  p.broad_phase_hits = stats.broad_phase_hits;
  p.collisions = store.count();
  return p;
}

int run_bench(BenchParams b, const std::string& out_path) {
  if (b.values.empty()) {
    if (b.sweep == "n") b.values = {10e3, 20e3, 40e3, 80e3, 160e3, 320e3, 640e3, 1280e3};
    else if (b.sweep == "r") b.values = {0.001, 0.002, 0.004, 0.008, 0.016, 0.032, 0.064};
    else b.values = {0.001, 0.005, 0.01};
  }
  const int reduction = b.reduction != 0 ? b.reduction : (b.sweep == "sd" ? 2 : 1);
  if (b.sweep == "sd" && reduction == 1) throw IncompatibleReduction("the sd sweep has mixed radii; use reduction 2");
  if (b.runs < 1) throw InvalidParams("--runs must be at least 1");
  std::ofstream file;
  std::ostream& out = open_out(out_path, file);
  out << "sweep,value,n,radius,reduction,runs,build_ms,cd_ms,total_ms,broad_phase_hits,collisions,store\n";
  for (double value : b.values) {
    if (!(value > 0)) throw InvalidParams("sweep values must be positive");
    std::size_t n = b.n;
    double radius = b.radius;
    std::vector<Sphere> spheres;
    try {
      if (b.sweep == "n") {
        n = static_cast<std::size_t>(value);
        spheres = uniform_spheres(n, radius, b.seed);
      } else if (b.sweep == "r") {
        radius = value;
        spheres = uniform_spheres(n, radius, b.seed);
      } else {
        radius = b.mean;
        spheres = gaussian_spheres(n, b.mean, value, b.r_min, b.seed);
      }
      bench_once(spheres, reduction, b.threads);  // warm-up, discarded
      BenchPoint mean;
      for (int k = 0; k < b.runs; ++k) {
        const BenchPoint p = bench_once(spheres, reduction, b.threads);
        mean.build_ms += p.build_ms / b.runs;
        mean.cd_ms += p.cd_ms / b.runs;
        mean.broad_phase_hits = p.broad_phase_hits;
        mean.collisions = p.collisions;
        mean.store = p.store;
      }
      out << b.sweep << ',' << value << ',' << n << ',' << radius << ',' << reduction << ',' << b.runs << ','
          << fmt(mean.build_ms) << ',' << fmt(mean.cd_ms) << ',' << fmt(mean.build_ms + mean.cd_ms) << ','
          << mean.broad_phase_hits << ',' << mean.collisions << ',' << mean.store << '\n'
          << std::flush;
    } catch (const std::bad_alloc&) {
      std::cerr << "OutOfMemory: sweep=" << b.sweep << " value=" << value << " n=" << n << " radius=" << radius
                << " reduction=" << reduction << "\n";
      return 3;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Simulation

struct SimParams {
  std::size_t steps = 100;
  double dt = 1e-3;
  bool walls = true;
  double gravity = 0.0;
  unsigned threads = 0;
  std::string final_scene;
};

int run_simulate(Scene scene, const SimParams& p, const std::string& out_path) {
  if (scene.shape != SceneShape::Sphere) throw IncompatibleReduction("simulation needs a sphere scene");
  ParticleSystem sys;
  sys.spheres = std::move(scene.spheres);
  sys.dt = p.dt;
  if (!(p.dt > 0)) throw InvalidParams("--dt must be positive");
  if (p.walls) sys.bounds = Aabb{{0, 0, 0}, {1, 1, 1}};
  sys.gravity = {0, 0, -p.gravity};
  std::ofstream file;
  std::ostream& out = open_out(out_path, file);
  out << "step,collisions,impulses_applied,broad_phase_hits,cd_ms,step_ms,kinetic_energy,momentum_x,momentum_y,"
         "momentum_z,wall_impulse_x,wall_impulse_y,wall_impulse_z\n";
  for (std::size_t k = 0; k < p.steps; ++k) {
    StepMetrics m;
    sys = step(std::move(sys), &m, {p.threads});
    const Vec3 mom = total_momentum(sys.spheres);
    char buf[512];
    std::snprintf(buf, sizeof buf, "%llu,%llu,%llu,%llu,%.6g,%.6g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<unsigned long long>(m.step), static_cast<unsigned long long>(m.collisions),
                  static_cast<unsigned long long>(m.impulses_applied),
                  static_cast<unsigned long long>(m.broad_phase_hits), m.cd_ms, m.step_ms, kinetic_energy(sys.spheres),
                  mom.x, mom.y, mom.z, m.wall_impulse.x, m.wall_impulse.y, m.wall_impulse.z);
    out << buf;
  }
  if (!p.final_scene.empty()) {
    Scene final_scene;
    final_scene.spheres = sys.spheres;
    final_scene.meta["step"] = std::to_string(sys.step_index);
    save_scene(p.final_scene, final_scene);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collision detection by ray casting against a BVH"};
  app.require_subcommand(1);

  // gen
  GenParams gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "write a seeded scene file, or PLY frames for meshes");
  add_gen_options(gen_cmd, gen);
  gen_cmd->add_option("--out", gen_out, "scene file; a directory for deforming-mesh; a .ply for soup")->required();

  // detect
  DetectParams det;
  std::string det_input, det_out, det_pairs;
  auto* det_cmd = app.add_subcommand("detect", "run a reduction and report per-frame CSV rows");
  det_cmd->add_option("input", det_input, "scene file, PLY file, frame directory or manifest")->required();
  add_detect_options(det_cmd, det);
  det_cmd->add_option("--out", det_out, "CSV path (default stdout)");
  det_cmd->add_option("--pairs", det_pairs, "also write colliding pairs as frame,i,j CSV");

  // verify
  DetectParams ver;
  GenParams ver_gen;
  std::string ver_input;
  std::size_t ver_seeds = 0;
  auto* ver_cmd = app.add_subcommand("verify", "compare a reduction with the brute-force oracle");
  ver_cmd->add_option("input", ver_input, "instance to verify; omit to generate --seeds scenes");
  ver_cmd->add_option("--seeds", ver_seeds, "number of generated instances, seeds seed..seed+N-1");
  add_detect_options(ver_cmd, ver);
  add_gen_options(ver_cmd, ver_gen);

  // bench
  BenchParams bench;
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "timing sweeps over n, radius, or radius spread");
  bench_cmd->add_option("--sweep", bench.sweep, "n | r | sd")->check(CLI::IsMember({"n", "r", "sd"}));
  bench_cmd->add_option("--values", bench.values, "sweep points (defaults cover the standard grids)")->delimiter(',');
  bench_cmd->add_option("--n", bench.n, "object count for r and sd sweeps");
  bench_cmd->add_option("--radius", bench.radius, "radius for the n sweep");
  bench_cmd->add_option("--mean", bench.mean, "mean radius for the sd sweep");
  bench_cmd->add_option("--reduction", bench.reduction, "1 or 2")->check(CLI::Range(1, 2));
  bench_cmd->add_option("--runs", bench.runs, "measured runs per point after one warm-up");
  bench_cmd->add_option("--seed", bench.seed, "PRNG seed");
  bench_cmd->add_option("--threads", bench.threads, "worker threads, 0 = hardware concurrency");
  bench_cmd->add_option("--out", bench_out, "CSV path (default stdout)");

  // simulate
  SimParams sim;
  GenParams sim_gen;
  sim_gen.n = 1000;
  sim_gen.radius = 0.01;
  sim_gen.speed = 0.5;
  std::string sim_input, sim_out;
  auto* sim_cmd = app.add_subcommand("simulate", "elastic particle simulation with per-step CSV");
  sim_cmd->add_option("input", sim_input, "sphere scene; omit to generate one");
  add_gen_options(sim_cmd, sim_gen);
  sim_cmd->add_option("--steps", sim.steps, "number of timesteps");
  sim_cmd->add_option("--dt", sim.dt, "timestep");
  sim_cmd->add_flag("!--no-walls", sim.walls, "disable the reflecting unit box");
  sim_cmd->add_option("--gravity", sim.gravity, "constant downward acceleration along -z");
  sim_cmd->add_option("--threads", sim.threads, "worker threads, 0 = hardware concurrency");
  sim_cmd->add_option("--final", sim.final_scene, "write the final state as a scene file");
  sim_cmd->add_option("--out", sim_out, "CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed()) {
      if (gen.kind == "deforming-mesh") {
        const auto mesh = generate_mesh(gen, gen.seed);
        fs::create_directories(gen_out);
        for (std::size_t f = 0; f < mesh.sequence.frames.size(); ++f) {
          const auto& frame = mesh.sequence.frames[f];
          char name[32];
          std::snprintf(name, sizeof name, "frame_%04zu.ply", f);
          write_ply_ascii(fs::path(gen_out) / name, PlyMesh{frame.vertices, frame.faces});
        }
      } else if (gen.kind == "soup") {
        const auto mesh = generate_mesh(gen, gen.seed);
        const auto& frame = mesh.sequence.frames.front();
        write_ply_ascii(fs::path(gen_out), PlyMesh{frame.vertices, frame.faces});
      } else {
        save_scene(gen_out, generate_scene(gen, gen.seed));
      }
      return 0;
    }

    if (det_cmd->parsed()) {
      Input input = load_input(det_input);
      const auto reports = detect_input(input, det);
      std::ofstream file;
      std::ostream& out = open_out(det_out, file);
      out << "frame,aux_ms,build_ms,refit_or_rebuild_ms,cd_ms,broad_phase_hits,narrow_phase_collisions\n";
      double total = 0.0;
      std::uint64_t self = 0, inter = 0;
      for (const auto& r : reports) {
        out << r.frame << ',' << fmt(r.aux_ms) << ',' << fmt(r.build_ms) << ',' << fmt(r.update_ms) << ','
            << fmt(r.cd_ms) << ',' << r.broad_phase_hits << ',' << r.collisions << '\n';
        total += static_cast<double>(r.collisions);
        self += r.self_collisions;
        inter += r.inter_object_collisions;
      }
      std::cerr << "frames " << reports.size() << ", mean collisions per frame "
                << fmt(total / static_cast<double>(std::max<std::size_t>(reports.size(), 1)));
      if (std::holds_alternative<MeshInput>(input))
        std::cerr << " (self " << self << ", inter-object " << inter << " over all frames)";
      std::cerr << "\n";
      if (!det_pairs.empty()) write_pairs(det_pairs, reports);
      return 0;
    }

    if (ver_cmd->parsed()) {
      VerifyTally tally;
      if (!ver_input.empty()) {
        Input input = load_input(ver_input);
        verify_instance(input, ver, ver_input, tally, std::cout);
      } else {
        const std::size_t count = ver_seeds == 0 ? 1 : ver_seeds;
        for (std::size_t k = 0; k < count; ++k) {
          Input input = generate_input(ver_gen, ver_gen.seed + k);
          verify_instance(input, ver, "seed " + std::to_string(ver_gen.seed + k), tally, std::cout);
        }
      }
      const bool paper = ver.reduction == 3 && ver.mode == "paper";
      if (paper) {
        std::cout << "paper point test: " << tally.missing << " false negatives, " << tally.extra
                  << " false positives over " << tally.instances << " instances\n";
        std::cout << (tally.extra == 0 ? "PASS" : "FAIL") << "\n";
        return tally.extra == 0 ? 0 : 1;
      }
      const bool ok = tally.missing == 0 && tally.extra == 0;
      std::cout << (ok ? "PASS" : "FAIL") << ": " << tally.instances << " instances, " << tally.missing
                << " missing, " << tally.extra << " extra\n";
      return ok ? 0 : 1;
    }

    if (bench_cmd->parsed()) return run_bench(bench, bench_out);

    if (sim_cmd->parsed()) {
      Scene scene;
      if (!sim_input.empty()) {
        Input input = load_input(sim_input);
        if (!std::holds_alternative<Scene>(input)) throw IncompatibleReduction("simulation needs a sphere scene");
        scene = std::get<Scene>(std::move(input));
      } else {
        scene = generate_scene(sim_gen, sim_gen.seed);
        if (sim.walls)
          for (Sphere& s : scene.spheres)
            for (int k = 0; k < 3; ++k) s.center[k] = std::clamp(s.center[k], s.radius, 1.0 - s.radius);
      }
      return run_simulate(std::move(scene), sim, sim_out);
    }
  } catch (const TooLargeForOracle& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: OutOfMemory\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
