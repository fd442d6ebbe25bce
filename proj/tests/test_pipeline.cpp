// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "core/fixtures.hpp"
#include "core/hierarchy.hpp"
#include "core/pipeline.hpp"
#include "support/generators.hpp"

using namespace meshprior;
using namespace meshprior::testing;

namespace {

ModelConfig tiny_model() {
  ModelConfig c;
  c.width = 8;
  c.sgcn_blocks = 3;
  c.seed = 9;
  return c;
}

// Sphere-cap training problem shared by the training tests.
const TrainingProblem& cap_problem() {
  static const TrainingProblem problem = [] {
    const PreprocessResult pre = preprocess(make_fixture("sphere-cap").damaged);
    return make_training_problem(pre, build_hierarchy(pre.smooth_mesh, 0));
  }();
  return problem;
}

}  // namespace

TEST_CASE("property: fake holes are deterministic and contain the real holes") {
  Rng rng(71);
  for (int c = 0; c < 10; ++c) {
    const Mesh m = random_sphere(rng, 3, 6);
    const HoleMask real = HoleMask::from_real(m, random_mask(rng, m.num_vertices(), 0.05));
    AugmentationConfig cfg;
    cfg.p = uniform(rng, 0.0, 0.1);
    cfg.k = uniform_int(rng, 0, 3);
    cfg.sets = uniform_int(rng, 1, 6);
    cfg.seed = rng();
    const auto a = gen_fake_holes(m, real, cfg);
    const auto b = gen_fake_holes(m, real, cfg);
    REQUIRE(static_cast<int>(a.size()) == cfg.sets);
    for (size_t s = 0; s < a.size(); ++s) {
      CHECK(a[s].fake_vertex == b[s].fake_vertex);
      CHECK(a[s].real_vertex == real.real_vertex);
      const Flags combined = a[s].vertex_mask();
      for (int v = 0; v < m.num_vertices(); ++v)
        if (!real.real_vertex[v]) CHECK(combined[v] == 0);
      // No seeds, no fake holes.
      if (cfg.p == 0.0) CHECK(std::count(a[s].fake_vertex.begin(), a[s].fake_vertex.end(), 0) == 0);
    }
  }
}

TEST_CASE("fake holes are k-rings of seeds") {
  // With k = 0 every hidden vertex is a seed; with k = 1 the hidden set is
  // the one-ring closure of the k = 0 set for the same seed.
  const Mesh m = geodesic_sphere(5);
  const HoleMask real = HoleMask::from_real(m, Flags(m.num_vertices(), 1));
  AugmentationConfig cfg;
  cfg.p = 0.05;
  cfg.sets = 3;
  cfg.seed = 1234;
  cfg.k = 0;
  const auto seeds = gen_fake_holes(m, real, cfg);
  cfg.k = 1;
  const auto rings = gen_fake_holes(m, real, cfg);
  for (size_t s = 0; s < seeds.size(); ++s) {
    Flags expected(m.num_vertices(), 1);
    for (int v = 0; v < m.num_vertices(); ++v)
      if (!seeds[s].fake_vertex[v])
        for (int w : k_ring(m, v, 1)) expected[w] = 0;
    CHECK(rings[s].fake_vertex == expected);
  }
  cfg.p = 1.0;
  CHECK_THROWS_AS(gen_fake_holes(m, real, cfg), Error);
}

TEST_CASE("property: features carry displacement and indicator only where known") {
  Rng rng(72);
  for (int c = 0; c < kCases; ++c) {
    const int n = uniform_int(rng, 1, 40);
    const Positions d = random_matrix<Positions>(rng, n, 3);
    const Flags mask = random_mask(rng, n, 0.4);
    const Features f = build_features(d, mask);
    REQUIRE(f.cols() == 4);
    for (int i = 0; i < n; ++i) {
      if (mask[i]) {
        CHECK(f.row(i).head<3>() == d.row(i));
        CHECK(f(i, 3) == 1.0);
      } else {
        CHECK(f.row(i).isZero());
      }
    }
  }
}

TEST_CASE("displacement scale is the RMS of known displacements") {
  const Mesh m = geodesic_sphere(2);
  Positions d = Positions::Zero(m.num_vertices(), 3);
  d(0, 0) = 3.0;
  d(1, 1) = 4.0;
  d(2, 2) = 100.0;
  Flags known(m.num_vertices(), 1);
  known[2] = 0;
  const double expected = std::sqrt(25.0 / (m.num_vertices() - 1));
  CHECK(displacement_scale(m, d, known) == doctest::Approx(expected));
  CHECK(displacement_scale(m, Positions::Zero(m.num_vertices(), 3), known) > 0.0);
}

TEST_CASE("training problem on the sphere cap") {
  const TrainingProblem& p = cap_problem();
  CHECK(p.num_levels() == 1);
  CHECK(p.mesh.num_vertices() == p.real_mask.num_vertices());
  CHECK(p.scale > 0.0);
  const int holes = static_cast<int>(std::count(p.real_mask.real_vertex.begin(), p.real_mask.real_vertex.end(), 0));
  CHECK(holes > 0);
  // Masked features never see hole displacements.
  const Features f = p.features(p.real_mask.vertex_mask());
  for (int v = 0; v < p.mesh.num_vertices(); ++v)
    if (!p.real_mask.real_vertex[v]) CHECK(f.row(v).isZero());
  // A zero output reproduces the smoothed mesh.
  CHECK(p.completed(0, Features::Zero(p.mesh.num_vertices(), 3)) == p.smooth[0]);
}

TEST_CASE("short training lowers the positional loss and is deterministic") {
  const TrainingProblem& p = cap_problem();
  AugmentationConfig aug;
  aug.sets = 4;
  aug.seed = 3;
  const auto masks = gen_fake_holes(p.mesh, p.real_mask, aug);
  TrainConfig tc;
  tc.steps = 25;
  tc.weights = LossWeights::preset(Architecture::Sgcn, MeshType::NonCad);

  std::vector<LossRecord> trace_a, trace_b;
  GcnModel a(tiny_model()), b(tiny_model());
  train(a, p, masks, tc, trace_a);
  train(b, p, masks, tc, trace_b);
  REQUIRE(trace_a.size() == 25u);
  for (size_t i = 0; i < trace_a.size(); ++i) {
    CHECK(trace_a[i].step == static_cast<int>(i) + 1);
    CHECK(trace_a[i].total == trace_b[i].total);
  }
  CHECK(trace_a.back().pos[0] < trace_a.front().pos[0]);
  const Positions xa = evaluate(a, p);
  const Positions xb = evaluate(b, p);
  CHECK(xa == xb);
  CHECK(xa.rows() == p.mesh.num_vertices());

  std::ostringstream csv;
  write_loss_trace(csv, trace_a);
  const std::string text = csv.str();
  CHECK(text.rfind("step,lr,e_pos_0,e_nrm,e_reg,total\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 26);
}

TEST_CASE("training reports a non-finite loss") {
  TrainingProblem p = cap_problem();
  p.init[0](0, 0) = std::nan("");
  const auto masks = gen_fake_holes(p.mesh, p.real_mask, AugmentationConfig{});
  TrainConfig tc;
  tc.steps = 2;
  tc.weights = LossWeights::preset(Architecture::Sgcn, MeshType::NonCad);
  std::vector<LossRecord> trace;
  GcnModel model(tiny_model());
  try {
    train(model, p, masks, tc, trace);
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Numeric);
  }
}

TEST_CASE("metrics vanish on the ground truth itself") {
  const Mesh gt = geodesic_sphere(4);
  const MetricsReport r = compute_metrics(gt, gt, {}, true);
  CHECK(r.eps_all < 1e-9);
  CHECK(r.eps_all_vertex == 0.0);
  CHECK_FALSE(r.eps_hole.has_value());
}

TEST_CASE("property: metrics match the plane distance oracle") {
  Rng rng(73);
  const Mesh gt = plane_grid(6, 6);
  const double diag = bbox_diagonal(gt);
  for (int c = 0; c < kCases; ++c) {
    Positions v = gt.vertices();
    Flags mask = random_mask(rng, gt.num_vertices(), 0.3);
    double sum = 0.0, sum_hole = 0.0;
    int holes = 0;
    for (int i = 0; i < gt.num_vertices(); ++i) {
      // Offsets straight up keep the closest point at the vertex itself.
      const double z = uniform(rng, -0.5, 0.5);
      v(i, 2) = z;
      sum += std::abs(z);
      if (!mask[i]) {
        sum_hole += std::abs(z);
        ++holes;
      }
    }
    const Mesh out(v, gt.faces());
    const MetricsReport r = compute_metrics(out, gt, mask, true);
    const int n = gt.num_vertices();
    CHECK(r.eps_all == doctest::Approx(sum / n * 1e3 / diag));
    CHECK(r.eps_all_vertex == doctest::Approx(r.eps_all));
    CHECK(r.hole_vertices == holes);
    if (holes > 0) CHECK(*r.eps_hole == doctest::Approx(sum_hole / holes * 1e3 / diag));
    for (int i = 0; i < n; ++i) CHECK(std::abs(r.signed_distance[i]) == doctest::Approx(std::abs(v(i, 2))));
  }
}

TEST_CASE("property: metrics are invariant under a common rigid motion") {
  Rng rng(74);
  for (int c = 0; c < 10; ++c) {
    const Mesh gt = random_sphere(rng, 2, 4, 0.0);
    const Mesh out = random_sphere(rng, 2, 4, 0.05);
    const Eigen::Matrix3d rot = random_rotation(rng);
    const Vec3 shift = random_point(rng, 5.0);
    auto move = [&](const Mesh& m) { return Mesh(rigid_motion(m.vertices(), rot, shift), m.faces()); };
    const MetricsReport a = compute_metrics(out, gt, {});
    const MetricsReport b = compute_metrics(move(out), move(gt), {});
    // The axis-aligned bbox diagonal is not rotation invariant, so compare
    // the unnormalized mean distance.
    const Mesh moved = move(gt);
    CHECK(b.eps_all * bbox_diagonal(moved) == doctest::Approx(a.eps_all * bbox_diagonal(gt)).epsilon(1e-9));
  }
}

TEST_CASE("metrics reject bad inputs") {
  const Mesh gt = geodesic_sphere(2);
  CHECK_THROWS_AS(compute_metrics(gt, gt, Flags{1, 0}), Error);
  CHECK(mean_normal_angle(gt, gt, {}) < 1e-6);
}
