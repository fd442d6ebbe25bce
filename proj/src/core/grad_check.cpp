// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/grad_check.hpp"

#include <chrono>
#include <cmath>

#include "core/error.hpp"
#include "core/fixtures.hpp"
#include "core/pipeline.hpp"

namespace meshprior {

namespace {

struct Fixture50 {
  Mesh mesh;
  TrainingProblem problem;
  HoleMask mask;
};

Fixture50 make_problem(Architecture arch, std::uint64_t seed) {
  Fixture50 fx;
  // Smooth base: the plain sphere. Target: the same sphere with low-frequency
  // radial bumps whose height is about a tenth of an edge, the ratio seen on
  // real inputs after oversmoothing. Heavy smoothing of so coarse a mesh would
  // shrink it by a sizeable fraction of its radius and the random initial
  // output would then fold faces, where finite differences of unit normals
  // are dominated by truncation error.
  const Mesh base = make_fixture("sphere-50").ground_truth;
  Positions bumpy = base.vertices();
  for (Eigen::Index i = 0; i < bumpy.rows(); ++i) {
    const Vec3 q = base.position(static_cast<int>(i));
    const double r = 1.0 + 0.05 * std::sin(3.0 * q.x()) * std::cos(2.0 * q.y()) + 0.03 * std::cos(4.0 * q.z());
    bumpy.row(i) *= r;
  }
  fx.mesh = base.with_vertices(bumpy);
  PreprocessResult pre;
  pre.init_mesh = fx.mesh;
  pre.smooth_mesh = base;
  pre.displacement = pre.init_mesh.vertices() - pre.smooth_mesh.vertices();
  // A small real hole around the north pole and one fake-hole set.
  Flags real(fx.mesh.num_vertices(), 1);
  for (int v : k_ring(fx.mesh, 0, 1)) real[v] = 0;
  pre.real_mask = HoleMask::from_real(fx.mesh, real);
  const Hierarchy h = build_hierarchy(pre.smooth_mesh, arch == Architecture::Mgcn ? 3 : 0);
  fx.problem = make_training_problem(pre, h);
  AugmentationConfig aug;
  aug.p = 0.05;
  aug.k = 1;
  aug.sets = 1;
  aug.seed = seed;
  fx.mask = gen_fake_holes(fx.mesh, pre.real_mask, aug)[0];
  return fx;
}

}  // namespace

GradCheckReport grad_check(const GradCheckOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const Fixture50 fx = make_problem(options.arch, options.seed);
  const TrainingProblem& p = fx.problem;

  ModelConfig mc;
  mc.arch = options.arch;
  mc.width = options.width;
  mc.seed = options.seed;
  GcnModel model(mc);
  const int outputs = model.num_outputs();
  const LossWeights weights = LossWeights::preset(options.arch, MeshType::Cad);
  const BnfParams bnf;

  LossInputs in;
  in.mesh = &p.mesh;
  in.init.assign(p.init.begin(), p.init.begin() + outputs);
  in.vertex_masks.assign(p.vertex_masks.begin(), p.vertex_masks.begin() + outputs);
  in.face_mask = p.real_mask.real_face;
  in.init_normals = p.init_normals;
  in.cmp.resize(outputs);
  if (options.warmup_steps > 0) {
    TrainConfig tc;
    tc.steps = options.warmup_steps;
    tc.weights = weights;
    tc.bnf = bnf;
    std::vector<LossRecord> trace;
    train(model, p, {fx.mask}, tc, trace);
  }
  const Features features = p.features(fx.mask.vertex_mask());
  const auto stats = model.running_stats();

  // Base pass: analytic gradients, activation pattern and regularizer target.
  auto out = model.forward(p.graphs, features, Mode::Train);
  for (int l = 0; l < outputs; ++l) in.cmp[l] = p.completed(l, out[l]);
  const LossResult base = total_loss(in, weights, bnf);
  FrozenLoss frozen;
  frozen.reg_target = base.reg_target;
  frozen.nrm_sign = base.nrm_sign;
  frozen.reg_sign = base.reg_sign;
  const ActivationPattern pattern = model.activation_pattern();
  model.zero_grad();
  std::vector<Features> grad_out;
  for (const auto& g : base.grad) grad_out.push_back(p.scale * g);
  model.backward(grad_out);
  model.set_running_stats(stats);

  auto loss_at = [&]() {
    auto o = model.forward(p.graphs, features, Mode::Train, options.freeze_activations ? &pattern : nullptr);
    for (int l = 0; l < outputs; ++l) in.cmp[l] = p.completed(l, o[l]);
    model.set_running_stats(stats);
    return total_loss(in, weights, bnf, &frozen.reg_target, options.freeze_activations ? &frozen : nullptr).total;
  };

  GradCheckReport rep;
  auto& params = model.parameters();
  rep.parameters = static_cast<int>(params.size());
  bool corrupted = options.corrupt_parameter.empty();
  for (auto& prm : params) {
    Eigen::MatrixXd analytic = prm.grad;
    if (!options.corrupt_parameter.empty() && prm.name == options.corrupt_parameter) {
      analytic(0) += 1e-2 * (1.0 + std::abs(analytic(0)));
      corrupted = true;
    }
    for (Eigen::Index i = 0; i < prm.value.size(); ++i) {
      const double orig = prm.value(i);
      prm.value(i) = orig + options.h;
      const double fp = loss_at();
      prm.value(i) = orig - options.h;
      const double fm = loss_at();
      prm.value(i) = orig;
      const double numeric = (fp - fm) / (2.0 * options.h);
      const double a = analytic(i);
      const double denom = std::max({std::abs(a), std::abs(numeric), options.abs_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++rep.checked;
      if (rel > rep.max_rel_error || rep.worst_entry < 0) {
        rep.max_rel_error = rel;
        rep.worst_parameter = prm.name;
        rep.worst_entry = static_cast<int>(i);
        rep.analytic = a;
        rep.numeric = numeric;
      }
    }
  }
  if (!corrupted) throw Error(ErrorCode::Argument, "no parameter named '" + options.corrupt_parameter + "'");
  rep.passed = rep.max_rel_error < options.tolerance;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace meshprior
