// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/session.hpp"

#include <utility>

#include "core/checkpoint.hpp"
#include "core/error.hpp"
#include "core/fixtures.hpp"
#include "core/mesh_io.hpp"

namespace meshprior {

namespace {

constexpr const char kFixturePrefix[] = "fixture:";

// Mask sets are regenerated from the seed on resume, so the seed is all the
// augmentation state a checkpoint needs.
std::string augmentation_state(const RunConfig& c) {
  return "augment-seed=" + std::to_string(augmentation_config(c).seed);
}

bool same_architecture(const ModelConfig& a, const ModelConfig& b) {
  return a.arch == b.arch && a.in_channels == b.in_channels && a.width == b.width && a.cheb_order == b.cheb_order &&
         a.sgcn_blocks == b.sgcn_blocks && a.mgcn_blocks_per_stage == b.mgcn_blocks_per_stage &&
         a.mgcn_levels == b.mgcn_levels && a.leaky_slope == b.leaky_slope && a.bn_eps == b.bn_eps &&
         a.bn_momentum == b.bn_momentum && a.seed == b.seed && a.zero_head == b.zero_head;
}

}  // namespace

Mesh resolve_mesh(const std::string& source, bool ground_truth) {
  const std::string prefix = kFixturePrefix;
  if (source.rfind(prefix, 0) == 0) {
    Fixture fx = make_fixture(source.substr(prefix.size()));
    return ground_truth ? fx.ground_truth : fx.damaged;
  }
  return load_mesh(source);
}

Session::Session(RunConfig config) : config_(std::move(config)) { validate_config(config_); }

void Session::require(bool ok, const char* what) const {
  if (!ok) throw Error(ErrorCode::State, what);
}

void Session::load_inputs() {
  if (config_.input.empty()) throw Error(ErrorCode::Config, "run.input is not set");
  set_input(resolve_mesh(config_.input, false));
  if (!config_.ground_truth.empty()) set_ground_truth(resolve_mesh(config_.ground_truth, true));
}

void Session::set_input(Mesh mesh) {
  input_ = std::move(mesh);
  pre_.reset();
  hierarchy_.reset();
  problem_.reset();
  masks_.clear();
  trace_.clear();
  steps_done_ = 0;
  cmp_.reset();
  out_.reset();
}

void Session::set_ground_truth(Mesh mesh) { ground_truth_ = std::move(mesh); }

const Mesh& Session::input() const {
  require(input_.has_value(), "no input mesh loaded");
  return *input_;
}

const Mesh& Session::ground_truth() const {
  require(ground_truth_.has_value(), "no ground-truth mesh loaded");
  return *ground_truth_;
}

void Session::preprocess() {
  pre_ = meshprior::preprocess(input(), config_.preprocess);
}

const PreprocessResult& Session::preprocess_result() const {
  require(pre_.has_value(), "preprocess has not run");
  return *pre_;
}

void Session::prepare_training() {
  const PreprocessResult& pre = preprocess_result();
  hierarchy_ = build_hierarchy(pre.smooth_mesh, hierarchy_levels(config_));
  problem_ = make_training_problem(pre, *hierarchy_);
  masks_ = gen_fake_holes(pre.init_mesh, pre.real_mask, augmentation_config(config_));
  model_ = GcnModel(model_config(config_));
  trace_.clear();
  steps_done_ = 0;
  cmp_.reset();
  out_.reset();
}

const Hierarchy& Session::hierarchy() const {
  require(hierarchy_.has_value(), "training has not been prepared");
  return *hierarchy_;
}

const std::vector<HoleMask>& Session::mask_sets() const {
  require(problem_.has_value(), "training has not been prepared");
  return masks_;
}

void Session::train(const StepCallback& callback) {
  require(problem_.has_value(), "training has not been prepared");
  cmp_.reset();
  out_.reset();
  if (steps_done_ >= config_.steps) return;
  const TrainConfig tc = train_config(config_);
  std::vector<LossRecord> trace;
  try {
    meshprior::train(model_, *problem_, masks_, tc, trace, steps_done_ + 1, callback);
  } catch (...) {
    trace_.insert(trace_.end(), trace.begin(), trace.end());
    steps_done_ += static_cast<int>(trace.size());
    throw;
  }
  trace_.insert(trace_.end(), trace.begin(), trace.end());
  steps_done_ = config_.steps;
}

void Session::write_loss_trace(std::ostream& out) const { meshprior::write_loss_trace(out, trace_); }

void Session::evaluate() {
  require(problem_.has_value(), "training has not been prepared");
  cmp_ = meshprior::evaluate(model_, *problem_);
  out_.reset();
}

void Session::refine() {
  require(cmp_.has_value(), "evaluate has not run");
  const PreprocessResult& pre = *pre_;
  out_ = meshprior::refine(pre.init_mesh, pre.init_mesh.vertices(), *cmp_, pre.real_mask.vertex_mask(),
                           refine_options(config_), &refine_report_);
}

const RefineReport& Session::refine_report() const {
  require(out_.has_value(), "refine has not run");
  return refine_report_;
}

Mesh Session::init_mesh() const { return preprocess_result().init_mesh; }

Mesh Session::smooth_mesh() const { return preprocess_result().smooth_mesh; }

Mesh Session::completed_mesh() const {
  require(cmp_.has_value(), "evaluate has not run");
  return pre_->init_mesh.with_vertices(*cmp_);
}

Mesh Session::output_mesh() const {
  require(out_.has_value(), "refine has not run");
  return pre_->init_mesh.with_vertices(*out_);
}

Flags Session::real_mask() const { return preprocess_result().real_mask.vertex_mask(); }

MetricsReport Session::metrics(const Mesh& mesh) const {
  const Flags mask = real_mask();
  if (mesh.num_vertices() != static_cast<int>(mask.size())) {
    throw Error(ErrorCode::Argument, "metrics: mesh does not match the preprocessed vertex count");
  }
  return compute_metrics(mesh, ground_truth(), mask, config_.nearest_vertex);
}

void Session::save_checkpoint(const std::string& path) const {
  require(problem_.has_value(), "training has not been prepared");
  meshprior::save_checkpoint(path, model_, steps_done_, problem_->scale, augmentation_state(config_));
}

void Session::load_checkpoint(const std::string& path) {
  require(problem_.has_value(), "training has not been prepared");
  Checkpoint ck = meshprior::load_checkpoint(path);
  if (!same_architecture(ck.model.config(), model_config(config_))) {
    throw Error(ErrorCode::Config, "checkpoint '" + path + "' was written for a different model configuration");
  }
  if (ck.rng_state != augmentation_state(config_)) {
    throw Error(ErrorCode::Config, "checkpoint '" + path + "' was written with a different seed");
  }
  if (ck.step > config_.steps) {
    throw Error(ErrorCode::Config, "checkpoint '" + path + "' is past train.steps (" + std::to_string(ck.step) + ")");
  }
  model_ = std::move(ck.model);
  steps_done_ = ck.step;
  trace_.clear();
  cmp_.reset();
  out_.reset();
}

}  // namespace meshprior
