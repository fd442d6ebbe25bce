// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/gcn.hpp"
#include "core/hierarchy.hpp"
#include "core/pipeline.hpp"
#include "core/preprocess.hpp"
#include "core/refine.hpp"

namespace meshprior {

/// Reads a mesh path, or "fixture:NAME" for a built-in fixture (the damaged
/// mesh, or its ground truth when `ground_truth` is set).
Mesh resolve_mesh(const std::string& source, bool ground_truth);

/// One inpainting run: preprocess, hierarchy, training, evaluation and
/// refinement of a single input mesh. Stages must run in that order; calling
/// one early throws a State error.
class Session {
 public:
  explicit Session(RunConfig config);

  const RunConfig& config() const { return config_; }

  /// Loads the input (and ground truth, if configured) from the config.
  void load_inputs();
  void set_input(Mesh mesh);
  void set_ground_truth(Mesh mesh);
  bool has_input() const { return input_.has_value(); }
  bool has_ground_truth() const { return ground_truth_.has_value(); }
  const Mesh& input() const;
  const Mesh& ground_truth() const;

  /// Watertight fill, remeshing and oversmoothing.
  void preprocess();
  bool preprocessed() const { return pre_.has_value(); }
  const PreprocessResult& preprocess_result() const;

  /// Hierarchy, training problem, mask sets and a freshly initialized model.
  void prepare_training();
  bool prepared() const { return problem_.has_value(); }
  const Hierarchy& hierarchy() const;
  const std::vector<HoleMask>& mask_sets() const;

  /// Runs the remaining steps up to `config.steps`.
  void train(const StepCallback& callback = {});
  int steps_done() const { return steps_done_; }
  const std::vector<LossRecord>& loss_trace() const { return trace_; }
  void write_loss_trace(std::ostream& out) const;

  /// M_cmp = evaluation-mode network output on the real-hole mask.
  void evaluate();
  bool evaluated() const { return cmp_.has_value(); }
  /// M_out = refinement of M_cmp.
  void refine();
  bool refined() const { return out_.has_value(); }
  const RefineReport& refine_report() const;

  Mesh init_mesh() const;
  Mesh smooth_mesh() const;
  Mesh completed_mesh() const;
  Mesh output_mesh() const;
  /// Combined real-hole vertex mask on M_init (1 = known).
  Flags real_mask() const;

  /// Metrics of `mesh` (which must share M_init's vertex count) against the
  /// ground truth, with hole rows taken from the real mask.
  MetricsReport metrics(const Mesh& mesh) const;

  void save_checkpoint(const std::string& path) const;
  /// Restores the model and step count. The checkpoint must have been
  /// written for the same model configuration and seed.
  void load_checkpoint(const std::string& path);

 private:
  void require(bool ok, const char* what) const;

  RunConfig config_;
  std::optional<Mesh> input_;
  std::optional<Mesh> ground_truth_;
  std::optional<PreprocessResult> pre_;
  std::optional<Hierarchy> hierarchy_;
  std::optional<TrainingProblem> problem_;
  std::vector<HoleMask> masks_;
  GcnModel model_;
  std::vector<LossRecord> trace_;
  int steps_done_ = 0;
  std::optional<Positions> cmp_;
  std::optional<Positions> out_;
  RefineReport refine_report_;
};

}  // namespace meshprior
