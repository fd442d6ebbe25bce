// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "core/gcn.hpp"
#include "core/hierarchy.hpp"
#include "core/losses.hpp"
#include "core/preprocess.hpp"

namespace meshprior {

struct AugmentationConfig {
  double p = 0.014;
  int k = 4;
  int sets = 40;
  std::uint64_t seed = 0;
};

/// `config.sets` masks; each marks every vertex as a seed with probability p
/// and hides the k-rings of the seeds on top of the real holes.
std::vector<HoleMask> gen_fake_holes(const Mesh& mesh, const HoleMask& real, const AugmentationConfig& config);

/// Row i = (dx, dy, dz, 1) where mask_i = 1, zeros otherwise.
Features build_features(const Positions& displacement, std::span<const std::uint8_t> mask);

/// Everything the training loop needs about one preprocessed input.
struct TrainingProblem {
  Mesh mesh;                          // M_init connectivity and positions
  GraphStack graphs;
  HoleMask real_mask;
  Positions displacement;             // init - smooth on level 0
  std::vector<Positions> smooth;      // per level
  std::vector<Positions> init;        // per level
  std::vector<Flags> vertex_masks;    // per level, real holes only
  Positions init_normals;
  /// Network units: inputs are displacement / scale and outputs are
  /// multiplied by scale, so the optimizer works on O(1) quantities whatever
  /// the size of the mesh.
  double scale = 1.0;

  int num_levels() const { return static_cast<int>(smooth.size()); }
  Features features(std::span<const std::uint8_t> mask) const;
  /// smooth[level] + scale * output
  Positions completed(int level, const Features& output) const;
};

/// `hierarchy` must be built on the smoothed mesh of `pre`; pass a single
/// level hierarchy for SGCN.
TrainingProblem make_training_problem(const PreprocessResult& pre, const Hierarchy& hierarchy);

/// RMS length of the known displacements. Falls back to 1% of the mean edge
/// length when every known displacement vanishes.
double displacement_scale(const Mesh& mesh, const Positions& displacement, std::span<const std::uint8_t> known);

struct TrainConfig {
  int steps = 100;
  LossWeights weights;
  AdamConfig adam;
  BnfParams bnf;
};

struct LossRecord {
  int step = 0;
  double lr = 0.0;
  std::vector<double> pos;
  double nrm = 0.0;
  double reg = 0.0;
  double total = 0.0;
};

using StepCallback = std::function<void(const LossRecord&)>;

/// Steps first_step .. config.steps, one mask set per step in round-robin
/// order. Throws a Numeric error on a non-finite loss or gradient; `trace`
/// keeps the records of the completed steps.
void train(GcnModel& model, const TrainingProblem& problem, const std::vector<HoleMask>& masks,
           const TrainConfig& config, std::vector<LossRecord>& trace, int first_step = 1,
           const StepCallback& callback = {});

void write_loss_trace(std::ostream& out, const std::vector<LossRecord>& trace);

/// Evaluation-mode forward with real holes only; returns X_cmp on M_init.
Positions evaluate(GcnModel& model, const TrainingProblem& problem);

struct MetricsReport {
  double eps_all = 0.0;                 // x 1e-3 of the GT bbox diagonal
  std::optional<double> eps_hole;
  double eps_all_vertex = 0.0;          // nearest-vertex variant
  std::optional<double> eps_hole_vertex;
  Eigen::VectorXd signed_distance;      // unnormalized, per output vertex
  int hole_vertices = 0;
};

/// Distances from output vertices to the GT surface. `hole_mask` (1 = known)
/// may be empty. The nearest-vertex variant is computed only on request.
MetricsReport compute_metrics(const Mesh& output, const Mesh& ground_truth, std::span<const std::uint8_t> hole_mask,
                              bool nearest_vertex = false);

/// Mean angle (radians) between output face normals and the GT surface
/// normal at the closest point of each face centroid, over faces whose
/// vertices are all selected by `vertex_select` (empty = all faces).
double mean_normal_angle(const Mesh& output, const Mesh& ground_truth, std::span<const std::uint8_t> vertex_select);

}  // namespace meshprior
