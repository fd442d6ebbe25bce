// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "core/gcn.hpp"
#include "core/losses.hpp"
#include "core/pipeline.hpp"
#include "core/preprocess.hpp"
#include "core/refine.hpp"

namespace meshprior {

/// Everything a run needs. Read from an INI file with sections [run],
/// [remesh], [smooth], [augment], [train], [bnf], [refine] and [metrics];
/// unknown sections or keys are rejected.
struct RunConfig {
  // [run]
  std::string input;
  std::string ground_truth;
  std::string output_dir;
  std::string mesh_name;  // optional; selects a per-mesh refinement weight
  Architecture arch = Architecture::Sgcn;
  MeshType type = MeshType::NonCad;
  std::uint64_t seed = 0;

  // [remesh] and [smooth]
  PreprocessConfig preprocess;

  // [augment]; the seed is derived from run.seed
  double p = 0.014;
  int k = 4;
  int mask_sets = 40;

  // [train]
  int steps = 100;
  AdamConfig adam;
  int width = 32;
  int cheb_order = 3;
  int sgcn_blocks = 13;
  int mgcn_blocks_per_stage = 5;
  int levels = 3;  // R
  double leaky_slope = 0.01;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;
  std::optional<std::vector<double>> w_pos;  // defaults from the weight table
  std::optional<double> w_nrm;
  std::optional<double> w_reg;

  // [bnf]
  BnfParams bnf;

  // [refine]
  std::optional<double> mu;  // unset: per-mesh or per-type default
  double refine_tolerance = 1e-10;
  double refine_max_residual = 1e-8;

  // [metrics]
  bool nearest_vertex = false;
};

/// Throws Config errors naming the offending key.
RunConfig parse_config(std::istream& in, const std::string& source_name = "<config>");
RunConfig load_config(const std::string& path);

/// Applies one "section.key = value" assignment with the same validation as
/// the file parser.
void set_config_value(RunConfig& config, const std::string& dotted_key, const std::string& value);
/// Current value of a key in the textual form written by `write_config`.
std::string get_config_value(const RunConfig& config, const std::string& dotted_key);

/// Range checks across keys; throws Config.
void validate_config(const RunConfig& config);

/// Every key with its effective value; parsing the output gives back an
/// equal configuration.
void write_config(std::ostream& out, const RunConfig& config);
std::string config_to_string(const RunConfig& config);

ModelConfig model_config(const RunConfig& config);
LossWeights loss_weights(const RunConfig& config);
AugmentationConfig augmentation_config(const RunConfig& config);
RefineOptions refine_options(const RunConfig& config);
TrainConfig train_config(const RunConfig& config);
/// Number of pooling levels actually used (0 for SGCN).
int hierarchy_levels(const RunConfig& config);

}  // namespace meshprior
