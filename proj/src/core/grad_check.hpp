// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "core/gcn.hpp"
#include "core/losses.hpp"

namespace meshprior {

struct GradCheckOptions {
  Architecture arch = Architecture::Sgcn;
  int width = 8;
  double h = 1e-5;
  double tolerance = 1e-4;
  /// Denominator floor of the relative error, so entries whose true
  /// gradient is at round-off level (e.g. convolution biases feeding
  /// BatchNorm, exactly zero) are compared absolutely.
  double abs_floor = 1e-3;
  std::uint64_t seed = 1;
  /// Training steps taken before the check, so the gradient is evaluated at
  /// a point the optimizer visits rather than at the crumpled initial output.
  int warmup_steps = 20;
  /// Hold LeakyReLU branches and L1 sign patterns at the unperturbed point
  /// during differencing.
  bool freeze_activations = true;
  /// Fault injection: perturb one analytic gradient entry of this parameter.
  std::string corrupt_parameter;
};

struct GradCheckReport {
  bool passed = false;
  double max_rel_error = 0.0;
  std::string worst_parameter;
  int worst_entry = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  long long checked = 0;
  int parameters = 0;
  double seconds = 0.0;
};

/// Compares every parameter gradient of the CAD-weighted total loss on the
/// built-in 50-vertex sphere against central differences.
GradCheckReport grad_check(const GradCheckOptions& options);

}  // namespace meshprior
