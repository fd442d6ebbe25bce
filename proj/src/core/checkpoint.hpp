// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>

#include "core/gcn.hpp"

namespace meshprior {

/// Versioned binary model snapshot: architecture and layer dimensions, every
/// parameter with its Adam moments, BatchNorm running statistics, the number
/// of completed steps, the data scale and the serialized augmentation RNG.
///
/// Layout (little endian): "MPCKPT01", u32 version, config block, i32 step,
/// f64 scale, string rng, u32 parameter count, then per parameter a name,
/// u32 rows, u32 cols and rows*cols f64 for value, m and v; u32 block count
/// and per block width f64 means then width f64 variances.
struct Checkpoint {
  GcnModel model;
  int step = 0;
  double scale = 1.0;
  std::string rng_state;
};

void write_checkpoint(std::ostream& out, const GcnModel& model, int step, double scale, const std::string& rng_state);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const GcnModel& model, int step, double scale,
                     const std::string& rng_state);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace meshprior
