// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/losses.hpp"
#include "core/mesh.hpp"

namespace meshprior {

/// Row i = init_i where mask_i = 1, cmp_i otherwise.
Positions build_xmix(const Positions& init, const Positions& cmp, std::span<const std::uint8_t> mask);

/// Sorted vertices that are masked or have a masked neighbour.
std::vector<int> build_hbar(const Mesh& mesh, std::span<const std::uint8_t> mask);

struct RefineOptions {
  double mu = 1.0;
  double tolerance = 1e-10;  // CG relative residual
  double max_residual = 1e-8;  // accepted relative residual of the normal equations
  int max_iterations = 0;    // <= 0: 10 |V|
};

struct RefineReport {
  double relative_residual = 0.0;  // worst of the three coordinates
  int iterations = 0;              // most CG iterations over the coordinates
  int hbar_size = 0;
};

/// argmin_X 1/2 |L (X - X_mix)|^2 + mu/2 |Q (X - X_init)|^2 with the uniform
/// Laplacian of `mesh` and Q zero on H-bar.
Positions refine(const Mesh& mesh, const Positions& init, const Positions& cmp, std::span<const std::uint8_t> mask,
                 const RefineOptions& options, RefineReport* report = nullptr);

double default_mu(MeshType type);
/// Per-mesh value for known test meshes (case-insensitive name match), or
/// the mesh-type default.
double named_mu(const std::string& mesh_name, MeshType type);

}  // namespace meshprior
