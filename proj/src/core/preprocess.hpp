// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "core/mesh.hpp"

namespace meshprior {

using Flags = std::vector<std::uint8_t>;

/// Per-vertex and per-face known/hole flags (1 = known, 0 = hole), kept
/// separately for real holes (from the input) and fake holes (augmentation).
/// A face is a hole iff any of its vertices is.
struct HoleMask {
  Flags real_vertex;
  Flags fake_vertex;
  Flags real_face;
  Flags fake_face;

  /// Real-only mask with no fake holes.
  static HoleMask from_real(const Mesh& mesh, Flags real_vertex);
  /// Adds fake-hole vertices (0 entries in `fake_vertex`) to a real mask.
  HoleMask with_fake(const Mesh& mesh, Flags fake_vertex) const;

  int num_vertices() const { return static_cast<int>(real_vertex.size()); }
  std::uint8_t vertex(int i) const { return real_vertex[i] & fake_vertex[i]; }
  std::uint8_t face(int j) const { return real_face[j] & fake_face[j]; }
  /// Combined vertex mask (real and fake holes both 0).
  Flags vertex_mask() const;
  Flags face_mask() const;
  double masked_fraction() const;
};

/// Face flags: a face is a hole iff any of its vertices is.
Flags face_mask_from_vertices(const Mesh& mesh, std::span<const std::uint8_t> vertex_mask);

struct FillResult {
  Mesh mesh;
  Flags inserted_faces;
  int loops_filled = 0;
  int components_dropped = 0;
};

/// Keeps the largest connected component and closes every boundary loop
/// with a minimum-area triangulation (dynamic programming over the loop).
FillResult fill_holes_watertight(const Mesh& mesh);

/// Minimum-area triangulation of a closed 3D polygon given by `loop`
/// indices into `positions`. Triangles use loop order (i < j < k). Returns
/// an empty list if no non-degenerate triangulation avoids `forbidden`.
std::vector<std::array<int, 3>> min_area_triangulation(
    const Positions& positions, const std::vector<int>& loop,
    const std::vector<std::array<int, 2>>& forbidden = {});

struct RemeshOptions {
  double target_edge_length = 0.0;
  int iterations = 5;
  double feature_angle_deg = 45.0;
};

struct RemeshResult {
  Mesh mesh;
  Flags inserted_faces;
  Flags inserted_vertices;
};

/// Split / collapse / flip / tangential relaxation remeshing towards a
/// uniform edge length, with vertices projected back onto the input surface.
/// Sharp edges between non-inserted faces are preserved.
RemeshResult isotropic_remesh(const Mesh& mesh, std::span<const std::uint8_t> inserted_faces,
                              const RemeshOptions& options);

/// `steps` rounds of x <- D^-1 A x.
Mesh oversmooth(const Mesh& mesh, int steps = 30);

struct PreprocessConfig {
  int remesh_iterations = 5;
  double target_edge_length = 0.0;  // <= 0: mean edge length of the known region
  double feature_angle_deg = 45.0;
  int smooth_steps = 30;
};

struct PreprocessResult {
  Mesh init_mesh;
  Mesh smooth_mesh;
  HoleMask real_mask;
  Positions displacement;
  int hole_loops = 0;
  double target_edge_length = 0.0;
};

PreprocessResult preprocess(const Mesh& input, const PreprocessConfig& config = {});

}  // namespace meshprior
