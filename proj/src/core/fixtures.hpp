// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "core/mesh.hpp"

namespace meshprior {

/// Class-I geodesic sphere on the unit sphere: 10 f^2 + 2 vertices.
Mesh geodesic_sphere(int frequency);
/// Loop-style icosphere, `geodesic_sphere(2^subdivisions)`.
Mesh icosphere(int subdivisions);
/// Latitude/longitude sphere: `rings` latitude circles of `segments`
/// vertices plus two poles.
Mesh uv_sphere(int rings, int segments);
/// Axis-aligned cube of the given edge length centred at the origin, each
/// side split into n x n quads (two triangles each).
Mesh subdivided_cube(int n, double edge = 1.0);
/// Flat nx x ny grid of unit squares in the z = 0 plane.
Mesh plane_grid(int nx, int ny);

/// Deletes the listed vertices and every face touching them, then drops
/// unreferenced vertices.
Mesh remove_vertices(const Mesh& mesh, const std::vector<int>& vertices);

struct Fixture {
  Mesh damaged;
  Mesh ground_truth;
};

/// Built-in test meshes: "sphere-cap" (subdivision-4 icosphere with a 4-ring
/// cap removed), "cube-edge-hole" (cube with a hole across one edge),
/// "plane-grid" (open grid, no hole punched), "sphere-50" (watertight
/// 50-vertex sphere).
Fixture make_fixture(const std::string& name);
std::vector<std::string> fixture_names();

}  // namespace meshprior
