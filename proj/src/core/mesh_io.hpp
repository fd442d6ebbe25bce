// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>

#include "core/mesh.hpp"

namespace meshprior {

/// Reads OBJ (v/f records) or PLY (ascii, binary little/big endian).
/// Polygons are fan-triangulated around their first vertex. Faces with area
/// below 1e-12 * bbox_diagonal^2 are rejected.
Mesh load_mesh(const std::string& path);

/// Writes by extension: `.obj` (%.17g text) or `.ply` (binary little endian,
/// double coordinates). A scalar field is emitted as PLY vertex colours via
/// `signed_colormap`; OBJ output ignores it.
void save_mesh(const Mesh& mesh, const std::string& path,
               const Eigen::VectorXd* scalars = nullptr);

/// In-memory PLY encoding used by `save_mesh` and the hierarchy sidecar.
std::string encode_ply(const Mesh& mesh, const Eigen::VectorXd* scalars = nullptr);
Mesh decode_ply(const std::string& bytes, const std::string& source_name = "<memory>");

/// Symmetric blue-white-red map over [-max|v|, max|v|]; zero maps to white.
std::array<unsigned char, 3> signed_colormap(double value, double max_abs);

}  // namespace meshprior
