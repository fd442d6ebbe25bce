// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Geometry>

#include <vector>

#include "core/mesh.hpp"

namespace meshprior {

struct ClosestPoint {
  Vec3 point = Vec3::Zero();
  int face = -1;
  double distance = 0.0;
};

/// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Axis-aligned bounding-volume hierarchy over the faces of a mesh, for
/// exact point-to-surface queries. Keeps a copy of the geometry it indexes.
class TriangleBvh {
 public:
  explicit TriangleBvh(const Mesh& mesh);

  ClosestPoint closest(const Vec3& p) const;
  /// Distance signed by the normal of the closest face (positive outside).
  double signed_distance(const Vec3& p) const;

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    int left = -1;
    int right = -1;
    int begin = 0;
    int end = 0;
  };

  int build(int begin, int end);

  Positions vertices_;
  FaceArray faces_;
  std::vector<int> order_;
  std::vector<Eigen::AlignedBox3d> face_boxes_;
  std::vector<Node> nodes_;
};

}  // namespace meshprior
