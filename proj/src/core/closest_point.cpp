// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/closest_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace meshprior {

// Ericson, Real-Time Collision Detection, 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

TriangleBvh::TriangleBvh(const Mesh& mesh) : vertices_(mesh.vertices()), faces_(mesh.faces()) {
  const int nf = static_cast<int>(faces_.rows());
  order_.resize(nf);
  face_boxes_.resize(nf);
  for (int j = 0; j < nf; ++j) {
    order_[j] = j;
    Eigen::AlignedBox3d box;
    for (int c = 0; c < 3; ++c) box.extend(Vec3(vertices_.row(faces_(j, c))));
    face_boxes_[j] = box;
  }
  if (nf > 0) {
    nodes_.reserve(2 * static_cast<size_t>(nf));
    build(0, nf);
  }
}

int TriangleBvh::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Eigen::AlignedBox3d box;
  for (int i = begin; i < end; ++i) box.extend(face_boxes_[order_[i]]);
  nodes_[id].box = box;
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= 4) return id;

  int axis = 0;
  box.sizes().maxCoeff(&axis);
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
    const double ca = face_boxes_[a].center()(axis);
    const double cb = face_boxes_[b].center()(axis);
    return ca < cb || (ca == cb && a < b);
  });
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

ClosestPoint TriangleBvh::closest(const Vec3& p) const {
  ClosestPoint best;
  double best_d2 = std::numeric_limits<double>::infinity();
  if (nodes_.empty()) return best;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int n = stack.back();
    stack.pop_back();
    const Node& node = nodes_[n];
    if (node.box.squaredExteriorDistance(p) >= best_d2) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int j = order_[i];
        const Vec3 q = closest_point_on_triangle(p, vertices_.row(faces_(j, 0)), vertices_.row(faces_(j, 1)),
                                                 vertices_.row(faces_(j, 2)));
        const double d2 = (q - p).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && j < best.face)) {
          best_d2 = d2;
          best.point = q;
          best.face = j;
        }
      }
      continue;
    }
    const double dl = nodes_[node.left].box.squaredExteriorDistance(p);
    const double dr = nodes_[node.right].box.squaredExteriorDistance(p);
    if (dl < dr) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  best.distance = std::sqrt(best_d2);
  return best;
}

double TriangleBvh::signed_distance(const Vec3& p) const {
  const ClosestPoint cp = closest(p);
  if (cp.face < 0) return 0.0;
  const Vec3 a = vertices_.row(faces_(cp.face, 0));
  const Vec3 n = (Vec3(vertices_.row(faces_(cp.face, 1))) - a).cross(Vec3(vertices_.row(faces_(cp.face, 2))) - a);
  return (p - cp.point).dot(n) >= 0 ? cp.distance : -cp.distance;
}

}  // namespace meshprior
