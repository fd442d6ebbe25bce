// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "core/mesh.hpp"

namespace meshprior {

/// Mutable face-list mesh with vertex-to-face incidence, for local
/// topological edits (split, collapse, flip). Deleted elements are
/// tombstoned until `to_mesh` compacts them.
class EditableMesh {
 public:
  explicit EditableMesh(const Mesh& mesh);

  int add_vertex(const Vec3& p);

  bool vertex_alive(int v) const { return vertex_alive_[v] != 0; }
  bool face_alive(int f) const { return face_alive_[f] != 0; }
  int num_vertex_slots() const { return static_cast<int>(pos_.size()); }
  int num_face_slots() const { return static_cast<int>(faces_.size()); }
  int num_live_vertices() const { return live_vertices_; }

  const Vec3& position(int v) const { return pos_[v]; }
  void set_position(int v, const Vec3& p) { pos_[v] = p; }
  const std::array<int, 3>& face(int f) const { return faces_[f]; }
  const std::vector<int>& vertex_faces(int v) const { return vf_[v]; }

  std::vector<int> one_ring(int v) const;
  int valence(int v) const { return static_cast<int>(one_ring(v).size()); }
  /// Live faces containing both a and b.
  std::vector<int> edge_faces(int a, int b) const;
  /// Third vertex of face f given two of its vertices.
  int opposite(int f, int a, int b) const;
  /// Unique undirected edges (a < b) of live faces.
  std::vector<std::array<int, 2>> edges() const;
  Vec3 face_normal(int f) const;

  /// True when collapsing {a, b} keeps the surface a 2-manifold: the common
  /// neighbours are exactly the opposite vertices of the edge's faces.
  bool link_condition(int a, int b) const;

  /// Merges `removed` into `kept` (kept keeps its position). Returns the
  /// ids of the deleted faces.
  std::vector<int> collapse(int kept, int removed);

  /// Inserts a vertex at p on edge {a, b}. For every face split, reports
  /// (original face id, new face id) so callers can copy attributes.
  int split(int a, int b, const Vec3& p, std::vector<std::array<int, 2>>* face_pairs = nullptr);

  /// Replaces the two faces of interior edge {a, b} by the two faces of the
  /// opposite diagonal. Returns false (no change) if not flippable.
  bool flip(int a, int b);

  /// Compacted mesh plus maps from slot ids to new ids (-1 when deleted).
  Mesh to_mesh(std::vector<int>* vertex_map = nullptr, std::vector<int>* face_map = nullptr) const;

 private:
  void replace_in_face(int f, int from, int to);
  void detach_face(int f);

  std::vector<Vec3> pos_;
  std::vector<std::array<int, 3>> faces_;
  std::vector<char> vertex_alive_;
  std::vector<char> face_alive_;
  std::vector<std::vector<int>> vf_;
  int live_vertices_ = 0;
};

}  // namespace meshprior
