// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SparseCore>

#include <memory>
#include <span>
#include <vector>

namespace meshprior {

using Vec3 = Eigen::Vector3d;
/// |V|x3 vertex positions (or any per-vertex 3-vector field).
using Positions = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
/// |F|x3 vertex indices, counter-clockwise when seen from outside.
using FaceArray = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Undirected edge with up to two incident faces recorded. `face_count`
/// holds the true count so non-manifold edges can be reported.
struct Edge {
  int v0 = -1;  // v0 < v1
  int v1 = -1;
  int f0 = -1;
  int f1 = -1;
  int face_count = 0;

  bool is_boundary() const { return face_count == 1; }
};

/// Indexed triangle mesh. Positions are mutable only through
/// `with_vertices`, which shares the connectivity of the original.
class Mesh {
 public:
  Mesh();
  Mesh(Positions vertices, FaceArray faces);

  const Positions& vertices() const { return vertices_; }
  const FaceArray& faces() const { return faces_; }
  int num_vertices() const { return static_cast<int>(vertices_.rows()); }
  int num_faces() const { return static_cast<int>(faces_.rows()); }
  int num_edges() const;

  Vec3 position(int v) const { return vertices_.row(v).transpose(); }
  Eigen::Vector3i face(int f) const { return faces_.row(f).transpose(); }

  /// Sorted one-ring of `v`.
  std::span<const int> neighbors(int v) const;
  /// Edge ids aligned with `neighbors(v)`.
  std::span<const int> vertex_edges(int v) const;
  std::span<const int> vertex_faces(int v) const;
  const Edge& edge(int e) const;
  /// Edge id of {a, b}, or -1.
  int find_edge(int a, int b) const;
  /// Faces sharing an edge with `f`.
  std::vector<int> face_neighbors(int f) const;

  bool is_closed() const;
  bool has_nonmanifold_edges() const;

  /// Same connectivity, new positions.
  Mesh with_vertices(Positions vertices) const;

 private:
  struct Topology;

  Positions vertices_;
  FaceArray faces_;
  std::shared_ptr<const Topology> topo_;
};

/// Unit normal per face; throws on zero-area faces.
Positions face_normals(const Mesh& mesh);
/// Same formula without validation: degenerate faces get a zero normal.
Positions face_normals_unchecked(const Positions& vertices, const FaceArray& faces);
Eigen::VectorXd face_areas(const Positions& vertices, const FaceArray& faces);
Positions face_centroids(const Positions& vertices, const FaceArray& faces);
/// Area-weighted vertex normals.
Positions vertex_normals(const Mesh& mesh);

/// L = I - D^-1 A over the mesh graph.
SparseMatrix uniform_laplacian(const Mesh& mesh);
SparseMatrix adjacency_matrix(const Mesh& mesh);

double bbox_diagonal(const Positions& vertices);
inline double bbox_diagonal(const Mesh& mesh) { return bbox_diagonal(mesh.vertices()); }
double mean_edge_length(const Mesh& mesh);

/// Sorted vertex indices within graph distance `k` of `seed`.
std::vector<int> k_ring(const Mesh& mesh, int seed, int k);

/// Closed cycles of boundary edges, each oriented opposite to its adjacent
/// faces so that a fill triangle (l[i], l[j], l[k]) with i < j < k matches
/// the surrounding winding.
std::vector<std::vector<int>> boundary_loops(const Mesh& mesh);

/// Face-connected component label per face; returns the component count.
int face_components(const Mesh& mesh, std::vector<int>& labels);

/// Drops unreferenced vertices; `old_to_new` (optional) maps old ids to new
/// ids or -1.
Mesh compact(const Positions& vertices, const FaceArray& faces, std::vector<int>* old_to_new = nullptr);

}  // namespace meshprior
