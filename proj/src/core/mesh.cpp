// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <tuple>

#include "core/error.hpp"

namespace meshprior {

struct Mesh::Topology {
  std::vector<int> nbr_offsets;
  std::vector<int> nbr;
  std::vector<int> nbr_edge;
  std::vector<int> vf_offsets;
  std::vector<int> vf;
  std::vector<Edge> edges;
  bool closed = true;
  bool nonmanifold = false;
};

Mesh::Mesh() : Mesh(Positions(0, 3), FaceArray(0, 3)) {}

Mesh::Mesh(Positions vertices, FaceArray faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  const int nv = num_vertices();
  const int nf = num_faces();
  auto topo = std::make_shared<Topology>();

  for (int f = 0; f < nf; ++f) {
    for (int c = 0; c < 3; ++c) {
      const int v = faces_(f, c);
      if (v < 0 || v >= nv) {
        throw Error(ErrorCode::Data, "face " + std::to_string(f) + " references vertex " +
                                         std::to_string(v) + " out of range [0, " +
                                         std::to_string(nv) + ")");
      }
    }
    if (faces_(f, 0) == faces_(f, 1) || faces_(f, 1) == faces_(f, 2) || faces_(f, 0) == faces_(f, 2)) {
      throw Error(ErrorCode::Data, "face " + std::to_string(f) + " repeats a vertex index");
    }
  }

  // Edges: sort (lo, hi, face) triples and group.
  std::vector<std::array<int, 3>> half(static_cast<size_t>(nf) * 3);
  for (int f = 0; f < nf; ++f) {
    for (int c = 0; c < 3; ++c) {
      const int a = faces_(f, c);
      const int b = faces_(f, (c + 1) % 3);
      half[3 * f + c] = {std::min(a, b), std::max(a, b), f};
    }
  }
  std::sort(half.begin(), half.end());
  for (size_t i = 0; i < half.size();) {
    size_t j = i;
    Edge e;
    e.v0 = half[i][0];
    e.v1 = half[i][1];
    while (j < half.size() && half[j][0] == e.v0 && half[j][1] == e.v1) {
      if (e.face_count == 0) e.f0 = half[j][2];
      else if (e.face_count == 1) e.f1 = half[j][2];
      ++e.face_count;
      ++j;
    }
    if (e.face_count != 2) topo->closed = false;
    if (e.face_count > 2) topo->nonmanifold = true;
    topo->edges.push_back(e);
    i = j;
  }

  std::vector<int> degree(nv, 0);
  for (const Edge& e : topo->edges) {
    ++degree[e.v0];
    ++degree[e.v1];
  }
  topo->nbr_offsets.assign(nv + 1, 0);
  for (int v = 0; v < nv; ++v) topo->nbr_offsets[v + 1] = topo->nbr_offsets[v] + degree[v];
  topo->nbr.resize(topo->nbr_offsets[nv]);
  topo->nbr_edge.resize(topo->nbr_offsets[nv]);
  std::vector<int> fill(topo->nbr_offsets.begin(), topo->nbr_offsets.end() - 1);
  for (int e = 0; e < static_cast<int>(topo->edges.size()); ++e) {
    const Edge& ed = topo->edges[e];
    topo->nbr[fill[ed.v0]] = ed.v1;
    topo->nbr_edge[fill[ed.v0]++] = e;
    topo->nbr[fill[ed.v1]] = ed.v0;
    topo->nbr_edge[fill[ed.v1]++] = e;
  }
  for (int v = 0; v < nv; ++v) {
    const int b = topo->nbr_offsets[v];
    const int n = degree[v];
    std::vector<std::pair<int, int>> tmp(n);
    for (int i = 0; i < n; ++i) tmp[i] = {topo->nbr[b + i], topo->nbr_edge[b + i]};
    std::sort(tmp.begin(), tmp.end());
    for (int i = 0; i < n; ++i) {
      topo->nbr[b + i] = tmp[i].first;
      topo->nbr_edge[b + i] = tmp[i].second;
    }
  }

  std::vector<int> fdeg(nv, 0);
  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) ++fdeg[faces_(f, c)];
  topo->vf_offsets.assign(nv + 1, 0);
  for (int v = 0; v < nv; ++v) topo->vf_offsets[v + 1] = topo->vf_offsets[v] + fdeg[v];
  topo->vf.resize(topo->vf_offsets[nv]);
  std::vector<int> vfill(topo->vf_offsets.begin(), topo->vf_offsets.end() - 1);
  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) topo->vf[vfill[faces_(f, c)]++] = f;

  topo_ = std::move(topo);
}

int Mesh::num_edges() const { return static_cast<int>(topo_->edges.size()); }

std::span<const int> Mesh::neighbors(int v) const {
  const int b = topo_->nbr_offsets[v];
  return {topo_->nbr.data() + b, static_cast<size_t>(topo_->nbr_offsets[v + 1] - b)};
}

std::span<const int> Mesh::vertex_edges(int v) const {
  const int b = topo_->nbr_offsets[v];
  return {topo_->nbr_edge.data() + b, static_cast<size_t>(topo_->nbr_offsets[v + 1] - b)};
}

std::span<const int> Mesh::vertex_faces(int v) const {
  const int b = topo_->vf_offsets[v];
  return {topo_->vf.data() + b, static_cast<size_t>(topo_->vf_offsets[v + 1] - b)};
}

const Edge& Mesh::edge(int e) const { return topo_->edges[e]; }

int Mesh::find_edge(int a, int b) const {
  auto nb = neighbors(a);
  auto it = std::lower_bound(nb.begin(), nb.end(), b);
  if (it == nb.end() || *it != b) return -1;
  return vertex_edges(a)[it - nb.begin()];
}

std::vector<int> Mesh::face_neighbors(int f) const {
  std::vector<int> out;
  for (int c = 0; c < 3; ++c) {
    const int e = find_edge(faces_(f, c), faces_(f, (c + 1) % 3));
    const Edge& ed = topo_->edges[e];
    if (ed.face_count != 2) continue;
    out.push_back(ed.f0 == f ? ed.f1 : ed.f0);
  }
  return out;
}

bool Mesh::is_closed() const { return topo_->closed; }
bool Mesh::has_nonmanifold_edges() const { return topo_->nonmanifold; }

Mesh Mesh::with_vertices(Positions vertices) const {
  if (vertices.rows() != vertices_.rows()) {
    throw Error(ErrorCode::Argument, "with_vertices: vertex count mismatch");
  }
  Mesh out(*this);
  out.vertices_ = std::move(vertices);
  return out;
}

Positions face_normals(const Mesh& mesh) {
  const Positions& x = mesh.vertices();
  const FaceArray& f = mesh.faces();
  Positions n(f.rows(), 3);
  for (Eigen::Index j = 0; j < f.rows(); ++j) {
    const Vec3 a = x.row(f(j, 0));
    const Vec3 c = (Vec3(x.row(f(j, 1))) - a).cross(Vec3(x.row(f(j, 2))) - a);
    const double len = c.norm();
    if (!(len > std::numeric_limits<double>::min())) {
      throw Error(ErrorCode::Degenerate, "face " + std::to_string(j) + " has zero area");
    }
    n.row(j) = c / len;
  }
  return n;
}

Positions face_normals_unchecked(const Positions& x, const FaceArray& f) {
  Positions n(f.rows(), 3);
  for (Eigen::Index j = 0; j < f.rows(); ++j) {
    const Vec3 a = x.row(f(j, 0));
    const Vec3 c = (Vec3(x.row(f(j, 1))) - a).cross(Vec3(x.row(f(j, 2))) - a);
    const double len = c.norm();
    if (len > std::numeric_limits<double>::min()) n.row(j) = c / len;
    else n.row(j).setZero();
  }
  return n;
}

Eigen::VectorXd face_areas(const Positions& x, const FaceArray& f) {
  Eigen::VectorXd a(f.rows());
  for (Eigen::Index j = 0; j < f.rows(); ++j) {
    const Vec3 p = x.row(f(j, 0));
    a(j) = 0.5 * (Vec3(x.row(f(j, 1))) - p).cross(Vec3(x.row(f(j, 2))) - p).norm();
  }
  return a;
}

Positions face_centroids(const Positions& x, const FaceArray& f) {
  Positions c(f.rows(), 3);
  for (Eigen::Index j = 0; j < f.rows(); ++j) {
    c.row(j) = (x.row(f(j, 0)) + x.row(f(j, 1)) + x.row(f(j, 2))) / 3.0;
  }
  return c;
}

Positions vertex_normals(const Mesh& mesh) {
  const Positions& x = mesh.vertices();
  const FaceArray& f = mesh.faces();
  Positions n = Positions::Zero(x.rows(), 3);
  for (Eigen::Index j = 0; j < f.rows(); ++j) {
    const Vec3 a = x.row(f(j, 0));
    const Vec3 c = (Vec3(x.row(f(j, 1))) - a).cross(Vec3(x.row(f(j, 2))) - a);
    for (int k = 0; k < 3; ++k) n.row(f(j, k)) += c.transpose();
  }
  for (Eigen::Index i = 0; i < n.rows(); ++i) {
    const double len = n.row(i).norm();
    if (len > 0) n.row(i) /= len;
  }
  return n;
}

SparseMatrix uniform_laplacian(const Mesh& mesh) {
  const int nv = mesh.num_vertices();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(nv) + 2 * static_cast<size_t>(mesh.num_edges()));
  for (int i = 0; i < nv; ++i) {
    auto nb = mesh.neighbors(i);
    if (nb.empty()) {
      throw Error(ErrorCode::Structure, "vertex " + std::to_string(i) + " is isolated");
    }
    trip.emplace_back(i, i, 1.0);
    const double w = -1.0 / static_cast<double>(nb.size());
    for (int j : nb) trip.emplace_back(i, j, w);
  }
  SparseMatrix L(nv, nv);
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

SparseMatrix adjacency_matrix(const Mesh& mesh) {
  const int nv = mesh.num_vertices();
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < nv; ++i)
    for (int j : mesh.neighbors(i)) trip.emplace_back(i, j, 1.0);
  SparseMatrix A(nv, nv);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

double bbox_diagonal(const Positions& x) {
  if (x.rows() == 0) return 0.0;
  return (x.colwise().maxCoeff() - x.colwise().minCoeff()).norm();
}

double mean_edge_length(const Mesh& mesh) {
  if (mesh.num_edges() == 0) return 0.0;
  double sum = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& ed = mesh.edge(e);
    sum += (mesh.position(ed.v0) - mesh.position(ed.v1)).norm();
  }
  return sum / mesh.num_edges();
}

std::vector<int> k_ring(const Mesh& mesh, int seed, int k) {
  if (seed < 0 || seed >= mesh.num_vertices()) {
    throw Error(ErrorCode::Argument, "k_ring: seed out of range");
  }
  std::vector<int> dist(mesh.num_vertices(), -1);
  std::vector<int> out{seed};
  dist[seed] = 0;
  for (size_t head = 0; head < out.size(); ++head) {
    const int v = out[head];
    if (dist[v] == k) continue;
    for (int w : mesh.neighbors(v)) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        out.push_back(w);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<int>> boundary_loops(const Mesh& mesh) {
  if (mesh.has_nonmanifold_edges()) {
    throw Error(ErrorCode::Structure, "mesh has an edge shared by more than two faces");
  }
  // Reversed boundary half-edges: for face (a,b,c) with boundary edge a->b
  // the loop runs b->a.
  std::vector<std::vector<int>> out_edges(mesh.num_vertices());
  int remaining = 0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& ed = mesh.edge(e);
    if (!ed.is_boundary()) continue;
    const auto f = mesh.face(ed.f0);
    for (int c = 0; c < 3; ++c) {
      const int a = f[c];
      const int b = f[(c + 1) % 3];
      if ((a == ed.v0 && b == ed.v1) || (a == ed.v1 && b == ed.v0)) {
        out_edges[b].push_back(a);
        ++remaining;
        break;
      }
    }
  }
  for (auto& o : out_edges) std::sort(o.begin(), o.end());

  std::vector<std::vector<int>> loops;
  for (int start = 0; start < mesh.num_vertices() && remaining > 0; ++start) {
    while (!out_edges[start].empty()) {
      std::vector<int> loop{start};
      int cur = start;
      while (true) {
        auto& outs = out_edges[cur];
        if (outs.empty()) {
          throw Error(ErrorCode::Structure, "open boundary chain at vertex " + std::to_string(cur));
        }
        const int next = outs.front();
        outs.erase(outs.begin());
        --remaining;
        if (next == start) break;
        loop.push_back(next);
        cur = next;
      }
      loops.push_back(std::move(loop));
    }
  }
  return loops;
}

int face_components(const Mesh& mesh, std::vector<int>& labels) {
  labels.assign(mesh.num_faces(), -1);
  int count = 0;
  std::vector<int> stack;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (labels[f] >= 0) continue;
    labels[f] = count;
    stack.push_back(f);
    while (!stack.empty()) {
      const int g = stack.back();
      stack.pop_back();
      // Vertex-connectivity: faces sharing any vertex belong together.
      for (int c = 0; c < 3; ++c) {
        for (int h : mesh.vertex_faces(mesh.faces()(g, c))) {
          if (labels[h] < 0) {
            labels[h] = count;
            stack.push_back(h);
          }
        }
      }
    }
    ++count;
  }
  return count;
}

Mesh compact(const Positions& vertices, const FaceArray& faces, std::vector<int>* old_to_new) {
  std::vector<int> map(vertices.rows(), -1);
  int next = 0;
  for (Eigen::Index f = 0; f < faces.rows(); ++f)
    for (int c = 0; c < 3; ++c)
      if (map[faces(f, c)] < 0) map[faces(f, c)] = 0;
  for (auto& m : map)
    if (m == 0) m = next++;
  Positions v(next, 3);
  for (Eigen::Index i = 0; i < vertices.rows(); ++i)
    if (map[i] >= 0) v.row(map[i]) = vertices.row(i);
  FaceArray f(faces.rows(), 3);
  for (Eigen::Index j = 0; j < faces.rows(); ++j)
    for (int c = 0; c < 3; ++c) f(j, c) = map[faces(j, c)];
  if (old_to_new) *old_to_new = std::move(map);
  return Mesh(std::move(v), std::move(f));
}

}  // namespace meshprior
