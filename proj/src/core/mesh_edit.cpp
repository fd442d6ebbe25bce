// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/mesh_edit.hpp"

#include <algorithm>

#include "core/error.hpp"

namespace meshprior {

EditableMesh::EditableMesh(const Mesh& mesh) {
  const int nv = mesh.num_vertices();
  const int nf = mesh.num_faces();
  pos_.resize(nv);
  for (int i = 0; i < nv; ++i) pos_[i] = mesh.position(i);
  faces_.resize(nf);
  for (int f = 0; f < nf; ++f) faces_[f] = {mesh.faces()(f, 0), mesh.faces()(f, 1), mesh.faces()(f, 2)};
  vertex_alive_.assign(nv, 1);
  face_alive_.assign(nf, 1);
  vf_.resize(nv);
  for (int v = 0; v < nv; ++v) {
    auto fs = mesh.vertex_faces(v);
    vf_[v].assign(fs.begin(), fs.end());
  }
  live_vertices_ = nv;
}

int EditableMesh::add_vertex(const Vec3& p) {
  pos_.push_back(p);
  vertex_alive_.push_back(1);
  vf_.emplace_back();
  ++live_vertices_;
  return static_cast<int>(pos_.size()) - 1;
}

std::vector<int> EditableMesh::one_ring(int v) const {
  std::vector<int> out;
  out.reserve(vf_[v].size() * 2);
  for (int f : vf_[v]) {
    for (int w : faces_[f])
      if (w != v) out.push_back(w);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> EditableMesh::edge_faces(int a, int b) const {
  std::vector<int> out;
  for (int f : vf_[a]) {
    const auto& t = faces_[f];
    if (t[0] == b || t[1] == b || t[2] == b) out.push_back(f);
  }
  return out;
}

int EditableMesh::opposite(int f, int a, int b) const {
  for (int w : faces_[f])
    if (w != a && w != b) return w;
  return -1;
}

std::vector<std::array<int, 2>> EditableMesh::edges() const {
  std::vector<std::array<int, 2>> out;
  for (int f = 0; f < num_face_slots(); ++f) {
    if (!face_alive_[f]) continue;
    for (int c = 0; c < 3; ++c) {
      const int a = faces_[f][c];
      const int b = faces_[f][(c + 1) % 3];
      out.push_back({std::min(a, b), std::max(a, b)});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Vec3 EditableMesh::face_normal(int f) const {
  const auto& t = faces_[f];
  const Vec3 c = (pos_[t[1]] - pos_[t[0]]).cross(pos_[t[2]] - pos_[t[0]]);
  const double n = c.norm();
  return n > 0 ? Vec3(c / n) : Vec3::Zero();
}

bool EditableMesh::link_condition(int a, int b) const {
  const auto ra = one_ring(a);
  const auto rb = one_ring(b);
  std::vector<int> common;
  std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(common));
  const auto fs = edge_faces(a, b);
  std::vector<int> opp;
  for (int f : fs) opp.push_back(opposite(f, a, b));
  std::sort(opp.begin(), opp.end());
  return common == opp;
}

void EditableMesh::replace_in_face(int f, int from, int to) {
  for (int& w : faces_[f])
    if (w == from) w = to;
}

void EditableMesh::detach_face(int f) {
  for (int w : faces_[f]) {
    auto& l = vf_[w];
    l.erase(std::remove(l.begin(), l.end(), f), l.end());
  }
  face_alive_[f] = 0;
}

std::vector<int> EditableMesh::collapse(int kept, int removed) {
  const auto doomed = edge_faces(kept, removed);
  for (int f : doomed) detach_face(f);
  for (int f : vf_[removed]) {
    replace_in_face(f, removed, kept);
    vf_[kept].push_back(f);
  }
  vf_[removed].clear();
  vertex_alive_[removed] = 0;
  --live_vertices_;
  return doomed;
}

int EditableMesh::split(int a, int b, const Vec3& p, std::vector<std::array<int, 2>>* face_pairs) {
  const auto fs = edge_faces(a, b);
  const int m = add_vertex(p);
  for (int f : fs) {
    auto t = faces_[f];
    int i = 0;
    for (; i < 3; ++i) {
      const int u = t[i];
      const int w = t[(i + 1) % 3];
      if ((u == a && w == b) || (u == b && w == a)) break;
    }
    const int u = t[i];
    const int w = t[(i + 1) % 3];
    const int c = t[(i + 2) % 3];
    faces_[f] = {u, m, c};
    const int g = static_cast<int>(faces_.size());
    faces_.push_back({m, w, c});
    face_alive_.push_back(1);
    auto& lw = vf_[w];
    lw.erase(std::remove(lw.begin(), lw.end(), f), lw.end());
    lw.push_back(g);
    vf_[m].push_back(f);
    vf_[m].push_back(g);
    vf_[c].push_back(g);
    if (face_pairs) face_pairs->push_back({f, g});
  }
  return m;
}

bool EditableMesh::flip(int a, int b) {
  const auto fs = edge_faces(a, b);
  if (fs.size() != 2) return false;
  int f0 = fs[0];
  int f1 = fs[1];
  // Orient so that f0 holds the half-edge a->b.
  auto has_half_edge = [&](int f, int u, int w) {
    const auto& t = faces_[f];
    for (int i = 0; i < 3; ++i)
      if (t[i] == u && t[(i + 1) % 3] == w) return true;
    return false;
  };
  if (!has_half_edge(f0, a, b)) std::swap(f0, f1);
  if (!has_half_edge(f0, a, b) || !has_half_edge(f1, b, a)) return false;
  const int c = opposite(f0, a, b);
  const int d = opposite(f1, a, b);
  if (c == d) return false;
  const auto rc = one_ring(c);
  if (std::binary_search(rc.begin(), rc.end(), d)) return false;

  faces_[f0] = {a, d, c};
  faces_[f1] = {d, b, c};
  auto drop = [&](int v, int f) {
    auto& l = vf_[v];
    l.erase(std::remove(l.begin(), l.end(), f), l.end());
  };
  drop(a, f1);
  drop(b, f0);
  vf_[c].push_back(f1);
  vf_[d].push_back(f0);
  return true;
}

Mesh EditableMesh::to_mesh(std::vector<int>* vertex_map, std::vector<int>* face_map) const {
  std::vector<int> vmap(pos_.size(), -1);
  int nv = 0;
  for (size_t v = 0; v < pos_.size(); ++v)
    if (vertex_alive_[v]) vmap[v] = nv++;
  std::vector<int> fmap(faces_.size(), -1);
  int nf = 0;
  for (size_t f = 0; f < faces_.size(); ++f)
    if (face_alive_[f]) fmap[f] = nf++;
  Positions x(nv, 3);
  for (size_t v = 0; v < pos_.size(); ++v)
    if (vmap[v] >= 0) x.row(vmap[v]) = pos_[v].transpose();
  FaceArray faces(nf, 3);
  for (size_t f = 0; f < faces_.size(); ++f) {
    if (fmap[f] < 0) continue;
    for (int c = 0; c < 3; ++c) {
      const int w = vmap[faces_[f][c]];
      if (w < 0) throw Error(ErrorCode::State, "live face references a deleted vertex");
      faces(fmap[f], c) = w;
    }
  }
  if (vertex_map) *vertex_map = std::move(vmap);
  if (face_map) *face_map = std::move(fmap);
  return Mesh(std::move(x), std::move(faces));
}

}  // namespace meshprior
