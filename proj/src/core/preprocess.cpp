// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "core/closest_point.hpp"
#include "core/error.hpp"
#include "core/mesh_edit.hpp"

namespace meshprior {

Flags face_mask_from_vertices(const Mesh& mesh, std::span<const std::uint8_t> vertex_mask) {
  Flags out(mesh.num_faces(), 1);
  for (int j = 0; j < mesh.num_faces(); ++j) {
    const auto f = mesh.face(j);
    out[j] = vertex_mask[f[0]] & vertex_mask[f[1]] & vertex_mask[f[2]];
  }
  return out;
}

HoleMask HoleMask::from_real(const Mesh& mesh, Flags real_vertex) {
  if (static_cast<int>(real_vertex.size()) != mesh.num_vertices()) {
    throw Error(ErrorCode::Argument, "hole mask size does not match vertex count");
  }
  HoleMask m;
  m.real_face = face_mask_from_vertices(mesh, real_vertex);
  m.real_vertex = std::move(real_vertex);
  m.fake_vertex.assign(mesh.num_vertices(), 1);
  m.fake_face.assign(mesh.num_faces(), 1);
  return m;
}

HoleMask HoleMask::with_fake(const Mesh& mesh, Flags fake) const {
  if (static_cast<int>(fake.size()) != mesh.num_vertices()) {
    throw Error(ErrorCode::Argument, "fake mask size does not match vertex count");
  }
  HoleMask m = *this;
  m.fake_face = face_mask_from_vertices(mesh, fake);
  m.fake_vertex = std::move(fake);
  return m;
}

Flags HoleMask::vertex_mask() const {
  Flags out(real_vertex.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = real_vertex[i] & fake_vertex[i];
  return out;
}

Flags HoleMask::face_mask() const {
  Flags out(real_face.size());
  for (size_t j = 0; j < out.size(); ++j) out[j] = real_face[j] & fake_face[j];
  return out;
}

double HoleMask::masked_fraction() const {
  if (real_vertex.empty()) return 0.0;
  size_t masked = 0;
  for (size_t i = 0; i < real_vertex.size(); ++i) masked += (real_vertex[i] & fake_vertex[i]) ? 0 : 1;
  return static_cast<double>(masked) / static_cast<double>(real_vertex.size());
}

// ---------------------------------------------------------------------------
// Hole filling

std::vector<std::array<int, 3>> min_area_triangulation(const Positions& x, const std::vector<int>& loop,
                                                       const std::vector<std::array<int, 2>>& forbidden) {
  const int n = static_cast<int>(loop.size());
  if (n < 3) return {};
  if (n == 3) return {{loop[0], loop[1], loop[2]}};

  std::vector<char> allowed(static_cast<size_t>(n) * n, 1);
  auto at = [n](int i, int j) { return static_cast<size_t>(i) * n + j; };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      bool ok = loop[i] != loop[j];
      const std::array<int, 2> key{std::min(loop[i], loop[j]), std::max(loop[i], loop[j])};
      if (ok && std::binary_search(forbidden.begin(), forbidden.end(), key)) ok = false;
      allowed[at(i, j)] = ok;
    }
  }

  auto tri_area = [&](int i, int m, int j, double& quality) {
    const Vec3 a = x.row(loop[i]);
    const Vec3 b = x.row(loop[m]);
    const Vec3 c = x.row(loop[j]);
    const double area = 0.5 * (b - a).cross(c - a).norm();
    const double longest = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
    quality = longest > 0 ? area / longest : 0.0;
    return area;
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(static_cast<size_t>(n) * n, inf);
  std::vector<int> split(static_cast<size_t>(n) * n, -1);
  for (int i = 0; i + 1 < n; ++i) cost[at(i, i + 1)] = 0.0;
  for (int gap = 2; gap < n; ++gap) {
    for (int i = 0; i + gap < n; ++i) {
      const int j = i + gap;
      if (gap < n - 1 && !allowed[at(i, j)]) continue;
      double best = inf;
      int best_m = -1;
      for (int m = i + 1; m < j; ++m) {
        const double left = cost[at(i, m)];
        const double right = cost[at(m, j)];
        if (left == inf || right == inf) continue;
        if (loop[i] == loop[m] || loop[m] == loop[j] || loop[i] == loop[j]) continue;
        double quality = 0.0;
        const double area = tri_area(i, m, j, quality);
        if (quality < 1e-8) continue;
        const double c = left + right + area;
        if (c < best) {
          best = c;
          best_m = m;
        }
      }
      cost[at(i, j)] = best;
      split[at(i, j)] = best_m;
    }
  }
  if (cost[at(0, n - 1)] == inf) return {};

  std::vector<std::array<int, 3>> tris;
  std::vector<std::array<int, 2>> stack{{0, n - 1}};
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    if (j - i < 2) continue;
    const int m = split[at(i, j)];
    tris.push_back({loop[i], loop[m], loop[j]});
    stack.push_back({i, m});
    stack.push_back({m, j});
  }
  return tris;
}

FillResult fill_holes_watertight(const Mesh& input) {
  if (input.has_nonmanifold_edges()) {
    throw Error(ErrorCode::Structure, "cannot fill holes: mesh has non-manifold edges");
  }
  FillResult result;

  Mesh mesh = input;
  std::vector<int> labels;
  const int ncomp = face_components(input, labels);
  if (ncomp > 1) {
    std::vector<int> size(ncomp, 0);
    for (int l : labels) ++size[l];
    const int keep = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
    std::vector<int> kept;
    for (int f = 0; f < input.num_faces(); ++f)
      if (labels[f] == keep) kept.push_back(f);
    FaceArray faces(static_cast<Eigen::Index>(kept.size()), 3);
    for (size_t j = 0; j < kept.size(); ++j) faces.row(static_cast<Eigen::Index>(j)) = input.faces().row(kept[j]);
    mesh = compact(input.vertices(), faces);
    result.components_dropped = ncomp - 1;
  } else if (input.num_faces() > 0) {
    // Drop unreferenced vertices.
    mesh = compact(input.vertices(), input.faces());
  }

  const auto loops = boundary_loops(mesh);
  std::vector<Vec3> extra_vertices;
  std::vector<std::array<int, 3>> new_faces;
  std::vector<std::array<int, 2>> existing;
  existing.reserve(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) existing.push_back({mesh.edge(e).v0, mesh.edge(e).v1});
  std::sort(existing.begin(), existing.end());

  for (const auto& loop : loops) {
    auto tris = loop.size() <= 1500 ? min_area_triangulation(mesh.vertices(), loop, existing)
                                    : std::vector<std::array<int, 3>>{};
    if (tris.empty()) {
      // Fan around the loop centroid.
      Vec3 c = Vec3::Zero();
      for (int v : loop) c += mesh.position(v);
      c /= static_cast<double>(loop.size());
      const int cid = mesh.num_vertices() + static_cast<int>(extra_vertices.size());
      extra_vertices.push_back(c);
      for (size_t i = 0; i < loop.size(); ++i) tris.push_back({loop[i], loop[(i + 1) % loop.size()], cid});
    }
    for (const auto& t : tris) {
      new_faces.push_back(t);
      for (int c = 0; c < 3; ++c) {
        const int a = t[c];
        const int b = t[(c + 1) % 3];
        const std::array<int, 2> key{std::min(a, b), std::max(a, b)};
        existing.insert(std::upper_bound(existing.begin(), existing.end(), key), key);
      }
    }
  }

  Positions x(mesh.num_vertices() + static_cast<Eigen::Index>(extra_vertices.size()), 3);
  x.topRows(mesh.num_vertices()) = mesh.vertices();
  for (size_t i = 0; i < extra_vertices.size(); ++i) {
    x.row(mesh.num_vertices() + static_cast<Eigen::Index>(i)) = extra_vertices[i].transpose();
  }
  FaceArray f(mesh.num_faces() + static_cast<Eigen::Index>(new_faces.size()), 3);
  f.topRows(mesh.num_faces()) = mesh.faces();
  for (size_t j = 0; j < new_faces.size(); ++j) {
    f.row(mesh.num_faces() + static_cast<Eigen::Index>(j)) << new_faces[j][0], new_faces[j][1], new_faces[j][2];
  }
  result.inserted_faces.assign(f.rows(), 0);
  for (Eigen::Index j = mesh.num_faces(); j < f.rows(); ++j) result.inserted_faces[j] = 1;
  result.mesh = Mesh(std::move(x), std::move(f));
  result.loops_filled = static_cast<int>(loops.size());
  if (!result.mesh.is_closed()) {
    throw Error(ErrorCode::Structure, "hole filling did not produce a closed manifold");
  }
  return result;
}

// ---------------------------------------------------------------------------
// Remeshing

namespace {

class Remesher {
 public:
  Remesher(const Mesh& mesh, std::span<const std::uint8_t> inserted, const RemeshOptions& opt)
      : em_(mesh), reference_(mesh), target_(opt.target_edge_length) {
    face_inserted_.assign(inserted.begin(), inserted.end());
    vert_inserted_.assign(mesh.num_vertices(), 0);
    feature_.resize(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      auto fs = mesh.vertex_faces(v);
      bool all = !fs.empty();
      for (int f : fs) all = all && inserted[f];
      vert_inserted_[v] = all ? 1 : 0;
    }
    const double cos_limit = std::cos(opt.feature_angle_deg * std::numbers::pi / 180.0);
    const Positions n = face_normals_unchecked(mesh.vertices(), mesh.faces());
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const Edge& ed = mesh.edge(e);
      if (ed.face_count != 2 || inserted[ed.f0] || inserted[ed.f1]) continue;
      if (n.row(ed.f0).dot(n.row(ed.f1)) < cos_limit) add_feature(ed.v0, ed.v1);
    }
  }

  void run(int iterations) {
    for (int it = 0; it < iterations; ++it) {
      split_long_edges();
      collapse_short_edges();
      equalize_valences();
      relax();
    }
  }

  RemeshResult result() const {
    std::vector<int> vmap, fmap;
    RemeshResult r;
    r.mesh = em_.to_mesh(&vmap, &fmap);
    r.inserted_faces.assign(r.mesh.num_faces(), 0);
    r.inserted_vertices.assign(r.mesh.num_vertices(), 0);
    for (size_t f = 0; f < fmap.size(); ++f)
      if (fmap[f] >= 0) r.inserted_faces[fmap[f]] = face_inserted_[f];
    for (size_t v = 0; v < vmap.size(); ++v)
      if (vmap[v] >= 0) r.inserted_vertices[vmap[v]] = vert_inserted_[v];
    return r;
  }

 private:
  bool is_feature(int a, int b) const {
    const auto& l = feature_[a];
    return std::find(l.begin(), l.end(), b) != l.end();
  }
  void add_feature(int a, int b) {
    if (is_feature(a, b)) return;
    feature_[a].push_back(b);
    feature_[b].push_back(a);
  }
  void remove_feature(int a, int b) {
    auto& la = feature_[a];
    la.erase(std::remove(la.begin(), la.end(), b), la.end());
    auto& lb = feature_[b];
    lb.erase(std::remove(lb.begin(), lb.end(), a), lb.end());
  }
  int feature_degree(int v) const { return static_cast<int>(feature_[v].size()); }
  bool is_corner(int v) const { return feature_degree(v) == 1 || feature_degree(v) >= 3; }

  double length(int a, int b) const { return (em_.position(a) - em_.position(b)).norm(); }

  void split_long_edges() {
    const double hi = 4.0 / 3.0 * target_;
    for (int pass = 0; pass < 16; ++pass) {
      bool changed = false;
      for (const auto& [a, b] : em_.edges()) {
        if (length(a, b) <= hi) continue;
        const auto fs = em_.edge_faces(a, b);
        bool all_inserted = !fs.empty();
        for (int f : fs) all_inserted = all_inserted && face_inserted_[f];
        const bool feature = is_feature(a, b);
        std::vector<std::array<int, 2>> pairs;
        const int m = em_.split(a, b, 0.5 * (em_.position(a) + em_.position(b)), &pairs);
        vert_inserted_.push_back(all_inserted ? 1 : 0);
        feature_.emplace_back();
        face_inserted_.resize(em_.num_face_slots(), 0);
        for (const auto& [f, g] : pairs) face_inserted_[g] = face_inserted_[f];
        if (feature) {
          remove_feature(a, b);
          add_feature(a, m);
          add_feature(m, b);
        }
        changed = true;
      }
      if (!changed) break;
    }
  }

  bool removable(int v, int other) const {
    if (is_corner(v)) return false;
    if (feature_degree(v) == 2) return is_feature(v, other);
    return true;
  }

  bool collapse_ok(int kept, int removed) const {
    const double hi = 4.0 / 3.0 * target_;
    if (em_.num_live_vertices() <= 4) return false;
    if (!em_.link_condition(kept, removed)) return false;
    const auto fs = em_.edge_faces(kept, removed);
    if (fs.size() != 2) return false;
    for (int f : fs) {
      if (em_.valence(em_.opposite(f, kept, removed)) - 1 < 3) return false;
    }
    if (em_.valence(kept) + em_.valence(removed) - 4 < 3) return false;
    const Vec3 p = em_.position(kept);
    for (int x : em_.one_ring(removed)) {
      if (x != kept && (p - em_.position(x)).norm() > hi) return false;
    }
    for (int f : em_.vertex_faces(removed)) {
      const auto& t = em_.face(f);
      if (t[0] == kept || t[1] == kept || t[2] == kept) continue;
      Vec3 q[3];
      for (int c = 0; c < 3; ++c) q[c] = t[c] == removed ? p : em_.position(t[c]);
      const Vec3 cr = (q[1] - q[0]).cross(q[2] - q[0]);
      const double len = cr.norm();
      if (!(len > 1e-14 * target_ * target_)) return false;
      if ((cr / len).dot(em_.face_normal(f)) < 0.5) return false;
    }
    return true;
  }

  void collapse_short_edges() {
    const double lo = 0.8 * target_;
    auto edges = em_.edges();
    std::stable_sort(edges.begin(), edges.end(),
                     [&](const auto& e1, const auto& e2) { return length(e1[0], e1[1]) < length(e2[0], e2[1]); });
    for (const auto& [a, b] : edges) {
      if (!em_.vertex_alive(a) || !em_.vertex_alive(b)) continue;
      if (em_.edge_faces(a, b).empty()) continue;
      if (length(a, b) >= lo) continue;
      int kept = -1, removed = -1;
      if (removable(b, a) && collapse_ok(a, b)) {
        kept = a;
        removed = b;
      } else if (removable(a, b) && collapse_ok(b, a)) {
        kept = b;
        removed = a;
      }
      if (kept < 0) continue;
      const std::vector<int> moved_features = feature_[removed];
      for (int x : moved_features) remove_feature(removed, x);
      for (int x : moved_features)
        if (x != kept) add_feature(kept, x);
      vert_inserted_[kept] |= vert_inserted_[removed];
      em_.collapse(kept, removed);
    }
  }

  void equalize_valences() {
    for (const auto& [a, b] : em_.edges()) {
      if (is_feature(a, b)) continue;
      const auto fs = em_.edge_faces(a, b);
      if (fs.size() != 2) continue;
      if (face_inserted_[fs[0]] != face_inserted_[fs[1]]) continue;
      const int c = em_.opposite(fs[0], a, b);
      const int d = em_.opposite(fs[1], a, b);
      const int va = em_.valence(a), vb = em_.valence(b), vc = em_.valence(c), vd = em_.valence(d);
      if (va - 1 < 3 || vb - 1 < 3) continue;
      const int before = std::abs(va - 6) + std::abs(vb - 6) + std::abs(vc - 6) + std::abs(vd - 6);
      const int after = std::abs(va - 7) + std::abs(vb - 7) + std::abs(vc - 5) + std::abs(vd - 5);
      if (after >= before) continue;
      const Vec3 pa = em_.position(a), pb = em_.position(b), pc = em_.position(c), pd = em_.position(d);
      const Vec3 n0 = (pd - pa).cross(pc - pa);
      const Vec3 n1 = (pb - pd).cross(pc - pd);
      if (n0.norm() < 1e-14 * target_ * target_ || n1.norm() < 1e-14 * target_ * target_) continue;
      const Vec3 old = em_.face_normal(fs[0]) + em_.face_normal(fs[1]);
      if (n0.normalized().dot(n1.normalized()) < 0.5) continue;
      if (n0.normalized().dot(old.normalized()) < 0.5 || n1.normalized().dot(old.normalized()) < 0.5) continue;
      em_.flip(a, b);
    }
  }

  void relax() {
    const int n = em_.num_vertex_slots();
    std::vector<Vec3> normal(n, Vec3::Zero());
    for (int f = 0; f < em_.num_face_slots(); ++f) {
      if (!em_.face_alive(f)) continue;
      const auto& t = em_.face(f);
      const Vec3 c = (em_.position(t[1]) - em_.position(t[0])).cross(em_.position(t[2]) - em_.position(t[0]));
      for (int v : t) normal[v] += c;
    }
    std::vector<Vec3> next(n);
    for (int v = 0; v < n; ++v) {
      next[v] = em_.vertex_alive(v) ? em_.position(v) : Vec3::Zero();
      if (!em_.vertex_alive(v) || feature_degree(v) > 0) continue;
      const auto ring = em_.one_ring(v);
      if (ring.empty()) continue;
      Vec3 q = Vec3::Zero();
      for (int w : ring) q += em_.position(w);
      q /= static_cast<double>(ring.size());
      Vec3 u = q - em_.position(v);
      const double nn = normal[v].norm();
      if (nn > 0) {
        const Vec3 nv = normal[v] / nn;
        u -= nv * nv.dot(u);
      }
      next[v] = reference_.closest(em_.position(v) + 0.5 * u).point;
    }
    for (int v = 0; v < n; ++v)
      if (em_.vertex_alive(v)) em_.set_position(v, next[v]);
  }

  EditableMesh em_;
  TriangleBvh reference_;
  double target_;
  Flags face_inserted_;
  Flags vert_inserted_;
  std::vector<std::vector<int>> feature_;
};

}  // namespace

RemeshResult isotropic_remesh(const Mesh& mesh, std::span<const std::uint8_t> inserted_faces,
                              const RemeshOptions& options) {
  if (!(options.target_edge_length > 0)) {
    throw Error(ErrorCode::Argument, "isotropic_remesh: target edge length must be positive");
  }
  if (!mesh.is_closed()) throw Error(ErrorCode::Structure, "isotropic_remesh: mesh must be watertight");
  if (static_cast<int>(inserted_faces.size()) != mesh.num_faces()) {
    throw Error(ErrorCode::Argument, "isotropic_remesh: inserted flag count mismatch");
  }
  Remesher r(mesh, inserted_faces, options);
  r.run(options.iterations);
  return r.result();
}

Mesh oversmooth(const Mesh& mesh, int steps) {
  Positions x = mesh.vertices();
  Positions next(x.rows(), 3);
  for (int s = 0; s < steps; ++s) {
    for (int i = 0; i < mesh.num_vertices(); ++i) {
      auto nb = mesh.neighbors(i);
      if (nb.empty()) {
        next.row(i) = x.row(i);
        continue;
      }
      Eigen::RowVector3d acc = Eigen::RowVector3d::Zero();
      for (int j : nb) acc += x.row(j);
      next.row(i) = acc / static_cast<double>(nb.size());
    }
    x.swap(next);
  }
  return mesh.with_vertices(std::move(x));
}

PreprocessResult preprocess(const Mesh& input, const PreprocessConfig& config) {
  FillResult filled = fill_holes_watertight(input);

  double target = config.target_edge_length;
  if (!(target > 0)) {
    double sum = 0.0;
    int count = 0;
    const Mesh& m = filled.mesh;
    for (int e = 0; e < m.num_edges(); ++e) {
      const Edge& ed = m.edge(e);
      if (filled.inserted_faces[ed.f0] || filled.inserted_faces[ed.f1]) continue;
      sum += (m.position(ed.v0) - m.position(ed.v1)).norm();
      ++count;
    }
    target = count > 0 ? sum / count : mean_edge_length(m);
  }

  RemeshOptions ro;
  ro.target_edge_length = target;
  ro.iterations = config.remesh_iterations;
  ro.feature_angle_deg = config.feature_angle_deg;
  RemeshResult remeshed = isotropic_remesh(filled.mesh, filled.inserted_faces, ro);

  PreprocessResult out;
  out.init_mesh = std::move(remeshed.mesh);
  const Mesh& init = out.init_mesh;
  Flags real(init.num_vertices(), 1);
  for (int v = 0; v < init.num_vertices(); ++v) {
    auto fs = init.vertex_faces(v);
    bool all = !fs.empty();
    for (int f : fs) all = all && remeshed.inserted_faces[f];
    if (remeshed.inserted_vertices[v] || all) real[v] = 0;
  }
  out.real_mask = HoleMask::from_real(init, std::move(real));
  out.smooth_mesh = oversmooth(init, config.smooth_steps);
  out.displacement = init.vertices() - out.smooth_mesh.vertices();
  out.hole_loops = filled.loops_filled;
  out.target_edge_length = target;
  return out;
}

}  // namespace meshprior
