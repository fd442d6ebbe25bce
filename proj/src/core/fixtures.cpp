// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include "core/error.hpp"

namespace meshprior {

namespace {

// Flips faces whose normal points towards the origin; valid for star-shaped
// fixtures centred at the origin.
void orient_outward(const std::vector<Vec3>& pos, std::vector<std::array<int, 3>>& faces) {
  for (auto& f : faces) {
    const Vec3 n = (pos[f[1]] - pos[f[0]]).cross(pos[f[2]] - pos[f[0]]);
    const Vec3 c = (pos[f[0]] + pos[f[1]] + pos[f[2]]) / 3.0;
    if (n.dot(c) < 0) std::swap(f[1], f[2]);
  }
}

Mesh to_mesh(const std::vector<Vec3>& pos, const std::vector<std::array<int, 3>>& faces) {
  Positions v(static_cast<Eigen::Index>(pos.size()), 3);
  for (size_t i = 0; i < pos.size(); ++i) v.row(static_cast<Eigen::Index>(i)) = pos[i].transpose();
  FaceArray f(static_cast<Eigen::Index>(faces.size()), 3);
  for (size_t j = 0; j < faces.size(); ++j) {
    f.row(static_cast<Eigen::Index>(j)) << faces[j][0], faces[j][1], faces[j][2];
  }
  return Mesh(std::move(v), std::move(f));
}

}  // namespace

Mesh geodesic_sphere(int frequency) {
  if (frequency < 1) throw Error(ErrorCode::Argument, "geodesic_sphere: frequency must be >= 1");
  const double phi = std::numbers::phi;
  const std::array<Vec3, 12> ico = {
      Vec3(-1, phi, 0), Vec3(1, phi, 0),   Vec3(-1, -phi, 0), Vec3(1, -phi, 0),
      Vec3(0, -1, phi), Vec3(0, 1, phi),   Vec3(0, -1, -phi), Vec3(0, 1, -phi),
      Vec3(phi, 0, -1), Vec3(phi, 0, 1),   Vec3(-phi, 0, -1), Vec3(-phi, 0, 1)};
  const int tri[20][3] = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                          {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                          {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                          {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  const int n = frequency;
  std::vector<Vec3> pos;
  std::map<std::array<int, 6>, int> index;
  auto vertex = [&](const int ids[3], int wa, int wb, int wc) {
    std::array<std::pair<int, int>, 3> terms{{{ids[0], wa}, {ids[1], wb}, {ids[2], wc}}};
    std::sort(terms.begin(), terms.end());
    std::array<int, 6> key{};
    int k = 0;
    for (const auto& [id, w] : terms) {
      if (w == 0) continue;
      key[k++] = id;
      key[k++] = w;
    }
    for (; k < 6; ++k) key[k] = -1;
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const Vec3 p = (wa * ico[ids[0]] + wb * ico[ids[1]] + wc * ico[ids[2]]) / static_cast<double>(n);
    const int id = static_cast<int>(pos.size());
    pos.push_back(p.normalized());
    index.emplace(key, id);
    return id;
  };

  std::vector<std::array<int, 3>> faces;
  for (const auto& t : tri) {
    auto at = [&](int i, int j) { return vertex(t, n - i - j, i, j); };
    for (int i = 0; i < n; ++i) {
      for (int j = 0; i + j < n; ++j) {
        faces.push_back({at(i, j), at(i + 1, j), at(i, j + 1)});
        if (i + j < n - 1) faces.push_back({at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
      }
    }
  }
  orient_outward(pos, faces);
  return to_mesh(pos, faces);
}

Mesh icosphere(int subdivisions) { return geodesic_sphere(1 << subdivisions); }

Mesh uv_sphere(int rings, int segments) {
  if (rings < 1 || segments < 3) throw Error(ErrorCode::Argument, "uv_sphere: need rings >= 1, segments >= 3");
  std::vector<Vec3> pos;
  pos.emplace_back(0, 0, 1);
  for (int r = 1; r <= rings; ++r) {
    const double theta = std::numbers::pi * r / (rings + 1);
    for (int s = 0; s < segments; ++s) {
      const double ph = 2 * std::numbers::pi * s / segments;
      pos.emplace_back(std::sin(theta) * std::cos(ph), std::sin(theta) * std::sin(ph), std::cos(theta));
    }
  }
  pos.emplace_back(0, 0, -1);
  const int south = static_cast<int>(pos.size()) - 1;
  auto ring = [&](int r, int s) { return 1 + (r - 1) * segments + (s % segments); };
  std::vector<std::array<int, 3>> faces;
  for (int s = 0; s < segments; ++s) faces.push_back({0, ring(1, s), ring(1, s + 1)});
  for (int r = 1; r < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      faces.push_back({ring(r, s), ring(r + 1, s), ring(r + 1, s + 1)});
      faces.push_back({ring(r, s), ring(r + 1, s + 1), ring(r, s + 1)});
    }
  }
  for (int s = 0; s < segments; ++s) faces.push_back({south, ring(rings, s + 1), ring(rings, s)});
  orient_outward(pos, faces);
  return to_mesh(pos, faces);
}

Mesh subdivided_cube(int n, double edge) {
  if (n < 1) throw Error(ErrorCode::Argument, "subdivided_cube: n must be >= 1");
  std::vector<Vec3> pos;
  std::map<std::array<int, 3>, int> index;
  auto vertex = [&](std::array<int, 3> g) {
    auto it = index.find(g);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(pos.size());
    pos.emplace_back((g[0] / double(n) - 0.5) * edge, (g[1] / double(n) - 0.5) * edge,
                     (g[2] / double(n) - 0.5) * edge);
    index.emplace(g, id);
    return id;
  };
  std::vector<std::array<int, 3>> faces;
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3;
    const int w = (axis + 2) % 3;
    for (int side : {0, n}) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          auto g = [&](int a, int b) {
            std::array<int, 3> c{};
            c[axis] = side;
            c[u] = a;
            c[w] = b;
            return vertex(c);
          };
          const int v00 = g(i, j), v10 = g(i + 1, j), v11 = g(i + 1, j + 1), v01 = g(i, j + 1);
          faces.push_back({v00, v10, v11});
          faces.push_back({v00, v11, v01});
        }
      }
    }
  }
  orient_outward(pos, faces);
  return to_mesh(pos, faces);
}

Mesh plane_grid(int nx, int ny) {
  if (nx < 1 || ny < 1) throw Error(ErrorCode::Argument, "plane_grid: need nx, ny >= 1");
  std::vector<Vec3> pos;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) pos.emplace_back(i, j, 0);
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> faces;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return to_mesh(pos, faces);
}

Mesh remove_vertices(const Mesh& mesh, const std::vector<int>& vertices) {
  std::vector<char> gone(mesh.num_vertices(), 0);
  for (int v : vertices) gone[v] = 1;
  std::vector<int> keep;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto t = mesh.face(f);
    if (!gone[t[0]] && !gone[t[1]] && !gone[t[2]]) keep.push_back(f);
  }
  FaceArray faces(static_cast<Eigen::Index>(keep.size()), 3);
  for (size_t j = 0; j < keep.size(); ++j) faces.row(static_cast<Eigen::Index>(j)) = mesh.faces().row(keep[j]);
  return compact(mesh.vertices(), faces);
}

Fixture make_fixture(const std::string& name) {
  if (name == "sphere-cap") {
    Mesh gt = icosphere(4);
    int seed = 0;
    double best = 1e9;
    for (int i = 0; i < gt.num_vertices(); ++i) {
      const double d = (gt.position(i) - Vec3(0, 0, 1)).norm();
      if (d < best) {
        best = d;
        seed = i;
      }
    }
    return {remove_vertices(gt, k_ring(gt, seed, 4)), gt};
  }
  if (name == "cube-edge-hole") {
    Mesh gt = subdivided_cube(12);
    const Vec3 centre(0.5, 0.5, 0.0);
    std::vector<int> cut;
    for (int i = 0; i < gt.num_vertices(); ++i)
      if ((gt.position(i) - centre).norm() < 0.25) cut.push_back(i);
    return {remove_vertices(gt, cut), gt};
  }
  if (name == "plane-grid") {
    Mesh grid = plane_grid(10, 10);
    return {grid, grid};
  }
  if (name == "sphere-50") {
    Mesh s = uv_sphere(6, 8);
    return {s, s};
  }
  throw Error(ErrorCode::Argument, "unknown fixture '" + name + "'");
}

std::vector<std::string> fixture_names() { return {"sphere-cap", "cube-edge-hole", "plane-grid", "sphere-50"}; }

}  // namespace meshprior
