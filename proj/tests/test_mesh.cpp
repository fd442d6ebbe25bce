// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "core/closest_point.hpp"
#include "core/error.hpp"
#include "core/fixtures.hpp"
#include "core/mesh.hpp"
#include "core/mesh_edit.hpp"
#include "core/mesh_io.hpp"
#include "support/generators.hpp"

using namespace meshprior;
using namespace meshprior::testing;

namespace {

Mesh tetrahedron() {
  Positions v(4, 3);
  v << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  FaceArray f(4, 3);
  f << 0, 2, 1, 0, 1, 3, 0, 3, 2, 1, 2, 3;
  return Mesh(v, f);
}

// Closest point by dense barycentric sampling; an upper bound on the true
// distance that converges as the grid refines.
double sampled_distance(const Vec3& p, const std::array<Vec3, 3>& t, int n) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j) {
      const double a = static_cast<double>(i) / n;
      const double b = static_cast<double>(j) / n;
      const Vec3 q = t[0] + a * (t[1] - t[0]) + b * (t[2] - t[0]);
      best = std::min(best, (q - p).norm());
    }
  return best;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("meshprior_test_" + name);
}

}  // namespace

TEST_CASE("tetrahedron topology") {
  const Mesh m = tetrahedron();
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_faces() == 4);
  CHECK(m.num_edges() == 6);
  CHECK(m.is_closed());
  CHECK_FALSE(m.has_nonmanifold_edges());
  for (int v = 0; v < 4; ++v) {
    auto n = m.neighbors(v);
    CHECK(n.size() == 3);
    CHECK(std::is_sorted(n.begin(), n.end()));
  }
  CHECK(m.find_edge(0, 3) >= 0);
  CHECK(m.face_neighbors(0).size() == 3);
  CHECK(boundary_loops(m).empty());
}

TEST_CASE("invalid faces are rejected") {
  Positions v(3, 3);
  v << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  FaceArray bad_index(1, 3);
  bad_index << 0, 1, 3;
  CHECK_THROWS_AS(Mesh(v, bad_index), Error);
  FaceArray repeated(1, 3);
  repeated << 0, 1, 1;
  CHECK_THROWS_AS(Mesh(v, repeated), Error);
}

TEST_CASE("geodesic spheres have Euler characteristic 2 and 10f^2+2 vertices") {
  for (int f = 1; f <= 6; ++f) {
    const Mesh m = geodesic_sphere(f);
    CHECK(m.num_vertices() == 10 * f * f + 2);
    CHECK(m.num_vertices() - m.num_edges() + m.num_faces() == 2);
    CHECK(m.is_closed());
  }
  CHECK(icosphere(4).num_vertices() == 2562);
  CHECK(uv_sphere(6, 8).num_vertices() == 50);
}

TEST_CASE("plane grid has one boundary loop around its rim") {
  const Mesh g = plane_grid(4, 3);
  const auto loops = boundary_loops(g);
  REQUIRE(loops.size() == 1);
  CHECK(loops[0].size() == 2 * (4 + 3));
}

TEST_CASE("fixtures: cap hole is a single loop and the ground truth is closed") {
  const Fixture fx = make_fixture("sphere-cap");
  CHECK(fx.ground_truth.num_vertices() == 2562);
  CHECK(fx.ground_truth.is_closed());
  CHECK(boundary_loops(fx.damaged).size() == 1);
  const Fixture cube = make_fixture("cube-edge-hole");
  CHECK(boundary_loops(cube.damaged).size() == 1);
  CHECK_THROWS_AS(make_fixture("no-such-fixture"), Error);
}

TEST_CASE("k-rings on the icosahedron") {
  const Mesh m = geodesic_sphere(1);
  CHECK(k_ring(m, 0, 0) == std::vector<int>{0});
  CHECK(k_ring(m, 0, 1).size() == 6);
  CHECK(k_ring(m, 0, 2).size() == 11);
  CHECK(k_ring(m, 0, 3).size() == 12);
}

TEST_CASE("property: face normals are unit and point outward on spheres") {
  Rng rng(11);
  for (int c = 0; c < kCases; ++c) {
    const Mesh m = random_sphere(rng);
    const Positions n = face_normals(m);
    const Positions centroids = face_centroids(m.vertices(), m.faces());
    for (int j = 0; j < m.num_faces(); ++j) {
      CHECK(n.row(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(n.row(j).dot(centroids.row(j)) > 0);
    }
  }
}

TEST_CASE("property: uniform Laplacian annihilates constants and rigid translation") {
  Rng rng(12);
  for (int c = 0; c < kCases; ++c) {
    const Mesh m = random_sphere(rng);
    const SparseMatrix L = uniform_laplacian(m);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.num_vertices());
    CHECK((L * ones).cwiseAbs().maxCoeff() < 1e-12);
    const Vec3 t = random_point(rng, 5.0);
    const Positions moved = m.vertices().rowwise() + t.transpose();
    CHECK((L * moved - L * m.vertices()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("property: mesh measures are invariant under rigid motion") {
  Rng rng(13);
  for (int c = 0; c < kCases; ++c) {
    const Mesh m = random_sphere(rng);
    const Mesh moved = m.with_vertices(rigid_motion(m.vertices(), random_rotation(rng), random_point(rng, 3.0)));
    CHECK(bbox_diagonal(moved) > 0);
    CHECK(mean_edge_length(moved) == doctest::Approx(mean_edge_length(m)).epsilon(1e-12));
    const auto a0 = face_areas(m.vertices(), m.faces());
    const auto a1 = face_areas(moved.vertices(), moved.faces());
    CHECK((a0 - a1).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("property: closest point on a triangle beats dense sampling") {
  Rng rng(14);
  for (int c = 0; c < 200; ++c) {
    const auto t = random_triangle(rng);
    const Vec3 p = random_point(rng, 2.0);
    const Vec3 q = closest_point_on_triangle(p, t[0], t[1], t[2]);
    const double d = (q - p).norm();
    // q lies in the triangle: barycentric coordinates in [0, 1].
    Eigen::Matrix<double, 3, 2> e;
    e.col(0) = t[1] - t[0];
    e.col(1) = t[2] - t[0];
    const Eigen::Vector2d ab = e.colPivHouseholderQr().solve(q - t[0]);
    CHECK((e * ab + t[0] - q).norm() < 1e-9);
    CHECK(ab.minCoeff() > -1e-9);
    CHECK(ab.sum() < 1 + 1e-9);
    const double sampled = sampled_distance(p, t, 60);
    CHECK(d <= sampled + 1e-12);
    CHECK(d >= sampled - 0.05);
  }
}

TEST_CASE("property: BVH closest point agrees with exhaustive search") {
  Rng rng(15);
  for (int c = 0; c < 10; ++c) {
    const Mesh m = random_sphere(rng, 2, 5);
    const TriangleBvh bvh(m);
    for (int s = 0; s < 50; ++s) {
      const Vec3 p = random_point(rng, 1.5);
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < m.num_faces(); ++j) {
        const auto f = m.face(j);
        best = std::min(best, (closest_point_on_triangle(p, m.position(f[0]), m.position(f[1]), m.position(f[2])) - p).norm());
      }
      const ClosestPoint cp = bvh.closest(p);
      CHECK(cp.distance == doctest::Approx(best).epsilon(1e-12));
      // Inside the sphere the signed distance is negative.
      if (p.norm() < 0.5) CHECK(bvh.signed_distance(p) < 0);
      if (p.norm() > 1.2) CHECK(bvh.signed_distance(p) > 0);
    }
  }
}

TEST_CASE("OBJ and PLY round trips are exact") {
  Rng rng(16);
  const Mesh m = random_sphere(rng, 2, 2);
  for (const char* ext : {".obj", ".ply"}) {
    const auto path = temp_path(std::string("roundtrip") + ext);
    save_mesh(m, path.string());
    const Mesh back = load_mesh(path.string());
    CHECK(back.vertices() == m.vertices());
    CHECK(back.faces() == m.faces());
    std::filesystem::remove(path);
  }
  const std::string bytes = encode_ply(m);
  CHECK(decode_ply(bytes).vertices() == m.vertices());
}

TEST_CASE("coloured PLY maps zero to white and extremes to blue and red") {
  CHECK(signed_colormap(0.0, 1.0) == std::array<unsigned char, 3>{255, 255, 255});
  const auto lo = signed_colormap(-1.0, 1.0);
  const auto hi = signed_colormap(1.0, 1.0);
  CHECK(lo[2] > lo[0]);
  CHECK(hi[0] > hi[2]);
  const Mesh m = tetrahedron();
  Eigen::VectorXd s(4);
  s << -1, 0, 0.5, 1;
  CHECK(encode_ply(m, &s).find("property uchar red") != std::string::npos);
  Eigen::VectorXd wrong(3);
  CHECK_THROWS_AS(encode_ply(m, &wrong), Error);
}

TEST_CASE("mesh readers reject malformed input") {
  CHECK_THROWS_AS(decode_ply("not a ply file\n"), Error);
  CHECK_THROWS_AS(decode_ply("ply\nformat ascii 1.0\nelement vertex 3\n"), Error);
  CHECK_THROWS_AS(load_mesh("/nonexistent/mesh.obj"), Error);
  CHECK_THROWS_AS(save_mesh(tetrahedron(), temp_path("bad.xyz").string()), Error);

  const auto path = temp_path("bad.obj");
  {
    std::ofstream out(path);
    out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 7\n";
  }
  try {
    load_mesh(path.string());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Data);
  }
  {
    std::ofstream out(path);
    out << "v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n";
  }
  try {
    load_mesh(path.string());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Degenerate);
  }
  std::filesystem::remove(path);
}

TEST_CASE("OBJ polygons are fan-triangulated") {
  const auto path = temp_path("quad.obj");
  {
    std::ofstream out(path);
    out << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3 4/4/4\n";
  }
  const Mesh m = load_mesh(path.string());
  CHECK(m.num_faces() == 2);
  CHECK(face_areas(m.vertices(), m.faces()).sum() == doctest::Approx(1.0));
  std::filesystem::remove(path);
}

TEST_CASE("editable mesh: split, flip and collapse keep a closed manifold") {
  const Mesh start = geodesic_sphere(2);
  EditableMesh e(start);
  const auto edges = e.edges();
  REQUIRE(!edges.empty());
  const auto [a, b] = edges[0];
  const int v = e.split(a, b, 0.5 * (e.position(a) + e.position(b)));
  CHECK(e.valence(v) == 4);
  Mesh m = e.to_mesh();
  CHECK(m.is_closed());
  CHECK(m.num_vertices() == start.num_vertices() + 1);
  CHECK(m.num_faces() == start.num_faces() + 2);

  EditableMesh f(start);
  const auto [c, d] = f.edges()[5];
  CHECK(f.flip(c, d));
  CHECK(f.edge_faces(c, d).empty());
  CHECK(f.to_mesh().is_closed());

  EditableMesh g(start);
  const auto [p, q] = g.edges()[3];
  REQUIRE(g.link_condition(p, q));
  const auto removed = g.collapse(p, q);
  CHECK(removed.size() == 2);
  CHECK_FALSE(g.vertex_alive(q));
  const Mesh collapsed = g.to_mesh();
  CHECK(collapsed.is_closed());
  CHECK(collapsed.num_vertices() - collapsed.num_edges() + collapsed.num_faces() == 2);
}

TEST_CASE("compact drops unreferenced vertices") {
  Positions v(5, 3);
  v << 0, 0, 0, 9, 9, 9, 1, 0, 0, 0, 1, 0, 7, 7, 7;
  FaceArray f(1, 3);
  f << 0, 2, 3;
  std::vector<int> map;
  const Mesh m = compact(v, f, &map);
  CHECK(m.num_vertices() == 3);
  CHECK(map == std::vector<int>{0, -1, 1, 2, -1});
}

TEST_CASE("remove_vertices deletes incident faces") {
  const Mesh m = geodesic_sphere(2);
  const Mesh cut = remove_vertices(m, k_ring(m, 0, 1));
  CHECK(cut.num_vertices() == m.num_vertices() - 6);
  CHECK(boundary_loops(cut).size() == 1);
}
