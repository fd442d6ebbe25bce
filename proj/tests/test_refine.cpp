// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include "core/error.hpp"
#include "core/fixtures.hpp"
#include "core/refine.hpp"
#include "support/generators.hpp"

using namespace meshprior;
using namespace meshprior::testing;

namespace {

double objective(const Mesh& m, const Positions& x, const Positions& init, const Positions& cmp,
                 const Flags& mask, double mu) {
  const SparseMatrix L = uniform_laplacian(m);
  const Positions mix = build_xmix(init, cmp, mask);
  const std::vector<int> hbar = build_hbar(m, mask);
  Flags in_hbar(m.num_vertices(), 0);
  for (int v : hbar) in_hbar[v] = 1;
  double q = 0.0;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (!in_hbar[v]) q += (x.row(v) - init.row(v)).squaredNorm();
  return 0.5 * (L * (x - mix)).squaredNorm() + 0.5 * mu * q;
}

}  // namespace

TEST_CASE("X_mix takes known rows from the initial mesh") {
  Positions init(3, 3), cmp(3, 3);
  init.setZero();
  cmp.setOnes();
  const Positions mix = build_xmix(init, cmp, Flags{1, 0, 1});
  CHECK(mix.row(0).isZero());
  CHECK(mix.row(1) == Eigen::RowVector3d(1, 1, 1));
  CHECK(mix.row(2).isZero());
}

TEST_CASE("H-bar is the hole plus its one-ring") {
  const Mesh m = geodesic_sphere(2);
  Flags mask(m.num_vertices(), 1);
  mask[0] = 0;
  const std::vector<int> hbar = build_hbar(m, mask);
  std::vector<int> expected = k_ring(m, 0, 1);
  CHECK(hbar == expected);
  CHECK(build_hbar(m, Flags(m.num_vertices(), 1)).empty());
}

TEST_CASE("refinement weights") {
  CHECK(default_mu(MeshType::Cad) > 0);
  CHECK(default_mu(MeshType::NonCad) > 0);
  CHECK(default_mu(MeshType::RealScan) > 0);
  CHECK(named_mu("", MeshType::Cad) == default_mu(MeshType::Cad));
  CHECK(named_mu("unknown-mesh", MeshType::NonCad) == default_mu(MeshType::NonCad));
}

TEST_CASE("property: fixed point when the completion equals the initial mesh") {
  Rng rng(61);
  for (int c = 0; c < kCases; ++c) {
    const Mesh m = random_sphere(rng, 2, 4);
    const Flags mask = random_mask(rng, m.num_vertices(), 0.2);
    RefineOptions o;
    o.mu = uniform(rng, 0.01, 10.0);
    RefineReport rep;
    const Positions out = refine(m, m.vertices(), m.vertices(), mask, o, &rep);
    CHECK((out - m.vertices()).cwiseAbs().maxCoeff() <= 1e-9 * bbox_diagonal(m));
    CHECK(rep.relative_residual <= 1e-8);
  }
}

TEST_CASE("property: the solution minimizes the refinement objective") {
  Rng rng(62);
  for (int c = 0; c < 10; ++c) {
    const Mesh m = random_sphere(rng, 2, 3);
    const Positions init = m.vertices();
    const Positions cmp = init + 0.05 * random_matrix<Positions>(rng, init.rows(), 3);
    const Flags mask = random_mask(rng, m.num_vertices(), 0.25);
    RefineOptions o;
    o.mu = uniform(rng, 0.1, 5.0);
    RefineReport rep;
    const Positions x = refine(m, init, cmp, mask, o, &rep);
    CHECK(rep.relative_residual <= 1e-8);
    CHECK(rep.hbar_size == static_cast<int>(build_hbar(m, mask).size()));
    const double best = objective(m, x, init, cmp, mask, o.mu);
    for (int t = 0; t < 5; ++t) {
      const Positions y = x + 1e-3 * random_matrix<Positions>(rng, x.rows(), 3);
      CHECK(objective(m, y, init, cmp, mask, o.mu) >= best);
    }
  }
}

TEST_CASE("refinement keeps the completion inside holes and restores known vertices") {
  // With X_mix equal to X_init on known rows, X_mix itself zeroes both
  // terms, so the refined hole rows equal the completion.
  Rng rng(63);
  const Mesh m = geodesic_sphere(4);
  const Positions init = m.vertices();
  const Positions cmp = init + 0.05 * random_matrix<Positions>(rng, init.rows(), 3);
  Flags mask(m.num_vertices(), 1);
  for (int v : k_ring(m, 0, 2)) mask[v] = 0;
  RefineOptions o;
  const Positions x = refine(m, init, cmp, mask, o);
  for (int v = 0; v < m.num_vertices(); ++v) {
    const Eigen::RowVector3d expected = mask[v] ? init.row(v) : cmp.row(v);
    CHECK((x.row(v) - expected).norm() < 1e-8);
  }
}

TEST_CASE("refinement rejects mismatched inputs") {
  const Mesh m = geodesic_sphere(2);
  Positions wrong(3, 3);
  wrong.setZero();
  CHECK_THROWS_AS(refine(m, m.vertices(), wrong, Flags(m.num_vertices(), 1), RefineOptions{}), Error);
  RefineOptions bad;
  bad.mu = -1.0;
  CHECK_THROWS_AS(refine(m, m.vertices(), m.vertices(), Flags(m.num_vertices(), 1), bad), Error);
}
