// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/refine.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>

#include "core/error.hpp"

namespace meshprior {

Positions build_xmix(const Positions& init, const Positions& cmp, std::span<const std::uint8_t> mask) {
  if (init.rows() != cmp.rows() || static_cast<Eigen::Index>(mask.size()) != init.rows()) {
    throw Error(ErrorCode::Argument, "build_xmix: size mismatch");
  }
  Positions out(init.rows(), 3);
  for (Eigen::Index i = 0; i < init.rows(); ++i) out.row(i) = mask[i] ? init.row(i) : cmp.row(i);
  return out;
}

std::vector<int> build_hbar(const Mesh& mesh, std::span<const std::uint8_t> mask) {
  if (static_cast<int>(mask.size()) != mesh.num_vertices()) throw Error(ErrorCode::Argument, "build_hbar: size mismatch");
  std::vector<int> out;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    bool in = !mask[i];
    for (int j : mesh.neighbors(i)) in = in || !mask[j];
    if (in) out.push_back(i);
  }
  return out;
}

Positions refine(const Mesh& mesh, const Positions& init, const Positions& cmp, std::span<const std::uint8_t> mask,
                 const RefineOptions& options, RefineReport* report) {
  const int n = mesh.num_vertices();
  if (init.rows() != n || cmp.rows() != n) throw Error(ErrorCode::Argument, "refine: position count mismatch");
  if (!(options.mu > 0)) throw Error(ErrorCode::Argument, "refine: mu must be positive");
  if (!mesh.is_closed()) throw Error(ErrorCode::Structure, "refine: mesh must be watertight");

  const Positions xmix = build_xmix(init, cmp, mask);
  const std::vector<int> hbar = build_hbar(mesh, mask);
  if (static_cast<int>(hbar.size()) == n) {
    throw Error(ErrorCode::Numeric, "refine: every vertex lies in a hole or its 1-ring; the solution is not unique");
  }
  Eigen::VectorXd q = Eigen::VectorXd::Ones(n);
  for (int i : hbar) q[i] = 0.0;

  const SparseMatrix lap = uniform_laplacian(mesh);
  const SparseMatrix ltl = SparseMatrix(lap.transpose()) * lap;
  SparseMatrix a = ltl;
  for (int i = 0; i < n; ++i)
    if (q[i] != 0.0) a.coeffRef(i, i) += options.mu * q[i];
  a.makeCompressed();

  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(options.tolerance);
  cg.setMaxIterations(options.max_iterations > 0 ? options.max_iterations : 10 * n);
  cg.compute(a);
  if (cg.info() != Eigen::Success) throw Error(ErrorCode::Numeric, "refine: system setup failed");

  Positions out(n, 3);
  RefineReport rep;
  rep.hbar_size = static_cast<int>(hbar.size());
  for (int c = 0; c < 3; ++c) {
    const Eigen::VectorXd xm = xmix.col(c);
    const Eigen::VectorXd x0 = init.col(c);
    const Eigen::VectorXd b = ltl * xm + options.mu * q.cwiseProduct(x0);
    // Start from the mixed positions: exact when X_cmp = X_init.
    const Eigen::VectorXd x = cg.solveWithGuess(b, xm);
    const double bn = b.norm();
    const double res = (a * x - b).norm() / (bn > 0 ? bn : 1.0);
    rep.iterations = std::max(rep.iterations, static_cast<int>(cg.iterations()));
    rep.relative_residual = std::max(rep.relative_residual, res);
    if (!(res <= options.max_residual)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "refine: solver stopped at relative residual %.3e after %d iterations (coordinate %d)",
                    res, static_cast<int>(cg.iterations()), c);
      throw Error(ErrorCode::Numeric, buf);
    }
    out.col(c) = x;
  }
  if (report) *report = rep;
  return out;
}

double default_mu(MeshType type) { return type == MeshType::Cad ? 0.1 : 1.0; }

double named_mu(const std::string& mesh_name, MeshType type) {
  static const std::map<std::string, double> table = {
      {"ankylosaurus", 1.0}, {"bimba", 1.0},   {"bust", 1.0},          {"igea", 1.0},
      {"cg", 0.1},           {"fandisk", 0.01}, {"part-lp", 0.01},     {"sharp-sphere", 0.1},
      {"twelve", 0.1}};
  std::string key = mesh_name;
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) { return std::tolower(ch); });
  auto it = table.find(key);
  return it != table.end() ? it->second : default_mu(type);
}

}  // namespace meshprior
