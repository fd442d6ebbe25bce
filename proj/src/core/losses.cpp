// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/losses.hpp"

#include <cmath>

#include "core/error.hpp"

namespace meshprior {

const char* mesh_type_name(MeshType t) {
  switch (t) {
    case MeshType::Cad:
      return "cad";
    case MeshType::NonCad:
      return "noncad";
    case MeshType::RealScan:
      return "realscan";
  }
  return "?";
}

MeshType parse_mesh_type(const std::string& s) {
  if (s == "cad") return MeshType::Cad;
  if (s == "noncad" || s == "non-cad") return MeshType::NonCad;
  if (s == "realscan" || s == "real-scan") return MeshType::RealScan;
  throw Error(ErrorCode::Config, "unknown mesh type '" + s + "' (expected cad, noncad or realscan)");
}

LossWeights LossWeights::preset(Architecture arch, MeshType type, int mgcn_levels) {
  LossWeights w;
  if (arch == Architecture::Sgcn) {
    w.pos = {1.0};
  } else {
    if (mgcn_levels < 0 || mgcn_levels > 3) throw Error(ErrorCode::Config, "mgcn level count must lie in [0, 3]");
    const double table[4] = {0.35, 0.30, 0.20, 0.15};
    double sum = 0.0;
    for (int r = 0; r <= mgcn_levels; ++r) sum += table[r];
    for (int r = 0; r <= mgcn_levels; ++r) w.pos.push_back(mgcn_levels == 3 ? table[r] : table[r] / sum);
  }
  w.nrm = type == MeshType::Cad ? 4.0 : 1.0;
  w.reg = type == MeshType::Cad ? 4.0 : 0.0;
  return w;
}

double e_pos(const Positions& cmp, const Positions& init, std::span<const std::uint8_t> mask, Positions* grad) {
  if (cmp.rows() != init.rows() || static_cast<Eigen::Index>(mask.size()) != cmp.rows()) {
    throw Error(ErrorCode::Argument, "e_pos: size mismatch");
  }
  double sum = 0.0;
  double count = 0.0;
  for (Eigen::Index i = 0; i < cmp.rows(); ++i) {
    if (!mask[i]) continue;
    sum += (cmp.row(i) - init.row(i)).squaredNorm();
    count += 1.0;
  }
  if (count == 0.0) throw Error(ErrorCode::UndefinedLoss, "e_pos: every vertex is masked");
  const double e = std::sqrt(sum / count);
  if (grad) {
    grad->setZero(cmp.rows(), 3);
    if (e > 0) {
      for (Eigen::Index i = 0; i < cmp.rows(); ++i)
        if (mask[i]) grad->row(i) = (cmp.row(i) - init.row(i)) / (count * e);
    }
  }
  return e;
}

namespace {

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

}  // namespace

double e_nrm(const Positions& n_cmp, const Positions& n_init, std::span<const std::uint8_t> mask, Positions* grad,
             const Positions* sign_pattern) {
  if (n_cmp.rows() != n_init.rows() || static_cast<Eigen::Index>(mask.size()) != n_cmp.rows()) {
    throw Error(ErrorCode::Argument, "e_nrm: size mismatch");
  }
  double sum = 0.0;
  double count = 0.0;
  for (Eigen::Index j = 0; j < n_cmp.rows(); ++j) {
    if (!mask[j]) continue;
    if (sign_pattern) {
      sum += (n_cmp.row(j) - n_init.row(j)).dot(sign_pattern->row(j));
    } else {
      sum += (n_cmp.row(j) - n_init.row(j)).lpNorm<1>();
    }
    count += 1.0;
  }
  if (count == 0.0) throw Error(ErrorCode::UndefinedLoss, "e_nrm: every face is masked");
  if (grad) {
    grad->setZero(n_cmp.rows(), 3);
    for (Eigen::Index j = 0; j < n_cmp.rows(); ++j) {
      if (!mask[j]) continue;
      for (int c = 0; c < 3; ++c) {
        (*grad)(j, c) = (sign_pattern ? (*sign_pattern)(j, c) : sign(n_cmp(j, c) - n_init(j, c))) / count;
      }
    }
  }
  return sum / count;
}

std::vector<std::vector<int>> bnf_adjacency(const Mesh& mesh) {
  std::vector<std::vector<int>> adj(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    adj[f].push_back(f);
    for (int g : mesh.face_neighbors(f)) adj[f].push_back(g);
  }
  return adj;
}

Positions bilateral_normal_filter(const Mesh& mesh, const Positions& positions, const Positions& normals,
                                  const BnfParams& params) {
  if (normals.rows() != mesh.num_faces() || positions.rows() != mesh.num_vertices()) {
    throw Error(ErrorCode::Argument, "bilateral_normal_filter: size mismatch");
  }
  if (params.iterations < 0 || !(params.sigma_s > 0)) {
    throw Error(ErrorCode::Argument, "bilateral_normal_filter: invalid parameters");
  }
  if (params.iterations == 0) return normals;
  const auto adj = bnf_adjacency(mesh);
  const Eigen::VectorXd area = face_areas(positions, mesh.faces());
  const Positions centroid = face_centroids(positions, mesh.faces());
  double sigma_c = params.sigma_c;
  if (!(sigma_c > 0)) {
    double sum = 0.0;
    int count = 0;
    for (int f = 0; f < mesh.num_faces(); ++f) {
      for (size_t a = 1; a < adj[f].size(); ++a) {
        sum += (centroid.row(f) - centroid.row(adj[f][a])).norm();
        ++count;
      }
    }
    sigma_c = count > 0 && sum > 0 ? sum / count : 1.0;
  }
  const double kc = 1.0 / (2.0 * sigma_c * sigma_c);
  const double ks = 1.0 / (2.0 * params.sigma_s * params.sigma_s);

  Positions cur = normals;
  Positions next(cur.rows(), 3);
  for (int it = 0; it < params.iterations; ++it) {
    for (int f = 0; f < mesh.num_faces(); ++f) {
      Eigen::RowVector3d acc = Eigen::RowVector3d::Zero();
      for (int g : adj[f]) {
        const double dc = (centroid.row(f) - centroid.row(g)).squaredNorm();
        const double ds = (cur.row(f) - cur.row(g)).squaredNorm();
        acc += area[g] * std::exp(-kc * dc - ks * ds) * cur.row(g);
      }
      const double len = acc.norm();
      next.row(f) = len > 0 ? Eigen::RowVector3d(acc / len) : Eigen::RowVector3d(cur.row(f));
    }
    cur.swap(next);
  }
  return cur;
}

double e_reg(const Positions& n_cmp, const Positions& target, Positions* grad, const Positions* sign_pattern) {
  if (n_cmp.rows() != target.rows()) throw Error(ErrorCode::Argument, "e_reg: size mismatch");
  if (n_cmp.rows() == 0) throw Error(ErrorCode::UndefinedLoss, "e_reg: mesh has no faces");
  const double inv = 1.0 / static_cast<double>(n_cmp.rows());
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n_cmp.rows(); ++j) {
    if (sign_pattern) {
      sum += (n_cmp.row(j) - target.row(j)).dot(sign_pattern->row(j));
    } else {
      sum += (n_cmp.row(j) - target.row(j)).lpNorm<1>();
    }
  }
  if (grad) {
    grad->resize(n_cmp.rows(), 3);
    for (Eigen::Index j = 0; j < n_cmp.rows(); ++j) {
      for (int c = 0; c < 3; ++c) {
        (*grad)(j, c) = (sign_pattern ? (*sign_pattern)(j, c) : sign(n_cmp(j, c) - target(j, c))) * inv;
      }
    }
  }
  return sum * inv;
}

Positions face_normals_backward(const Positions& vertices, const FaceArray& faces, const Positions& grad_normals) {
  Positions g = Positions::Zero(vertices.rows(), 3);
  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    const int a = faces(f, 0), b = faces(f, 1), c = faces(f, 2);
    const Vec3 e1 = (vertices.row(b) - vertices.row(a)).transpose();
    const Vec3 e2 = (vertices.row(c) - vertices.row(a)).transpose();
    const Vec3 cr = e1.cross(e2);
    const double len = cr.norm();
    if (!(len > 0)) continue;
    const Vec3 n = cr / len;
    const Vec3 gn = grad_normals.row(f).transpose();
    const Vec3 gc = (gn - n * n.dot(gn)) / len;
    const Vec3 ge1 = e2.cross(gc);
    const Vec3 ge2 = gc.cross(e1);
    g.row(b) += ge1.transpose();
    g.row(c) += ge2.transpose();
    g.row(a) -= (ge1 + ge2).transpose();
  }
  return g;
}

LossResult total_loss(const LossInputs& in, const LossWeights& weights, const BnfParams& bnf,
                      const Positions* reg_target, const FrozenLoss* frozen) {
  const size_t levels = in.cmp.size();
  if (levels == 0 || in.init.size() != levels || in.vertex_masks.size() != levels) {
    throw Error(ErrorCode::Argument, "total_loss: per-level inputs disagree in count");
  }
  if (weights.pos.size() != levels) {
    throw Error(ErrorCode::Argument, "total_loss: " + std::to_string(weights.pos.size()) +
                                         " level weights for " + std::to_string(levels) + " levels");
  }
  if (!in.mesh) throw Error(ErrorCode::Argument, "total_loss: missing mesh");
  const Mesh& mesh = *in.mesh;

  LossResult r;
  r.pos.resize(levels);
  r.grad.resize(levels);
  for (size_t l = 0; l < levels; ++l) {
    Positions g;
    r.pos[l] = e_pos(in.cmp[l], in.init[l], in.vertex_masks[l], &g);
    r.total += weights.pos[l] * r.pos[l];
    r.grad[l] = weights.pos[l] * g;
  }

  const Positions& x = in.cmp[0];
  const Positions n_cmp = face_normals_unchecked(x, mesh.faces());
  Positions gn = Positions::Zero(mesh.num_faces(), 3);
  if (weights.nrm != 0.0) {
    Positions g;
    r.nrm = e_nrm(n_cmp, in.init_normals, in.face_mask, &g, frozen ? &frozen->nrm_sign : nullptr);
    r.nrm_sign = (n_cmp - in.init_normals).array().sign().matrix();
    gn += weights.nrm * g;
    r.total += weights.nrm * r.nrm;
  }
  if (weights.reg != 0.0) {
    if (frozen) {
      r.reg_target = frozen->reg_target;
    } else {
      r.reg_target = reg_target ? *reg_target : bilateral_normal_filter(mesh, x, n_cmp, bnf);
    }
    Positions g;
    r.reg = e_reg(n_cmp, r.reg_target, &g, frozen ? &frozen->reg_sign : nullptr);
    r.reg_sign = (n_cmp - r.reg_target).array().sign().matrix();
    gn += weights.reg * g;
    r.total += weights.reg * r.reg;
  }
  if (weights.nrm != 0.0 || weights.reg != 0.0) r.grad[0] += face_normals_backward(x, mesh.faces(), gn);
  return r;
}

}  // namespace meshprior
