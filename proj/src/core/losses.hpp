// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/gcn.hpp"
#include "core/mesh.hpp"

namespace meshprior {

enum class MeshType { Cad, NonCad, RealScan };
const char* mesh_type_name(MeshType t);
MeshType parse_mesh_type(const std::string& s);

struct LossWeights {
  std::vector<double> pos;  // one per output level, finest first
  double nrm = 1.0;
  double reg = 0.0;

  /// Defaults per architecture and mesh type. For MGCN with fewer than three
  /// pooling levels the leading level weights are renormalized to sum to 1.
  static LossWeights preset(Architecture arch, MeshType type, int mgcn_levels = 3);
};

struct BnfParams {
  int iterations = 5;
  double sigma_c = 0.0;  // <= 0: mean distance between adjacent face centroids
  double sigma_s = 0.3;
};

/// sqrt(sum_i m_i |x_i - y_i|^2 / sum_i m_i). Optional gradient w.r.t. `cmp`.
double e_pos(const Positions& cmp, const Positions& init, std::span<const std::uint8_t> mask,
             Positions* grad = nullptr);

/// sum_j m_j |n_j - n'_j|_1 / sum_j m_j. Optional gradient w.r.t. `n_cmp`.
/// `sign`, when given, fixes the sign pattern of the differences (the L1 norm
/// is then evaluated as its linear continuation); used by finite differences.
double e_nrm(const Positions& n_cmp, const Positions& n_init, std::span<const std::uint8_t> mask,
             Positions* grad = nullptr, const Positions* sign = nullptr);

/// Face adjacency (edge neighbours plus the face itself) used by the filter.
std::vector<std::vector<int>> bnf_adjacency(const Mesh& mesh);

/// `params.iterations` rounds of bilateral filtering of face normals on the
/// mesh connectivity with face areas and centroids taken from `positions`.
Positions bilateral_normal_filter(const Mesh& mesh, const Positions& positions, const Positions& normals,
                                  const BnfParams& params);

/// sum_j |n_j - target_j|_1 / |F| with `target` held constant.
double e_reg(const Positions& n_cmp, const Positions& target, Positions* grad = nullptr,
             const Positions* sign = nullptr);

/// Chain rule through unit face normals: gradient w.r.t. vertex positions
/// given gradient w.r.t. face normals. Degenerate faces contribute nothing.
Positions face_normals_backward(const Positions& vertices, const FaceArray& faces, const Positions& grad_normals);

struct LossInputs {
  const Mesh* mesh = nullptr;            // finest-level connectivity
  std::vector<Positions> cmp;            // per level
  std::vector<Positions> init;           // per level
  std::vector<std::vector<std::uint8_t>> vertex_masks;  // per level, real holes only
  std::vector<std::uint8_t> face_mask;   // finest level, real holes only
  Positions init_normals;                // finest level
};

struct LossResult {
  double total = 0.0;
  std::vector<double> pos;
  double nrm = 0.0;
  double reg = 0.0;
  std::vector<Positions> grad;  // w.r.t. cmp, per level
  Positions reg_target;         // filtered normals used by the regularizer
  Positions nrm_sign;           // sign(n_cmp - n_init), finest level
  Positions reg_sign;           // sign(n_cmp - reg_target)
};

/// Subgradient choices held fixed across loss evaluations.
struct FrozenLoss {
  Positions reg_target;
  Positions nrm_sign;
  Positions reg_sign;
};

/// Weighted sum of the positional terms on every level plus the normal and
/// regularization terms on the finest level. If `reg_target` is given it is
/// used instead of filtering the current normals. `frozen` additionally
/// fixes the L1 sign patterns.
LossResult total_loss(const LossInputs& in, const LossWeights& weights, const BnfParams& bnf,
                      const Positions* reg_target = nullptr, const FrozenLoss* frozen = nullptr);

}  // namespace meshprior
