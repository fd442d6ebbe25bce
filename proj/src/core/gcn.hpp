// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "core/hierarchy.hpp"
#include "core/mesh.hpp"

namespace meshprior {

/// L_sym - I = -D^-1/2 A D^-1/2 (the Chebyshev-scaled normalized Laplacian
/// with lambda_max = 2). Isolated vertices get a -1 diagonal entry.
SparseMatrix scaled_graph_operator(const Mesh& mesh);

/// Graph operators of every level plus the merge maps between them.
struct GraphStack {
  std::vector<SparseMatrix> operators;  // level 0 = finest
  std::vector<MergeMap> merges;

  static GraphStack from_mesh(const Mesh& mesh);
  static GraphStack from_hierarchy(const Hierarchy& h);
  int num_levels() const { return static_cast<int>(operators.size()); }
  int num_vertices(int level) const { return static_cast<int>(operators[level].rows()); }
};

/// Sum_k T_k(L) X W_k + b with the Chebyshev recurrence.
Features cheb_conv(const SparseMatrix& op, const Features& x, const std::vector<Eigen::MatrixXd>& weights,
                   const Eigen::RowVectorXd& bias);

enum class Architecture { Sgcn, Mgcn };
const char* architecture_name(Architecture a);
Architecture parse_architecture(const std::string& s);

struct ModelConfig {
  Architecture arch = Architecture::Sgcn;
  int in_channels = 4;
  int width = 32;
  int cheb_order = 3;
  int sgcn_blocks = 13;
  int mgcn_blocks_per_stage = 5;
  int mgcn_levels = 3;  // R; number of pooling steps
  double leaky_slope = 0.01;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;
  std::uint64_t seed = 0;
  bool zero_head = false;
};

struct Parameter {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
  Eigen::MatrixXd adam_m;
  Eigen::MatrixXd adam_v;
};

enum class Mode { Train, Eval };

/// Optional fixed LeakyReLU branch choice per block, used by finite-difference
/// checks so that a perturbation cannot move an activation across the kink.
using ActivationPattern = std::vector<std::vector<std::uint8_t>>;

class GcnModel {
 public:
  GcnModel() = default;
  explicit GcnModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  /// Number of output levels (1 for SGCN, R + 1 for MGCN).
  int num_outputs() const;
  int num_blocks() const { return static_cast<int>(blocks_.size()); }

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  int find_parameter(const std::string& name) const;

  /// Running BatchNorm statistics, two vectors per block (mean, var).
  std::vector<Eigen::VectorXd> running_stats() const;
  void set_running_stats(const std::vector<Eigen::VectorXd>& stats);

  /// Displacements per output level, finest first. In Train mode batch
  /// statistics are used and running statistics updated.
  std::vector<Features> forward(const GraphStack& graphs, const Features& input, Mode mode,
                                const ActivationPattern* frozen = nullptr);
  /// LeakyReLU branch taken by each block in the last forward pass.
  ActivationPattern activation_pattern() const;
  /// Accumulates parameter gradients from output gradients (same layout as
  /// forward's result). Returns the gradient with respect to the input.
  Features backward(const std::vector<Features>& grad_outputs);
  void zero_grad();

 private:
  struct Cheb {
    std::vector<int> weights;  // parameter ids
    int bias = -1;
  };
  struct Block {
    Cheb conv;
    int gamma = -1;
    int beta = -1;
    Eigen::VectorXd running_mean;
    Eigen::VectorXd running_var;
  };
  enum class OpKind { Block, Pool, Unpool, SideHead, Head };
  struct Op {
    OpKind kind;
    int level;
    int index;  // block id or head id
  };
  struct ChebCache {
    std::vector<Features> t;
  };
  struct BlockCache {
    ChebCache cheb;
    Features xhat;
    Eigen::RowVectorXd inv_std;
    std::vector<std::uint8_t> positive;
    bool train = true;
  };

  int add_param(const std::string& name, int rows, int cols, double bound, std::mt19937_64& rng);
  Cheb make_cheb(const std::string& prefix, int cin, int cout, int order, std::mt19937_64& rng, bool zero);
  Features cheb_forward(const Cheb& c, const SparseMatrix& op, const Features& x, ChebCache* cache) const;
  Features cheb_backward(const Cheb& c, const SparseMatrix& op, const ChebCache& cache, const Features& dy);

  ModelConfig config_;
  std::vector<Parameter> params_;
  std::vector<Block> blocks_;
  std::vector<Cheb> heads_;
  std::vector<Op> ops_;

  // Forward cache.
  const GraphStack* graphs_ = nullptr;
  std::vector<BlockCache> block_cache_;
  std::vector<ChebCache> head_cache_;
  bool has_cache_ = false;
};

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int halving_step = 50;  // lr is halved for steps after this one (<= 0: never)
};

/// Learning rate at 1-based `step`.
double learning_rate(const AdamConfig& config, int step);
/// One bias-corrected Adam update at 1-based `step`.
void adam_step(std::vector<Parameter>& params, const AdamConfig& config, int step);

}  // namespace meshprior
