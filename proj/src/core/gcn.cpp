// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/gcn.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace meshprior {

SparseMatrix scaled_graph_operator(const Mesh& mesh) {
  const int n = mesh.num_vertices();
  Eigen::VectorXd inv_sqrt_deg(n);
  for (int i = 0; i < n; ++i) {
    const auto d = mesh.neighbors(i).size();
    inv_sqrt_deg[i] = d > 0 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(mesh.num_edges()) * 2 + n);
  for (int i = 0; i < n; ++i) {
    const auto nb = mesh.neighbors(i);
    if (nb.empty()) trips.emplace_back(i, i, -1.0);
    for (int j : nb) trips.emplace_back(i, j, -inv_sqrt_deg[i] * inv_sqrt_deg[j]);
  }
  SparseMatrix op(n, n);
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

GraphStack GraphStack::from_mesh(const Mesh& mesh) {
  GraphStack g;
  g.operators.push_back(scaled_graph_operator(mesh));
  return g;
}

GraphStack GraphStack::from_hierarchy(const Hierarchy& h) {
  GraphStack g;
  for (const auto& level : h.levels) g.operators.push_back(scaled_graph_operator(level));
  g.merges = h.merges;
  return g;
}

Features cheb_conv(const SparseMatrix& op, const Features& x, const std::vector<Eigen::MatrixXd>& weights,
                   const Eigen::RowVectorXd& bias) {
  if (weights.empty()) throw Error(ErrorCode::Argument, "cheb_conv: need at least one weight matrix");
  if (op.rows() != x.rows() || op.cols() != x.rows()) {
    throw Error(ErrorCode::Argument, "cheb_conv: operator size does not match feature rows");
  }
  for (const auto& w : weights) {
    if (w.rows() != x.cols() || w.cols() != bias.size()) {
      throw Error(ErrorCode::Argument, "cheb_conv: weight dimensions do not match");
    }
  }
  Features prev2 = x;
  Features y = x * weights[0];
  Features prev1;
  if (weights.size() > 1) {
    prev1 = op * x;
    y += prev1 * weights[1];
  }
  for (size_t k = 2; k < weights.size(); ++k) {
    Features t = 2.0 * (op * prev1) - prev2;
    y += t * weights[k];
    prev2 = std::move(prev1);
    prev1 = std::move(t);
  }
  y.rowwise() += bias;
  return y;
}

const char* architecture_name(Architecture a) { return a == Architecture::Sgcn ? "sgcn" : "mgcn"; }

Architecture parse_architecture(const std::string& s) {
  if (s == "sgcn" || s == "SGCN") return Architecture::Sgcn;
  if (s == "mgcn" || s == "MGCN") return Architecture::Mgcn;
  throw Error(ErrorCode::Config, "unknown architecture '" + s + "' (expected sgcn or mgcn)");
}

namespace {

std::string block_name(int b) {
  std::string s = std::to_string(b);
  return "block" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

}  // namespace

int GcnModel::add_param(const std::string& name, int rows, int cols, double bound, std::mt19937_64& rng) {
  Parameter p;
  p.name = name;
  p.value = Eigen::MatrixXd::Zero(rows, cols);
  if (bound > 0) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) p.value(i, j) = dist(rng);
  }
  p.grad = Eigen::MatrixXd::Zero(rows, cols);
  p.adam_m = Eigen::MatrixXd::Zero(rows, cols);
  p.adam_v = Eigen::MatrixXd::Zero(rows, cols);
  params_.push_back(std::move(p));
  return static_cast<int>(params_.size()) - 1;
}

GcnModel::Cheb GcnModel::make_cheb(const std::string& prefix, int cin, int cout, int order, std::mt19937_64& rng,
                                   bool zero) {
  Cheb c;
  const double bound = zero ? 0.0 : std::sqrt(6.0 / (cin * order + cout));
  for (int k = 0; k < order; ++k) c.weights.push_back(add_param(prefix + ".W" + std::to_string(k), cin, cout, bound, rng));
  c.bias = add_param(prefix + ".bias", 1, cout, 0.0, rng);
  return c;
}

GcnModel::GcnModel(const ModelConfig& config) : config_(config) {
  if (config.in_channels < 1 || config.width < 1 || config.cheb_order < 1) {
    throw Error(ErrorCode::Config, "model dimensions must be positive");
  }
  if (config.arch == Architecture::Mgcn && (config.mgcn_levels < 0 || config.mgcn_levels > 3)) {
    throw Error(ErrorCode::Config, "mgcn level count must lie in [0, 3]");
  }
  if (config.sgcn_blocks < 1 || config.mgcn_blocks_per_stage < 1) {
    throw Error(ErrorCode::Config, "block counts must be positive");
  }
  std::mt19937_64 rng(config.seed);
  auto add_block = [&](int level, int cin) {
    Block b;
    const std::string name = block_name(static_cast<int>(blocks_.size()));
    b.conv = make_cheb(name + ".cheb", cin, config.width, config.cheb_order, rng, false);
    b.gamma = add_param(name + ".bn.gamma", 1, config.width, 0.0, rng);
    params_[b.gamma].value.setOnes();
    b.beta = add_param(name + ".bn.beta", 1, config.width, 0.0, rng);
    b.running_mean = Eigen::VectorXd::Zero(config.width);
    b.running_var = Eigen::VectorXd::Ones(config.width);
    ops_.push_back({OpKind::Block, level, static_cast<int>(blocks_.size())});
    blocks_.push_back(std::move(b));
  };
  auto add_head = [&](OpKind kind, int level, const std::string& name, int order) {
    ops_.push_back({kind, level, static_cast<int>(heads_.size())});
    heads_.push_back(make_cheb(name, config.width, 3, order, rng, kind == OpKind::Head && config.zero_head));
  };

  int cin = config.in_channels;
  if (config.arch == Architecture::Sgcn) {
    for (int b = 0; b < config.sgcn_blocks; ++b) {
      add_block(0, cin);
      cin = config.width;
    }
    add_head(OpKind::Head, 0, "head", 1);
    return;
  }

  const int levels = config.mgcn_levels;
  const int n = config.mgcn_blocks_per_stage;
  int cur = 0;
  for (int stage = 0; stage < 3; ++stage) {
    for (int b = 0; b < n; ++b) {
      add_block(cur, cin);
      cin = config.width;
    }
    if (cur < levels) {
      ops_.push_back({OpKind::Pool, cur, -1});
      ++cur;
    }
  }
  std::vector<bool> emitted(levels + 1, false);
  if (cur >= 1) {
    add_head(OpKind::SideHead, cur, "side" + std::to_string(cur), config.cheb_order);
    emitted[cur] = true;
  }
  for (int stage = 0; stage < 3; ++stage) {
    if (cur > 0) {
      --cur;
      ops_.push_back({OpKind::Unpool, cur, -1});
    }
    for (int b = 0; b < n; ++b) add_block(cur, cin);
    if (cur >= 1 && !emitted[cur]) {
      add_head(OpKind::SideHead, cur, "side" + std::to_string(cur), config.cheb_order);
      emitted[cur] = true;
    }
  }
  add_head(OpKind::Head, 0, "head", 1);
}

int GcnModel::num_outputs() const {
  return config_.arch == Architecture::Sgcn ? 1 : config_.mgcn_levels + 1;
}

int GcnModel::find_parameter(const std::string& name) const {
  for (size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return static_cast<int>(i);
  return -1;
}

std::vector<Eigen::VectorXd> GcnModel::running_stats() const {
  std::vector<Eigen::VectorXd> out;
  for (const auto& b : blocks_) {
    out.push_back(b.running_mean);
    out.push_back(b.running_var);
  }
  return out;
}

void GcnModel::set_running_stats(const std::vector<Eigen::VectorXd>& stats) {
  if (stats.size() != blocks_.size() * 2) throw Error(ErrorCode::Argument, "running stats count mismatch");
  for (size_t b = 0; b < blocks_.size(); ++b) {
    if (stats[2 * b].size() != config_.width || stats[2 * b + 1].size() != config_.width) {
      throw Error(ErrorCode::Argument, "running stats width mismatch");
    }
    blocks_[b].running_mean = stats[2 * b];
    blocks_[b].running_var = stats[2 * b + 1];
  }
}

Features GcnModel::cheb_forward(const Cheb& c, const SparseMatrix& op, const Features& x, ChebCache* cache) const {
  const int order = static_cast<int>(c.weights.size());
  std::vector<Features> t;
  t.reserve(order);
  t.push_back(x);
  if (order > 1) t.push_back(op * x);
  for (int k = 2; k < order; ++k) t.push_back(2.0 * (op * t[k - 1]) - t[k - 2]);
  Features y = t[0] * params_[c.weights[0]].value;
  for (int k = 1; k < order; ++k) y += t[k] * params_[c.weights[k]].value;
  y.rowwise() += params_[c.bias].value.row(0);
  if (cache) cache->t = std::move(t);
  return y;
}

Features GcnModel::cheb_backward(const Cheb& c, const SparseMatrix& op, const ChebCache& cache, const Features& dy) {
  const int order = static_cast<int>(c.weights.size());
  std::vector<Features> dt(order);
  for (int k = 0; k < order; ++k) {
    params_[c.weights[k]].grad.noalias() += cache.t[k].transpose() * dy;
    dt[k] = dy * params_[c.weights[k]].value.transpose();
  }
  params_[c.bias].grad.row(0) += dy.colwise().sum();
  for (int k = order - 1; k >= 2; --k) {
    dt[k - 1] += 2.0 * (op * dt[k]);  // op is symmetric
    dt[k - 2] -= dt[k];
  }
  if (order > 1) dt[0] += op * dt[1];
  return dt[0];
}

std::vector<Features> GcnModel::forward(const GraphStack& graphs, const Features& input, Mode mode,
                                        const ActivationPattern* frozen) {
  const int needed = config_.arch == Architecture::Sgcn ? 1 : config_.mgcn_levels + 1;
  if (graphs.num_levels() < needed || static_cast<int>(graphs.merges.size()) < needed - 1) {
    throw Error(ErrorCode::Argument, "graph stack has " + std::to_string(graphs.num_levels()) +
                                         " levels, model needs " + std::to_string(needed));
  }
  if (input.rows() != graphs.num_vertices(0) || input.cols() != config_.in_channels) {
    throw Error(ErrorCode::Argument, "input features are " + std::to_string(input.rows()) + "x" +
                                         std::to_string(input.cols()) + ", expected " +
                                         std::to_string(graphs.num_vertices(0)) + "x" +
                                         std::to_string(config_.in_channels));
  }
  if (frozen && frozen->size() != blocks_.size()) throw Error(ErrorCode::Argument, "activation pattern mismatch");

  block_cache_.assign(blocks_.size(), {});
  head_cache_.assign(heads_.size(), {});
  std::vector<Features> outputs(num_outputs());
  const double slope = config_.leaky_slope;
  Features x = input;
  for (const Op& op : ops_) {
    switch (op.kind) {
      case OpKind::Block: {
        Block& b = blocks_[op.index];
        BlockCache& cache = block_cache_[op.index];
        Features z = cheb_forward(b.conv, graphs.operators[op.level], x, &cache.cheb);
        const double n = static_cast<double>(z.rows());
        Eigen::RowVectorXd mean;
        Eigen::RowVectorXd var;
        cache.train = mode == Mode::Train;
        if (cache.train) {
          mean = z.colwise().mean();
          var = (z.rowwise() - mean).array().square().colwise().mean().matrix();
          const double unbias = n > 1 ? n / (n - 1) : 1.0;
          const double m = config_.bn_momentum;
          b.running_mean = (1 - m) * b.running_mean + m * mean.transpose();
          b.running_var = (1 - m) * b.running_var + m * unbias * var.transpose();
        } else {
          mean = b.running_mean.transpose();
          var = b.running_var.transpose();
        }
        cache.inv_std = (var.array() + config_.bn_eps).rsqrt().matrix();
        cache.xhat = (z.rowwise() - mean).array().rowwise() * cache.inv_std.array();
        Features y = (cache.xhat.array().rowwise() * params_[b.gamma].value.row(0).array()).matrix();
        y.rowwise() += params_[b.beta].value.row(0);
        cache.positive.resize(y.size());
        for (Eigen::Index i = 0; i < y.size(); ++i) {
          double& v = y.data()[i];
          const bool pos = frozen ? (*frozen)[op.index][i] != 0 : v > 0;
          cache.positive[i] = pos ? 1 : 0;
          if (!pos) v *= slope;
        }
        x = std::move(y);
        break;
      }
      case OpKind::Pool:
        x = pool_avg(x, graphs.merges[op.level]);
        break;
      case OpKind::Unpool:
        x = unpool(x, graphs.merges[op.level]);
        break;
      case OpKind::SideHead:
      case OpKind::Head:
        outputs[op.level] = cheb_forward(heads_[op.index], graphs.operators[op.level], x, &head_cache_[op.index]);
        break;
    }
  }
  graphs_ = &graphs;
  has_cache_ = true;
  return outputs;
}

ActivationPattern GcnModel::activation_pattern() const {
  if (!has_cache_) throw Error(ErrorCode::State, "activation pattern requested before forward");
  ActivationPattern p;
  for (const auto& c : block_cache_) p.push_back(c.positive);
  return p;
}

Features GcnModel::backward(const std::vector<Features>& grad_outputs) {
  if (!has_cache_) throw Error(ErrorCode::State, "backward called before forward");
  if (static_cast<int>(grad_outputs.size()) != num_outputs()) {
    throw Error(ErrorCode::Argument, "backward: expected " + std::to_string(num_outputs()) + " output gradients");
  }
  const GraphStack& graphs = *graphs_;
  const double slope = config_.leaky_slope;
  Features dx;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    const Op& op = *it;
    switch (op.kind) {
      case OpKind::Head:
      case OpKind::SideHead: {
        const Features& g = grad_outputs[op.level];
        if (g.rows() != graphs.num_vertices(op.level) || g.cols() != 3) {
          throw Error(ErrorCode::Argument, "backward: output gradient shape mismatch at level " +
                                               std::to_string(op.level));
        }
        Features d = cheb_backward(heads_[op.index], graphs.operators[op.level], head_cache_[op.index], g);
        if (dx.size() == 0) {
          dx = std::move(d);
        } else {
          dx += d;
        }
        break;
      }
      case OpKind::Block: {
        const Block& b = blocks_[op.index];
        const BlockCache& cache = block_cache_[op.index];
        for (Eigen::Index i = 0; i < dx.size(); ++i)
          if (!cache.positive[i]) dx.data()[i] *= slope;
        params_[b.gamma].grad.row(0) += (dx.array() * cache.xhat.array()).colwise().sum().matrix();
        params_[b.beta].grad.row(0) += dx.colwise().sum();
        Features dxhat = (dx.array().rowwise() * params_[b.gamma].value.row(0).array()).matrix();
        Features dz;
        if (cache.train) {
          const double n = static_cast<double>(dxhat.rows());
          const Eigen::RowVectorXd sum_d = dxhat.colwise().sum();
          const Eigen::RowVectorXd sum_dx = (dxhat.array() * cache.xhat.array()).colwise().sum().matrix();
          Features t = n * dxhat;
          t.rowwise() -= sum_d;
          t -= (cache.xhat.array().rowwise() * sum_dx.array()).matrix();
          dz = (t.array().rowwise() * (cache.inv_std.array() / n)).matrix();
        } else {
          dz = (dxhat.array().rowwise() * cache.inv_std.array()).matrix();
        }
        dx = cheb_backward(b.conv, graphs.operators[op.level], cache.cheb, dz);
        break;
      }
      case OpKind::Pool: {
        const MergeMap& m = graphs.merges[op.level];
        Features fine(m.fine_count, dx.cols());
        for (int k = 0; k < m.fine_count; ++k) {
          const int i = m.coarse_of[k];
          fine.row(k) = dx.row(i) / static_cast<double>(m.sets[i].size());
        }
        dx = std::move(fine);
        break;
      }
      case OpKind::Unpool:
        dx = sum_pool(dx, graphs.merges[op.level]);
        break;
    }
  }
  return dx;
}

void GcnModel::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

double learning_rate(const AdamConfig& config, int step) {
  if (config.halving_step > 0 && step > config.halving_step) return 0.5 * config.learning_rate;
  return config.learning_rate;
}

void adam_step(std::vector<Parameter>& params, const AdamConfig& config, int step) {
  if (step < 1) throw Error(ErrorCode::Argument, "adam_step: step index is 1-based");
  const double lr = learning_rate(config, step);
  const double c1 = 1.0 - std::pow(config.beta1, step);
  const double c2 = 1.0 - std::pow(config.beta2, step);
  for (auto& p : params) {
    p.adam_m = config.beta1 * p.adam_m + (1.0 - config.beta1) * p.grad;
    p.adam_v = config.beta2 * p.adam_v + (1.0 - config.beta2) * p.grad.cwiseAbs2();
    const Eigen::ArrayXXd mhat = p.adam_m.array() / c1;
    const Eigen::ArrayXXd vhat = p.adam_v.array() / c2;
    p.value.array() -= lr * mhat / (vhat.sqrt() + config.epsilon);
  }
}

}  // namespace meshprior
