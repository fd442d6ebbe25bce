// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "core/closest_point.hpp"
#include "core/error.hpp"

namespace meshprior {

std::vector<HoleMask> gen_fake_holes(const Mesh& mesh, const HoleMask& real, const AugmentationConfig& config) {
  if (!(config.p >= 0.0 && config.p < 1.0)) throw Error(ErrorCode::Config, "augment.p must lie in [0, 1)");
  if (config.k < 0) throw Error(ErrorCode::Config, "augment.k must be >= 0");
  if (config.sets < 1) throw Error(ErrorCode::Config, "augment.sets must be >= 1");
  if (real.num_vertices() != mesh.num_vertices()) throw Error(ErrorCode::Argument, "real mask size mismatch");
  std::mt19937_64 rng(config.seed);
  std::bernoulli_distribution seed_dist(config.p);
  std::vector<HoleMask> out;
  out.reserve(config.sets);
  const int n = mesh.num_vertices();
  std::vector<int> dist(n);
  std::vector<int> queue;
  for (int s = 0; s < config.sets; ++s) {
    // Multi-source BFS truncated at depth k.
    std::fill(dist.begin(), dist.end(), -1);
    queue.clear();
    for (int v = 0; v < n; ++v) {
      if (seed_dist(rng)) {
        dist[v] = 0;
        queue.push_back(v);
      }
    }
    for (size_t head = 0; head < queue.size(); ++head) {
      const int v = queue[head];
      if (dist[v] == config.k) continue;
      for (int w : mesh.neighbors(v)) {
        if (dist[w] >= 0) continue;
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
    Flags fake(n, 1);
    for (int v : queue) fake[v] = 0;
    out.push_back(real.with_fake(mesh, std::move(fake)));
  }
  return out;
}

Features build_features(const Positions& displacement, std::span<const std::uint8_t> mask) {
  if (static_cast<Eigen::Index>(mask.size()) != displacement.rows()) {
    throw Error(ErrorCode::Argument, "build_features: size mismatch");
  }
  Features f = Features::Zero(displacement.rows(), 4);
  for (Eigen::Index i = 0; i < displacement.rows(); ++i) {
    if (!mask[i]) continue;
    f.block(i, 0, 1, 3) = displacement.row(i);
    f(i, 3) = 1.0;
  }
  return f;
}

TrainingProblem make_training_problem(const PreprocessResult& pre, const Hierarchy& hierarchy) {
  if (hierarchy.num_levels() < 1 || hierarchy.levels[0].num_vertices() != pre.init_mesh.num_vertices() ||
      hierarchy.levels[0].num_faces() != pre.init_mesh.num_faces()) {
    throw Error(ErrorCode::Argument, "hierarchy does not match the preprocessed mesh");
  }
  TrainingProblem p;
  p.mesh = pre.init_mesh;
  p.graphs = GraphStack::from_hierarchy(hierarchy);
  p.real_mask = pre.real_mask;
  p.displacement = pre.displacement;
  const Flags known = pre.real_mask.vertex_mask();
  for (int r = 0; r < hierarchy.num_levels(); ++r) {
    p.smooth.push_back(hierarchy.restrict_positions(pre.smooth_mesh.vertices(), r));
    p.init.push_back(hierarchy.restrict_positions(pre.init_mesh.vertices(), r));
    p.vertex_masks.push_back(hierarchy.restrict_mask(known, r));
  }
  p.init_normals = face_normals_unchecked(pre.init_mesh.vertices(), pre.init_mesh.faces());
  p.scale = displacement_scale(p.mesh, p.displacement, known);
  return p;
}

double displacement_scale(const Mesh& mesh, const Positions& displacement, std::span<const std::uint8_t> known) {
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < displacement.rows(); ++i) {
    if (!known[i]) continue;
    sum += displacement.row(i).squaredNorm();
    ++count;
  }
  const double rms = count > 0 ? std::sqrt(sum / count) : 0.0;
  if (rms > 0) return rms;
  const double edge = mean_edge_length(mesh);
  return edge > 0 ? 0.01 * edge : 1.0;
}

Features TrainingProblem::features(std::span<const std::uint8_t> mask) const {
  return build_features(displacement / scale, mask);
}

Positions TrainingProblem::completed(int level, const Features& output) const {
  return smooth[level] + scale * output;
}

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

void train(GcnModel& model, const TrainingProblem& problem, const std::vector<HoleMask>& masks,
           const TrainConfig& config, std::vector<LossRecord>& trace, int first_step, const StepCallback& callback) {
  if (masks.empty()) throw Error(ErrorCode::Argument, "train: no mask sets");
  if (config.steps < 1) throw Error(ErrorCode::Config, "train.steps must be >= 1");
  const int outputs = model.num_outputs();
  if (outputs > problem.num_levels()) {
    throw Error(ErrorCode::Argument, "train: model needs " + std::to_string(outputs) + " levels, problem has " +
                                         std::to_string(problem.num_levels()));
  }
  if (static_cast<int>(config.weights.pos.size()) != outputs) {
    throw Error(ErrorCode::Config, "train: level weight count does not match the model outputs");
  }

  LossInputs in;
  in.mesh = &problem.mesh;
  in.init.assign(problem.init.begin(), problem.init.begin() + outputs);
  in.vertex_masks.assign(problem.vertex_masks.begin(), problem.vertex_masks.begin() + outputs);
  in.face_mask = problem.real_mask.real_face;
  in.init_normals = problem.init_normals;
  in.cmp.resize(outputs);

  for (int step = first_step; step <= config.steps; ++step) {
    const HoleMask& mask = masks[(step - 1) % masks.size()];
    const Features features = problem.features(mask.vertex_mask());
    const std::vector<Features> out = model.forward(problem.graphs, features, Mode::Train);
    for (int l = 0; l < outputs; ++l) in.cmp[l] = problem.completed(l, out[l]);
    LossRecord rec;
    rec.step = step;
    rec.lr = learning_rate(config.adam, step);
    LossResult loss;
    try {
      loss = total_loss(in, config.weights, config.bnf);
    } catch (const Error& e) {
      throw Error(e.code(), "step " + std::to_string(step) + ": " + e.what());
    }
    rec.pos = loss.pos;
    rec.nrm = loss.nrm;
    rec.reg = loss.reg;
    rec.total = loss.total;
    if (!std::isfinite(loss.total)) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "non-finite loss at step %d (E_pos[0]=%g E_nrm=%g E_reg=%g)", step,
                    loss.pos[0], loss.nrm, loss.reg);
      throw Error(ErrorCode::Numeric, buf);
    }
    model.zero_grad();
    std::vector<Features> grad_out;
    for (const auto& g : loss.grad) grad_out.push_back(problem.scale * g);
    model.backward(grad_out);
    for (const auto& p : model.parameters()) {
      if (!all_finite(p.grad)) {
        throw Error(ErrorCode::Numeric, "non-finite gradient for " + p.name + " at step " + std::to_string(step));
      }
    }
    adam_step(model.parameters(), config.adam, step);
    trace.push_back(rec);
    if (callback) callback(rec);
  }
}

void write_loss_trace(std::ostream& out, const std::vector<LossRecord>& trace) {
  size_t levels = 0;
  for (const auto& r : trace) levels = std::max(levels, r.pos.size());
  out << "step,lr";
  for (size_t l = 0; l < levels; ++l) out << ",e_pos_" << l;
  out << ",e_nrm,e_reg,total\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  for (const auto& r : trace) {
    out << r.step << "," << num(r.lr);
    for (size_t l = 0; l < levels; ++l) out << "," << (l < r.pos.size() ? num(r.pos[l]) : "");
    out << "," << num(r.nrm);
    out << "," << num(r.reg);
    out << "," << num(r.total) << "\n";
  }
}

Positions evaluate(GcnModel& model, const TrainingProblem& problem) {
  const Features features = problem.features(problem.real_mask.vertex_mask());
  const std::vector<Features> out = model.forward(problem.graphs, features, Mode::Eval);
  return problem.completed(0, out[0]);
}

MetricsReport compute_metrics(const Mesh& output, const Mesh& ground_truth, std::span<const std::uint8_t> hole_mask,
                              bool nearest_vertex) {
  if (!hole_mask.empty() && static_cast<int>(hole_mask.size()) != output.num_vertices()) {
    throw Error(ErrorCode::Argument, "compute_metrics: hole mask size does not match the output mesh");
  }
  if (ground_truth.num_faces() == 0) throw Error(ErrorCode::Data, "compute_metrics: ground truth has no faces");
  const double diag = bbox_diagonal(ground_truth);
  if (!(diag > 0)) throw Error(ErrorCode::Degenerate, "compute_metrics: ground truth bounding box is empty");
  const TriangleBvh bvh(ground_truth);
  const int n = output.num_vertices();
  MetricsReport rep;
  rep.signed_distance.resize(n);
  double sum_all = 0.0, sum_hole = 0.0;
  double vsum_all = 0.0, vsum_hole = 0.0;
  int holes = 0;
  for (int i = 0; i < n; ++i) {
    const Vec3 p = output.position(i);
    const ClosestPoint cp = bvh.closest(p);
    rep.signed_distance[i] = bvh.signed_distance(p);
    const bool hole = !hole_mask.empty() && !hole_mask[i];
    sum_all += cp.distance;
    if (hole) {
      sum_hole += cp.distance;
      ++holes;
    }
    if (nearest_vertex) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < ground_truth.num_vertices(); ++j) {
        best = std::min(best, (ground_truth.position(j) - p).squaredNorm());
      }
      best = std::sqrt(best);
      vsum_all += best;
      if (hole) vsum_hole += best;
    }
  }
  const double scale = 1e3 / diag;
  rep.hole_vertices = holes;
  rep.eps_all = n > 0 ? sum_all / n * scale : 0.0;
  if (holes > 0) rep.eps_hole = sum_hole / holes * scale;
  if (nearest_vertex) {
    rep.eps_all_vertex = n > 0 ? vsum_all / n * scale : 0.0;
    if (holes > 0) rep.eps_hole_vertex = vsum_hole / holes * scale;
  }
  return rep;
}

double mean_normal_angle(const Mesh& output, const Mesh& ground_truth, std::span<const std::uint8_t> vertex_select) {
  const TriangleBvh bvh(ground_truth);
  const Positions gt_n = face_normals_unchecked(ground_truth.vertices(), ground_truth.faces());
  const Positions out_n = face_normals_unchecked(output.vertices(), output.faces());
  const Positions c = face_centroids(output.vertices(), output.faces());
  double sum = 0.0;
  int count = 0;
  for (int f = 0; f < output.num_faces(); ++f) {
    const auto t = output.face(f);
    if (!vertex_select.empty() && !(vertex_select[t[0]] && vertex_select[t[1]] && vertex_select[t[2]])) continue;
    const ClosestPoint cp = bvh.closest(c.row(f).transpose());
    const double d = std::clamp(out_n.row(f).dot(gt_n.row(cp.face)), -1.0, 1.0);
    sum += std::acos(d);
    ++count;
  }
  return count > 0 ? sum / count : 0.0;
}

}  // namespace meshprior
