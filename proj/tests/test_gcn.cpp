// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

#include "core/error.hpp"
#include "core/fixtures.hpp"
#include "core/gcn.hpp"
#include "core/grad_check.hpp"
#include "core/hierarchy.hpp"
#include "support/generators.hpp"

using namespace meshprior;
using namespace meshprior::testing;

namespace {

ModelConfig small_config(Architecture arch) {
  ModelConfig c;
  c.arch = arch;
  c.width = 6;
  c.sgcn_blocks = 3;
  c.mgcn_blocks_per_stage = 1;
  c.mgcn_levels = 2;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("property: the scaled graph operator has spectrum in [-1, 1]") {
  Rng rng(41);
  for (int c = 0; c < 8; ++c) {
    const Mesh m = random_sphere(rng, 1, 3);
    const Eigen::MatrixXd op = Eigen::MatrixXd(scaled_graph_operator(m));
    CHECK((op - op.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(op).eigenvalues();
    CHECK(ev.minCoeff() >= -1 - 1e-12);
    CHECK(ev.maxCoeff() <= 1 + 1e-12);
    // A connected graph has eigenvalue -1 of L_sym - I (from L_sym's 0).
    CHECK(ev.minCoeff() == doctest::Approx(-1.0).epsilon(1e-10));
  }
}

TEST_CASE("property: Chebyshev convolution matches the explicit polynomial") {
  Rng rng(42);
  const Mesh m = geodesic_sphere(2);
  const SparseMatrix op = scaled_graph_operator(m);
  const Eigen::MatrixXd L = Eigen::MatrixXd(op);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(L.rows(), L.cols());
  for (int c = 0; c < kCases; ++c) {
    const int cin = uniform_int(rng, 1, 4);
    const int cout = uniform_int(rng, 1, 4);
    const Features x = random_matrix<Features>(rng, m.num_vertices(), cin);
    std::vector<Eigen::MatrixXd> w;
    for (int k = 0; k < 3; ++k) w.push_back(random_matrix<Eigen::MatrixXd>(rng, cin, cout));
    const Eigen::RowVectorXd b = random_matrix<Eigen::MatrixXd>(rng, 1, cout);
    const Eigen::MatrixXd t2 = 2 * L * L - I;
    const Eigen::MatrixXd expected =
        (x * w[0] + L * x * w[1] + t2 * x * w[2]).rowwise() + b;
    CHECK((cheb_conv(op, x, w, b) - expected).cwiseAbs().maxCoeff() < 1e-12);
    // K = 1 is a vertex-wise linear layer.
    CHECK((cheb_conv(op, x, {w[0]}, b) - ((x * w[0]).rowwise() + b)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("model layouts") {
  const ModelConfig sg;
  const GcnModel s(sg);
  CHECK(s.num_outputs() == 1);
  CHECK(s.num_blocks() == 13);

  ModelConfig mg;
  mg.arch = Architecture::Mgcn;
  const GcnModel m(mg);
  CHECK(m.num_outputs() == 4);
  // Three encoder and three decoder stages of five blocks.
  CHECK(m.num_blocks() == 30);

  CHECK(parse_architecture("mgcn") == Architecture::Mgcn);
  CHECK(std::string(architecture_name(Architecture::Sgcn)) == "sgcn");
  CHECK_THROWS_AS(parse_architecture("cnn"), Error);
}

TEST_CASE("forward shapes and determinism for both architectures") {
  const Hierarchy h = build_hierarchy(geodesic_sphere(4), 2);
  const GraphStack graphs = GraphStack::from_hierarchy(h);
  Rng rng(43);
  const Features x = random_matrix<Features>(rng, h.levels[0].num_vertices(), 4);
  for (Architecture arch : {Architecture::Sgcn, Architecture::Mgcn}) {
    GcnModel model(small_config(arch));
    const auto out = model.forward(graphs, x, Mode::Eval);
    REQUIRE(static_cast<int>(out.size()) == model.num_outputs());
    for (size_t l = 0; l < out.size(); ++l) {
      CHECK(out[l].rows() == h.levels[l].num_vertices());
      CHECK(out[l].cols() == 3);
      CHECK(out[l].allFinite());
    }
    const auto again = model.forward(graphs, x, Mode::Eval);
    for (size_t l = 0; l < out.size(); ++l) CHECK(again[l] == out[l]);
  }
}

TEST_CASE("same seed gives identical weights, different seeds differ") {
  const GcnModel a(small_config(Architecture::Mgcn));
  const GcnModel b(small_config(Architecture::Mgcn));
  ModelConfig other = small_config(Architecture::Mgcn);
  other.seed = 6;
  const GcnModel c(other);
  bool differs = false;
  for (size_t i = 0; i < a.parameters().size(); ++i) {
    CHECK(a.parameters()[i].value == b.parameters()[i].value);
    differs = differs || a.parameters()[i].value != c.parameters()[i].value;
  }
  CHECK(differs);
}

TEST_CASE("zero head outputs zero displacement") {
  ModelConfig c = small_config(Architecture::Sgcn);
  c.zero_head = true;
  GcnModel model(c);
  const GraphStack graphs = GraphStack::from_mesh(geodesic_sphere(2));
  Rng rng(44);
  const auto out = model.forward(graphs, random_matrix<Features>(rng, 42, 4), Mode::Eval);
  CHECK(out[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("training mode updates BatchNorm running statistics") {
  GcnModel model(small_config(Architecture::Sgcn));
  const GraphStack graphs = GraphStack::from_mesh(geodesic_sphere(2));
  Rng rng(45);
  const auto before = model.running_stats();
  model.forward(graphs, random_matrix<Features>(rng, 42, 4), Mode::Train);
  const auto after = model.running_stats();
  REQUIRE(before.size() == after.size());
  CHECK(before.size() == 2u * model.num_blocks());
  bool changed = false;
  for (size_t i = 0; i < before.size(); ++i) changed = changed || before[i] != after[i];
  CHECK(changed);
  model.set_running_stats(before);
  CHECK(model.running_stats() == before);
}

TEST_CASE("Adam: schedule and the first bias-corrected step") {
  AdamConfig cfg;
  CHECK(learning_rate(cfg, 1) == 0.01);
  CHECK(learning_rate(cfg, 50) == 0.01);
  CHECK(learning_rate(cfg, 51) == 0.005);
  cfg.halving_step = 0;
  CHECK(learning_rate(cfg, 1000) == 0.01);

  // After bias correction the first update is lr * g / (|g| + eps).
  std::vector<Parameter> params(1);
  params[0].value = Eigen::MatrixXd::Zero(2, 2);
  params[0].grad.resize(2, 2);
  params[0].grad << 3.0, -0.5, 1e-3, 0.0;
  params[0].adam_m = Eigen::MatrixXd::Zero(2, 2);
  params[0].adam_v = Eigen::MatrixXd::Zero(2, 2);
  AdamConfig a;
  adam_step(params, a, 1);
  for (int i = 0; i < 4; ++i) {
    const double g = params[0].grad.data()[i];
    CHECK(params[0].value.data()[i] == doctest::Approx(-a.learning_rate * g / (std::abs(g) + a.epsilon)));
  }
  CHECK_THROWS_AS(adam_step(params, a, 0), Error);
}

TEST_CASE("Adam minimizes a quadratic") {
  std::vector<Parameter> params(1);
  params[0].value = Eigen::MatrixXd::Constant(3, 1, 2.0);
  params[0].adam_m = Eigen::MatrixXd::Zero(3, 1);
  params[0].adam_v = Eigen::MatrixXd::Zero(3, 1);
  AdamConfig a;
  a.learning_rate = 0.05;
  a.halving_step = 0;
  for (int step = 1; step <= 500; ++step) {
    params[0].grad = 2 * params[0].value;
    adam_step(params, a, step);
  }
  CHECK(params[0].value.cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("gradient check passes for both architectures") {
  for (Architecture arch : {Architecture::Sgcn, Architecture::Mgcn}) {
    GradCheckOptions o;
    o.arch = arch;
    const GradCheckReport r = grad_check(o);
    INFO("worst " << r.worst_parameter << " rel " << r.max_rel_error);
    CHECK(r.passed);
    CHECK(r.max_rel_error < 1e-4);
    CHECK(r.checked > 1000);
  }
}

TEST_CASE("gradient check catches a corrupted gradient") {
  GradCheckOptions o;
  o.warmup_steps = 0;
  o.corrupt_parameter = "head.W0";
  const GradCheckReport bad = grad_check(o);
  CHECK_FALSE(bad.passed);
  CHECK(bad.worst_parameter == "head.W0");
  o.corrupt_parameter = "no.such.parameter";
  CHECK_THROWS_AS(grad_check(o), Error);
}
