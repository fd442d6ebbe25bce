// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/error.hpp"
#include "core/session.hpp"
#include "support/generators.hpp"

using namespace meshprior;
using namespace meshprior::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

RunConfig small_run(int steps) {
  RunConfig c;
  c.input = "fixture:cube-edge-hole";
  c.ground_truth = "fixture:cube-edge-hole";
  c.type = MeshType::Cad;
  c.seed = 11;
  c.steps = steps;
  c.width = 8;
  c.sgcn_blocks = 3;
  c.mask_sets = 3;
  return c;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("defaults validate and round-trip through text") {
  const RunConfig c;
  CHECK_NOTHROW(validate_config(c));
  std::istringstream in(config_to_string(c));
  const RunConfig back = parse_config(in);
  CHECK(config_to_string(back) == config_to_string(c));
  CHECK(get_config_value(c, "train.w_pos") == "auto");
  CHECK(get_config_value(c, "augment.p") == "0.014");
}

TEST_CASE("property: random settings round-trip") {
  Rng rng(81);
  for (int c = 0; c < kCases; ++c) {
    RunConfig cfg;
    set_config_value(cfg, "run.seed", std::to_string(rng() >> 1));
    set_config_value(cfg, "run.arch", uniform_int(rng, 0, 1) ? "mgcn" : "sgcn");
    set_config_value(cfg, "run.type", uniform_int(rng, 0, 1) ? "cad" : "noncad");
    set_config_value(cfg, "augment.p", std::to_string(uniform(rng, 0.0, 0.5)));
    set_config_value(cfg, "train.learning_rate", std::to_string(uniform(rng, 1e-4, 0.1)));
    set_config_value(cfg, "train.steps", std::to_string(uniform_int(rng, 1, 500)));
    set_config_value(cfg, "bnf.sigma_s", std::to_string(uniform(rng, 0.05, 1.0)));
    set_config_value(cfg, "refine.mu", std::to_string(uniform(rng, 0.01, 10.0)));
    set_config_value(cfg, "metrics.nearest_vertex", uniform_int(rng, 0, 1) ? "true" : "false");
    const std::string text = config_to_string(cfg);
    std::istringstream in(text);
    CHECK(config_to_string(parse_config(in)) == text);
  }
}

TEST_CASE("unknown sections, unknown keys and bad values are rejected") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  CHECK(code_of([&] { parse("[nope]\nx = 1\n"); }) == ErrorCode::Config);
  CHECK(code_of([&] { parse("[nope]\n"); }) == ErrorCode::Config);
  CHECK(code_of([&] { parse("[train]\nbogus = 1\n"); }) == ErrorCode::Config);
  CHECK(code_of([&] { parse("[train]\nsteps = ten\n"); }) == ErrorCode::Config);
  CHECK(code_of([&] { parse("[train]\nsteps = 10x\n"); }) == ErrorCode::Config);
  CHECK(code_of([&] { parse("[run]\narch = cnn\n"); }) == ErrorCode::Config);
  CHECK(code_of([&] { parse("[metrics]\nnearest_vertex = maybe\n"); }) == ErrorCode::Config);
  RunConfig c;
  CHECK(code_of([&] { set_config_value(c, "train", "1"); }) == ErrorCode::Config);
  CHECK(code_of([&] { get_config_value(c, "train.bogus"); }) == ErrorCode::Config);
  // Range checks happen in validation.
  c.steps = 0;
  CHECK(code_of([&] { validate_config(c); }) == ErrorCode::Config);
  c = RunConfig{};
  c.arch = Architecture::Mgcn;
  c.w_pos = std::vector<double>{1.0};
  CHECK(code_of([&] { validate_config(c); }) == ErrorCode::Config);
  c.w_pos = std::vector<double>{0.4, 0.3, 0.2, 0.1};
  CHECK_NOTHROW(validate_config(c));
}

TEST_CASE("derived settings follow the configuration") {
  RunConfig c;
  c.arch = Architecture::Mgcn;
  c.type = MeshType::Cad;
  c.levels = 2;
  CHECK(hierarchy_levels(c) == 2);
  CHECK(loss_weights(c).pos.size() == 3u);
  c.w_nrm = 7.0;
  CHECK(loss_weights(c).nrm == 7.0);
  c.seed = 5;
  CHECK(model_config(c).seed == 5u);
  CHECK(augmentation_config(c).seed != 5u);
  c.mu = 0.25;
  CHECK(refine_options(c).mu == 0.25);
  c.arch = Architecture::Sgcn;
  CHECK(hierarchy_levels(c) == 0);
}

TEST_CASE("checkpoints round-trip and reject corrupt data") {
  ModelConfig mc;
  mc.width = 6;
  mc.sgcn_blocks = 2;
  mc.seed = 4;
  const GcnModel model(mc);
  std::stringstream buf;
  write_checkpoint(buf, model, 17, 0.125, "augment-seed=3");
  const std::string bytes = buf.str();
  std::istringstream in(bytes);
  const Checkpoint ck = read_checkpoint(in);
  CHECK(ck.step == 17);
  CHECK(ck.scale == 0.125);
  CHECK(ck.rng_state == "augment-seed=3");
  REQUIRE(ck.model.parameters().size() == model.parameters().size());
  for (size_t i = 0; i < model.parameters().size(); ++i) {
    CHECK(ck.model.parameters()[i].name == model.parameters()[i].name);
    CHECK(ck.model.parameters()[i].value == model.parameters()[i].value);
  }
  CHECK(ck.model.running_stats() == model.running_stats());

  std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(truncated), Error);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::istringstream wrong(bad_magic);
  CHECK_THROWS_AS(read_checkpoint(wrong), Error);
  CHECK(code_of([] { load_checkpoint(temp_path("meshprior_no_such_checkpoint.bin")); }) == ErrorCode::Io);
}

TEST_CASE("session steps must run in order") {
  Session s(small_run(2));
  CHECK(code_of([&] { s.preprocess(); }) == ErrorCode::State);
  s.load_inputs();
  CHECK(code_of([&] { s.prepare_training(); }) == ErrorCode::State);
  s.preprocess();
  CHECK(code_of([&] { s.train(); }) == ErrorCode::State);
  CHECK(code_of([&] { s.evaluate(); }) == ErrorCode::State);
  s.prepare_training();
  CHECK(code_of([&] { s.refine(); }) == ErrorCode::State);
  CHECK(code_of([&] { (void)s.output_mesh(); }) == ErrorCode::State);
}

TEST_CASE("resolve_mesh handles fixtures") {
  const Mesh damaged = resolve_mesh("fixture:sphere-50", false);
  CHECK(damaged.num_vertices() > 0);
  CHECK(code_of([] { resolve_mesh("fixture:nope", false); }) == ErrorCode::Argument);
  CHECK(code_of([] { resolve_mesh(temp_path("meshprior_missing.obj"), false); }) == ErrorCode::Io);
}

TEST_CASE("a resumed session matches an uninterrupted one") {
  auto run_all = [](Session& s) {
    s.train();
    s.evaluate();
    s.refine();
    return s.output_mesh().vertices();
  };
  Session full(small_run(6));
  full.load_inputs();
  full.preprocess();
  full.prepare_training();
  const Positions expected = run_all(full);
  CHECK(full.steps_done() == 6);
  CHECK(full.loss_trace().size() == 6u);
  const MetricsReport m = full.metrics(full.output_mesh());
  CHECK(m.eps_hole.has_value());

  const std::string path = temp_path("meshprior_test_resume.bin");
  Session first(small_run(3));
  first.load_inputs();
  first.preprocess();
  first.prepare_training();
  first.train();
  first.save_checkpoint(path);

  Session second(small_run(6));
  second.load_inputs();
  second.preprocess();
  second.prepare_training();
  second.load_checkpoint(path);
  CHECK(second.steps_done() == 3);
  CHECK(run_all(second) == expected);

  // A checkpoint from a different architecture configuration is refused.
  RunConfig other = small_run(6);
  other.width = 10;
  Session mismatch(other);
  mismatch.load_inputs();
  mismatch.preprocess();
  mismatch.prepare_training();
  CHECK_THROWS_AS(mismatch.load_checkpoint(path), Error);
  std::filesystem::remove(path);
}
