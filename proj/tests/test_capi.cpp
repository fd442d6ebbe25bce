// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library through its public header only.

#include <doctest.h>
#include <meshprior/meshprior.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

struct CallbackState {
  int calls = 0;
  int stop_after = -1;
  int last_step = 0;
};

int on_step(const mp_loss_record* r, void* user) {
  auto* s = static_cast<CallbackState*>(user);
  ++s->calls;
  s->last_step = r->step;
  return s->stop_after >= 0 && s->calls >= s->stop_after;
}

mp_session* small_session(int steps) {
  mp_config* cfg = nullptr;
  REQUIRE(mp_config_create(&cfg) == MP_OK);
  const char* settings[][2] = {{"run.input", "fixture:cube-edge-hole"},
                               {"run.ground_truth", "fixture:cube-edge-hole"},
                               {"run.type", "cad"},
                               {"run.seed", "2"},
                               {"train.width", "8"},
                               {"train.sgcn_blocks", "3"},
                               {"augment.sets", "3"}};
  for (const auto& kv : settings) REQUIRE(mp_config_set(cfg, kv[0], kv[1]) == MP_OK);
  REQUIRE(mp_config_set(cfg, "train.steps", std::to_string(steps).c_str()) == MP_OK);
  mp_session* s = nullptr;
  REQUIRE(mp_session_create(cfg, &s) == MP_OK);
  mp_config_free(cfg);
  return s;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(mp_version()) == "0.1.0");
  CHECK(std::string(mp_status_name(MP_OK)) == "ok");
  CHECK(std::string(mp_status_name(MP_ERR_CONFIG)) != "ok");
}

TEST_CASE("meshes cross the boundary intact") {
  const double v[] = {0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1};
  const int32_t f[] = {0, 2, 1, 0, 1, 3, 0, 3, 2, 1, 2, 3};
  mp_mesh* m = nullptr;
  REQUIRE(mp_mesh_create(v, 4, f, 4, &m) == MP_OK);
  CHECK(mp_mesh_num_vertices(m) == 4);
  CHECK(mp_mesh_num_faces(m) == 4);
  std::vector<double> vb(12);
  std::vector<int32_t> fb(12);
  CHECK(mp_mesh_copy_vertices(m, vb.data()) == MP_OK);
  CHECK(mp_mesh_copy_faces(m, fb.data()) == MP_OK);
  CHECK(vb == std::vector<double>(v, v + 12));
  CHECK(fb == std::vector<int32_t>(f, f + 12));
  size_t loops = 99;
  CHECK(mp_mesh_boundary_loops(m, &loops) == MP_OK);
  CHECK(loops == 0);

  const std::string path = temp_path("meshprior_capi_tet.obj");
  CHECK(mp_mesh_save(m, path.c_str(), nullptr) == MP_OK);
  mp_mesh* back = nullptr;
  REQUIRE(mp_mesh_load(path.c_str(), &back) == MP_OK);
  CHECK(mp_mesh_num_faces(back) == 4);
  mp_mesh_free(back);
  mp_mesh_free(m);
  std::filesystem::remove(path);

  const int32_t bad[] = {0, 1, 7};
  mp_mesh* out = nullptr;
  CHECK(mp_mesh_create(v, 4, bad, 1, &out) != MP_OK);
  CHECK(out == nullptr);
  CHECK(std::string(mp_last_error()).size() > 0);
  CHECK(mp_mesh_load(temp_path("meshprior_capi_missing.obj").c_str(), &out) == MP_ERR_IO);
  CHECK(mp_mesh_create(nullptr, 4, f, 4, &out) == MP_ERR_ARGUMENT);
}

TEST_CASE("string outputs report the needed size") {
  size_t needed = 0;
  CHECK(mp_fixture_names(nullptr, 0, &needed) == MP_OK);
  REQUIRE(needed > 1);
  char tiny[2];
  CHECK(mp_fixture_names(tiny, sizeof tiny, &needed) == MP_ERR_ARGUMENT);
  CHECK(mp_fixture_names(nullptr, 0, nullptr) == MP_ERR_ARGUMENT);
  std::string buf(needed, '\0');
  CHECK(mp_fixture_names(buf.data(), buf.size(), &needed) == MP_OK);
  CHECK(std::string(buf.c_str()).find("sphere-cap") != std::string::npos);
}

TEST_CASE("configuration through the C API") {
  mp_config* cfg = nullptr;
  REQUIRE(mp_config_create(&cfg) == MP_OK);
  CHECK(mp_config_set(cfg, "train.steps", "12") == MP_OK);
  char buf[64];
  size_t needed = 0;
  CHECK(mp_config_get(cfg, "train.steps", buf, sizeof buf, &needed) == MP_OK);
  CHECK(std::string(buf) == "12");
  CHECK(mp_config_set(cfg, "train.bogus", "1") == MP_ERR_CONFIG);
  CHECK(mp_config_set(cfg, "train.steps", "many") == MP_ERR_CONFIG);
  // A rejected value leaves the old one in place.
  CHECK(mp_config_get(cfg, "train.steps", buf, sizeof buf, &needed) == MP_OK);
  CHECK(std::string(buf) == "12");
  CHECK(mp_config_validate(cfg) == MP_OK);
  CHECK(mp_config_to_string(cfg, nullptr, 0, &needed) == MP_OK);
  std::string text(needed, '\0');
  CHECK(mp_config_to_string(cfg, text.data(), text.size(), &needed) == MP_OK);
  mp_config* copy = nullptr;
  CHECK(mp_config_parse(text.c_str(), &copy) == MP_OK);
  mp_config_free(copy);
  CHECK(mp_config_parse("[nope]\n", &copy) == MP_ERR_CONFIG);
  mp_config_free(cfg);
}

TEST_CASE("a full session through the C API") {
  mp_session* s = small_session(4);
  CHECK(mp_session_train(s, nullptr, nullptr) == MP_ERR_STATE);
  REQUIRE(mp_session_load_inputs(s) == MP_OK);
  mp_preprocess_summary sum{};
  REQUIRE(mp_session_preprocess(s, &sum) == MP_OK);
  CHECK(sum.hole_loops == 1);
  CHECK(sum.hole_vertices > 0);
  CHECK(sum.masked_fraction > 0.0);
  REQUIRE(mp_session_prepare(s) == MP_OK);
  CallbackState state;
  REQUIRE(mp_session_train(s, on_step, &state) == MP_OK);
  CHECK(state.calls == 4);
  CHECK(state.last_step == 4);
  REQUIRE(mp_session_evaluate(s) == MP_OK);
  mp_refine_report rep{};
  REQUIRE(mp_session_refine(s, &rep) == MP_OK);
  CHECK(rep.relative_residual <= 1e-8);

  mp_mesh* out = nullptr;
  REQUIRE(mp_session_get_mesh(s, MP_MESH_OUTPUT, &out) == MP_OK);
  const size_t n = mp_mesh_num_vertices(out);
  CHECK(n == static_cast<size_t>(sum.vertices));
  std::vector<uint8_t> mask(n);
  CHECK(mp_session_real_mask(s, mask.data()) == MP_OK);
  mp_metrics m{};
  std::vector<double> sd(n);
  CHECK(mp_session_metrics(s, MP_MESH_OUTPUT, &m, sd.data()) == MP_OK);
  CHECK(m.has_eps_hole == 1);
  CHECK(std::isfinite(m.eps_hole));
  double angle = -1.0;
  CHECK(mp_session_hole_normal_angle(s, MP_MESH_OUTPUT, &angle) == MP_OK);
  CHECK(angle >= 0.0);

  // Standalone refinement of a completion equal to M_init is a fixed point.
  mp_mesh* init = nullptr;
  REQUIRE(mp_session_get_mesh(s, MP_MESH_INIT, &init) == MP_OK);
  std::vector<double> x(3 * n), y(3 * n);
  mp_mesh_copy_vertices(init, x.data());
  CHECK(mp_refine(init, x.data(), mask.data(), 1.0, y.data(), &rep) == MP_OK);
  double worst = 0.0;
  for (size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
  CHECK(worst < 1e-9);
  double mu = 0.0;
  CHECK(mp_default_mu("cad", "", &mu) == MP_OK);
  CHECK(mu > 0.0);
  CHECK(mp_default_mu("wood", "", &mu) == MP_ERR_CONFIG);

  const std::string trace = temp_path("meshprior_capi_loss.csv");
  CHECK(mp_session_write_loss_trace(s, trace.c_str()) == MP_OK);
  std::filesystem::remove(trace);
  mp_mesh_free(init);
  mp_mesh_free(out);
  mp_session_free(s);
}

TEST_CASE("a callback can cancel training and the session resumes") {
  mp_session* s = small_session(5);
  REQUIRE(mp_session_load_inputs(s) == MP_OK);
  REQUIRE(mp_session_preprocess(s, nullptr) == MP_OK);
  REQUIRE(mp_session_prepare(s) == MP_OK);
  CallbackState state;
  state.stop_after = 2;
  CHECK(mp_session_train(s, on_step, &state) == MP_ERR_CANCELLED);
  int32_t done = 0;
  CHECK(mp_session_steps_done(s, &done) == MP_OK);
  CHECK(done == 2);
  const std::string ckpt = temp_path("meshprior_capi_ckpt.bin");
  CHECK(mp_session_save_checkpoint(s, ckpt.c_str()) == MP_OK);
  CallbackState rest;
  CHECK(mp_session_train(s, on_step, &rest) == MP_OK);
  CHECK(rest.calls == 3);

  mp_session* t = small_session(5);
  REQUIRE(mp_session_load_inputs(t) == MP_OK);
  REQUIRE(mp_session_preprocess(t, nullptr) == MP_OK);
  REQUIRE(mp_session_prepare(t) == MP_OK);
  CHECK(mp_session_load_checkpoint(t, ckpt.c_str()) == MP_OK);
  CHECK(mp_session_steps_done(t, &done) == MP_OK);
  CHECK(done == 2);
  std::filesystem::remove(ckpt);
  mp_session_free(t);
  mp_session_free(s);
}

TEST_CASE("gradient check through the C API") {
  mp_gradcheck_options o;
  mp_gradcheck_default_options(&o);
  mp_gradcheck_report r{};
  REQUIRE(mp_gradcheck(&o, &r) == MP_OK);
  CHECK(r.passed == 1);
  CHECK(r.checked > 0);
  o.corrupt_parameter = "no.such.parameter";
  CHECK(mp_gradcheck(&o, &r) != MP_OK);
}
