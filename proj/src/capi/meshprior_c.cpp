// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "meshprior/meshprior.h"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <new>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/fixtures.hpp"
#include "core/grad_check.hpp"
#include "core/mesh_io.hpp"
#include "core/pipeline.hpp"
#include "core/refine.hpp"
#include "core/session.hpp"

struct mp_mesh {
  meshprior::Mesh mesh;
};

struct mp_config {
  meshprior::RunConfig config;
};

struct mp_session {
  explicit mp_session(meshprior::RunConfig c) : session(std::move(c)) {}
  meshprior::Session session;
};

namespace {

using meshprior::Error;
using meshprior::ErrorCode;

thread_local std::string g_last_error;

// Thrown by the training callback bridge when the caller asks to stop.
struct Cancelled {};

mp_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return MP_ERR_IO;
    case ErrorCode::Format: return MP_ERR_FORMAT;
    case ErrorCode::Data: return MP_ERR_DATA;
    case ErrorCode::Structure: return MP_ERR_STRUCTURE;
    case ErrorCode::Degenerate: return MP_ERR_DEGENERATE;
    case ErrorCode::Numeric: return MP_ERR_NUMERIC;
    case ErrorCode::State: return MP_ERR_STATE;
    case ErrorCode::Config: return MP_ERR_CONFIG;
    case ErrorCode::Argument: return MP_ERR_ARGUMENT;
    case ErrorCode::Simplification: return MP_ERR_SIMPLIFICATION;
    case ErrorCode::UndefinedLoss: return MP_ERR_UNDEFINED_LOSS;
  }
  return MP_ERR_INTERNAL;
}

mp_status fail(mp_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, translating every exception into a status code.
template <typename F>
mp_status guarded(F&& body) {
  try {
    body();
    return MP_OK;
  } catch (const Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const Cancelled&) {
    return fail(MP_ERR_CANCELLED, "training stopped by the step callback");
  } catch (const std::bad_alloc&) {
    return fail(MP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MP_ERR_INTERNAL, "unknown exception");
  }
}

void require_arg(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::Argument, what);
}

void copy_string(const std::string& s, char* buffer, size_t capacity, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buffer) {
    require_arg(needed != nullptr, "buffer and needed are both null");
    return;
  }
  if (capacity < s.size() + 1) throw Error(ErrorCode::Argument, "buffer too small");
  std::memcpy(buffer, s.c_str(), s.size() + 1);
}

mp_mesh* wrap(meshprior::Mesh mesh) { return new mp_mesh{std::move(mesh)}; }

meshprior::Mesh session_mesh(const meshprior::Session& s, mp_mesh_kind kind) {
  switch (kind) {
    case MP_MESH_INPUT: return s.input();
    case MP_MESH_GROUND_TRUTH: return s.ground_truth();
    case MP_MESH_INIT: return s.init_mesh();
    case MP_MESH_SMOOTH: return s.smooth_mesh();
    case MP_MESH_COMPLETED: return s.completed_mesh();
    case MP_MESH_OUTPUT: return s.output_mesh();
  }
  throw Error(ErrorCode::Argument, "unknown mesh kind");
}

void fill_metrics(const meshprior::MetricsReport& r, mp_metrics* out) {
  *out = mp_metrics{};
  out->eps_all = r.eps_all;
  out->has_eps_hole = r.eps_hole.has_value();
  out->eps_hole = r.eps_hole.value_or(0.0);
  out->eps_all_vertex = r.eps_all_vertex;
  out->has_eps_hole_vertex = r.eps_hole_vertex.has_value();
  out->eps_hole_vertex = r.eps_hole_vertex.value_or(0.0);
  out->hole_vertices = r.hole_vertices;
}

void fill_refine(const meshprior::RefineReport& r, mp_refine_report* out) {
  out->relative_residual = r.relative_residual;
  out->iterations = r.iterations;
  out->hbar_size = r.hbar_size;
}

}  // namespace

extern "C" {

const char* mp_version(void) { return "0.1.0"; }

const char* mp_status_name(mp_status status) {
  switch (status) {
    case MP_OK: return "ok";
    case MP_ERR_IO: return "io";
    case MP_ERR_FORMAT: return "format";
    case MP_ERR_DATA: return "data";
    case MP_ERR_STRUCTURE: return "structure";
    case MP_ERR_DEGENERATE: return "degenerate";
    case MP_ERR_NUMERIC: return "numeric";
    case MP_ERR_STATE: return "state";
    case MP_ERR_CONFIG: return "config";
    case MP_ERR_ARGUMENT: return "argument";
    case MP_ERR_SIMPLIFICATION: return "simplification";
    case MP_ERR_UNDEFINED_LOSS: return "undefined-loss";
    case MP_ERR_CANCELLED: return "cancelled";
    case MP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* mp_last_error(void) { return g_last_error.c_str(); }

// ---------------------------------------------------------------------------
// Meshes

mp_status mp_mesh_load(const char* path, mp_mesh** out) {
  return guarded([&] {
    require_arg(path && out, "null argument");
    *out = wrap(meshprior::load_mesh(path));
  });
}

mp_status mp_mesh_create(const double* vertices, size_t num_vertices, const int32_t* faces, size_t num_faces,
                         mp_mesh** out) {
  return guarded([&] {
    require_arg(out && (vertices || num_vertices == 0) && (faces || num_faces == 0), "null argument");
    meshprior::Positions v(static_cast<Eigen::Index>(num_vertices), 3);
    std::copy(vertices, vertices + 3 * num_vertices, v.data());
    meshprior::FaceArray f(static_cast<Eigen::Index>(num_faces), 3);
    std::copy(faces, faces + 3 * num_faces, f.data());
    *out = wrap(meshprior::Mesh(std::move(v), std::move(f)));
  });
}

mp_status mp_mesh_save(const mp_mesh* mesh, const char* path, const double* scalars) {
  return guarded([&] {
    require_arg(mesh && path, "null argument");
    if (scalars) {
      const Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(scalars, mesh->mesh.num_vertices());
      meshprior::save_mesh(mesh->mesh, path, &s);
    } else {
      meshprior::save_mesh(mesh->mesh, path);
    }
  });
}

size_t mp_mesh_num_vertices(const mp_mesh* mesh) { return mesh ? static_cast<size_t>(mesh->mesh.num_vertices()) : 0; }

size_t mp_mesh_num_faces(const mp_mesh* mesh) { return mesh ? static_cast<size_t>(mesh->mesh.num_faces()) : 0; }

mp_status mp_mesh_copy_vertices(const mp_mesh* mesh, double* out) {
  return guarded([&] {
    require_arg(mesh && out, "null argument");
    const auto& v = mesh->mesh.vertices();
    std::copy(v.data(), v.data() + v.size(), out);
  });
}

mp_status mp_mesh_copy_faces(const mp_mesh* mesh, int32_t* out) {
  return guarded([&] {
    require_arg(mesh && out, "null argument");
    const auto& f = mesh->mesh.faces();
    std::copy(f.data(), f.data() + f.size(), out);
  });
}

mp_status mp_mesh_boundary_loops(const mp_mesh* mesh, size_t* count) {
  return guarded([&] {
    require_arg(mesh && count, "null argument");
    *count = meshprior::boundary_loops(mesh->mesh).size();
  });
}

void mp_mesh_free(mp_mesh* mesh) { delete mesh; }

mp_status mp_fixture(const char* name, mp_mesh** damaged, mp_mesh** ground_truth) {
  return guarded([&] {
    require_arg(name != nullptr, "null argument");
    meshprior::Fixture fx = meshprior::make_fixture(name);
    if (damaged) *damaged = wrap(std::move(fx.damaged));
    if (ground_truth) *ground_truth = wrap(std::move(fx.ground_truth));
  });
}

mp_status mp_fixture_names(char* buffer, size_t capacity, size_t* needed) {
  return guarded([&] {
    std::string s;
    for (const auto& n : meshprior::fixture_names()) s += (s.empty() ? "" : ",") + n;
    copy_string(s, buffer, capacity, needed);
  });
}

// ---------------------------------------------------------------------------
// Configuration

mp_status mp_config_create(mp_config** out) {
  return guarded([&] {
    require_arg(out != nullptr, "null argument");
    *out = new mp_config{};
  });
}

mp_status mp_config_load(const char* path, mp_config** out) {
  return guarded([&] {
    require_arg(path && out, "null argument");
    *out = new mp_config{meshprior::load_config(path)};
  });
}

mp_status mp_config_parse(const char* text, mp_config** out) {
  return guarded([&] {
    require_arg(text && out, "null argument");
    std::istringstream in(text);
    *out = new mp_config{meshprior::parse_config(in)};
  });
}

mp_status mp_config_set(mp_config* config, const char* key, const char* value) {
  return guarded([&] {
    require_arg(config && key && value, "null argument");
    // Apply to a copy so a rejected value leaves the config untouched.
    meshprior::RunConfig next = config->config;
    meshprior::set_config_value(next, key, value);
    config->config = std::move(next);
  });
}

mp_status mp_config_get(const mp_config* config, const char* key, char* buffer, size_t capacity, size_t* needed) {
  return guarded([&] {
    require_arg(config && key, "null argument");
    copy_string(meshprior::get_config_value(config->config, key), buffer, capacity, needed);
  });
}

mp_status mp_config_validate(const mp_config* config) {
  return guarded([&] {
    require_arg(config != nullptr, "null argument");
    meshprior::validate_config(config->config);
  });
}

mp_status mp_config_to_string(const mp_config* config, char* buffer, size_t capacity, size_t* needed) {
  return guarded([&] {
    require_arg(config != nullptr, "null argument");
    copy_string(meshprior::config_to_string(config->config), buffer, capacity, needed);
  });
}

mp_status mp_config_write(const mp_config* config, const char* path) {
  return guarded([&] {
    require_arg(config && path, "null argument");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, std::string("cannot open '") + path + "' for writing");
    meshprior::write_config(out, config->config);
    if (!out) throw Error(ErrorCode::Io, std::string("write failed for '") + path + "'");
  });
}

void mp_config_free(mp_config* config) { delete config; }

// ---------------------------------------------------------------------------
// Sessions

mp_status mp_session_create(const mp_config* config, mp_session** out) {
  return guarded([&] {
    require_arg(config && out, "null argument");
    *out = new mp_session(config->config);
  });
}

mp_status mp_session_load_inputs(mp_session* session) {
  return guarded([&] {
    require_arg(session != nullptr, "null argument");
    session->session.load_inputs();
  });
}

mp_status mp_session_set_input(mp_session* session, const mp_mesh* mesh) {
  return guarded([&] {
    require_arg(session && mesh, "null argument");
    session->session.set_input(mesh->mesh);
  });
}

mp_status mp_session_set_ground_truth(mp_session* session, const mp_mesh* mesh) {
  return guarded([&] {
    require_arg(session && mesh, "null argument");
    session->session.set_ground_truth(mesh->mesh);
  });
}

mp_status mp_session_preprocess(mp_session* session, mp_preprocess_summary* summary) {
  return guarded([&] {
    require_arg(session != nullptr, "null argument");
    auto& s = session->session;
    s.preprocess();
    if (!summary) return;
    const auto& pre = s.preprocess_result();
    *summary = mp_preprocess_summary{};
    summary->input_vertices = s.input().num_vertices();
    summary->input_faces = s.input().num_faces();
    summary->hole_loops = pre.hole_loops;
    summary->vertices = pre.init_mesh.num_vertices();
    summary->faces = pre.init_mesh.num_faces();
    const auto mask = pre.real_mask.vertex_mask();
    summary->hole_vertices = static_cast<int32_t>(std::count(mask.begin(), mask.end(), 0));
    summary->masked_fraction = pre.real_mask.masked_fraction();
    summary->target_edge_length = pre.target_edge_length;
  });
}

mp_status mp_session_prepare(mp_session* session) {
  return guarded([&] {
    require_arg(session != nullptr, "null argument");
    session->session.prepare_training();
  });
}

mp_status mp_session_train(mp_session* session, mp_step_callback callback, void* user_data) {
  return guarded([&] {
    require_arg(session != nullptr, "null argument");
    meshprior::StepCallback bridge;
    if (callback) {
      bridge = [callback, user_data](const meshprior::LossRecord& r) {
        mp_loss_record rec{};
        rec.step = r.step;
        rec.lr = r.lr;
        rec.levels = static_cast<int32_t>(r.pos.size());
        rec.pos = r.pos.data();
        rec.nrm = r.nrm;
        rec.reg = r.reg;
        rec.total = r.total;
        if (callback(&rec, user_data) != 0) throw Cancelled{};
      };
    }
    session->session.train(bridge);
  });
}

mp_status mp_session_steps_done(const mp_session* session, int32_t* steps) {
  return guarded([&] {
    require_arg(session && steps, "null argument");
    *steps = session->session.steps_done();
  });
}

mp_status mp_session_evaluate(mp_session* session) {
  return guarded([&] {
    require_arg(session != nullptr, "null argument");
    session->session.evaluate();
  });
}

mp_status mp_session_refine(mp_session* session, mp_refine_report* report) {
  return guarded([&] {
    require_arg(session != nullptr, "null argument");
    session->session.refine();
    if (report) fill_refine(session->session.refine_report(), report);
  });
}

mp_status mp_session_get_mesh(const mp_session* session, mp_mesh_kind kind, mp_mesh** out) {
  return guarded([&] {
    require_arg(session && out, "null argument");
    *out = wrap(session_mesh(session->session, kind));
  });
}

mp_status mp_session_real_mask(const mp_session* session, uint8_t* out) {
  return guarded([&] {
    require_arg(session && out, "null argument");
    const auto mask = session->session.real_mask();
    std::copy(mask.begin(), mask.end(), out);
  });
}

mp_status mp_session_displacement(const mp_session* session, double* out) {
  return guarded([&] {
    require_arg(session && out, "null argument");
    const auto& d = session->session.preprocess_result().displacement;
    std::copy(d.data(), d.data() + d.size(), out);
  });
}

mp_status mp_session_mask_fraction(const mp_session* session, double* fraction) {
  return guarded([&] {
    require_arg(session && fraction, "null argument");
    const auto& masks = session->session.mask_sets();
    double sum = 0.0;
    for (const auto& m : masks) sum += m.masked_fraction();
    *fraction = masks.empty() ? 0.0 : sum / static_cast<double>(masks.size());
  });
}

mp_status mp_session_metrics(const mp_session* session, mp_mesh_kind kind, mp_metrics* metrics,
                             double* signed_distance) {
  return guarded([&] {
    require_arg(session && metrics, "null argument");
    require_arg(kind != MP_MESH_INPUT && kind != MP_MESH_GROUND_TRUTH, "metrics need a mesh on M_init");
    const auto report = session->session.metrics(session_mesh(session->session, kind));
    fill_metrics(report, metrics);
    if (signed_distance) std::copy(report.signed_distance.begin(), report.signed_distance.end(), signed_distance);
  });
}

mp_status mp_session_hole_normal_angle(const mp_session* session, mp_mesh_kind kind, double* radians) {
  return guarded([&] {
    require_arg(session && radians, "null argument");
    require_arg(kind != MP_MESH_INPUT && kind != MP_MESH_GROUND_TRUTH, "angles need a mesh on M_init");
    const auto& s = session->session;
    auto hole = s.real_mask();
    for (auto& m : hole) m = !m;
    *radians = meshprior::mean_normal_angle(session_mesh(s, kind), s.ground_truth(), hole);
  });
}

mp_status mp_session_write_loss_trace(const mp_session* session, const char* path) {
  return guarded([&] {
    require_arg(session && path, "null argument");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, std::string("cannot open '") + path + "' for writing");
    session->session.write_loss_trace(out);
    if (!out) throw Error(ErrorCode::Io, std::string("write failed for '") + path + "'");
  });
}

mp_status mp_session_save_checkpoint(const mp_session* session, const char* path) {
  return guarded([&] {
    require_arg(session && path, "null argument");
    session->session.save_checkpoint(path);
  });
}

mp_status mp_session_load_checkpoint(mp_session* session, const char* path) {
  return guarded([&] {
    require_arg(session && path, "null argument");
    session->session.load_checkpoint(path);
  });
}

void mp_session_free(mp_session* session) { delete session; }

// ---------------------------------------------------------------------------
// Standalone operations

mp_status mp_metrics_compute(const mp_mesh* output, const mp_mesh* ground_truth, const uint8_t* hole_mask,
                             int nearest_vertex, mp_metrics* metrics, double* signed_distance) {
  return guarded([&] {
    require_arg(output && ground_truth && metrics, "null argument");
    std::span<const std::uint8_t> mask;
    if (hole_mask) mask = {hole_mask, static_cast<size_t>(output->mesh.num_vertices())};
    const auto report = meshprior::compute_metrics(output->mesh, ground_truth->mesh, mask, nearest_vertex != 0);
    fill_metrics(report, metrics);
    if (signed_distance) std::copy(report.signed_distance.begin(), report.signed_distance.end(), signed_distance);
  });
}

mp_status mp_refine(const mp_mesh* init, const double* completed, const uint8_t* mask, double mu, double* out,
                    mp_refine_report* report) {
  return guarded([&] {
    require_arg(init && completed && mask && out, "null argument");
    const auto n = init->mesh.num_vertices();
    const meshprior::Positions cmp = Eigen::Map<const meshprior::Positions>(completed, n, 3);
    meshprior::RefineOptions options;
    options.mu = mu;
    meshprior::RefineReport r;
    const meshprior::Positions x = meshprior::refine(init->mesh, init->mesh.vertices(), cmp,
                                                     {mask, static_cast<size_t>(n)}, options, &r);
    std::copy(x.data(), x.data() + x.size(), out);
    if (report) fill_refine(r, report);
  });
}

mp_status mp_default_mu(const char* type, const char* mesh_name, double* mu) {
  return guarded([&] {
    require_arg(type && mu, "null argument");
    *mu = meshprior::named_mu(mesh_name ? mesh_name : "", meshprior::parse_mesh_type(type));
  });
}

void mp_gradcheck_default_options(mp_gradcheck_options* options) {
  if (!options) return;
  const meshprior::GradCheckOptions d;
  options->arch = MP_ARCH_SGCN;
  options->width = d.width;
  options->h = d.h;
  options->tolerance = d.tolerance;
  options->abs_floor = d.abs_floor;
  options->seed = d.seed;
  options->warmup_steps = d.warmup_steps;
  options->freeze_activations = d.freeze_activations ? 1 : 0;
  options->corrupt_parameter = nullptr;
}

mp_status mp_gradcheck(const mp_gradcheck_options* options, mp_gradcheck_report* report) {
  return guarded([&] {
    require_arg(options && report, "null argument");
    require_arg(options->arch == MP_ARCH_SGCN || options->arch == MP_ARCH_MGCN, "unknown architecture");
    meshprior::GradCheckOptions o;
    o.arch = options->arch == MP_ARCH_MGCN ? meshprior::Architecture::Mgcn : meshprior::Architecture::Sgcn;
    o.width = options->width;
    o.h = options->h;
    o.tolerance = options->tolerance;
    o.abs_floor = options->abs_floor;
    o.seed = options->seed;
    o.warmup_steps = options->warmup_steps;
    o.freeze_activations = options->freeze_activations != 0;
    if (options->corrupt_parameter) o.corrupt_parameter = options->corrupt_parameter;
    const meshprior::GradCheckReport r = meshprior::grad_check(o);
    *report = mp_gradcheck_report{};
    report->passed = r.passed;
    report->max_rel_error = r.max_rel_error;
    std::snprintf(report->worst_parameter, sizeof report->worst_parameter, "%s", r.worst_parameter.c_str());
    report->worst_entry = r.worst_entry;
    report->analytic = r.analytic;
    report->numeric = r.numeric;
    report->checked = r.checked;
    report->parameters = r.parameters;
    report->seconds = r.seconds;
  });
}

}  // extern "C"
