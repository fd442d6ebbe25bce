// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "meshprior/meshprior.h"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitError = 3;
constexpr int kExitTrainingAborted = 4;

struct Failure : std::runtime_error {
  Failure(int code, const std::string& what) : std::runtime_error(what), exit_code(code) {}
  int exit_code;
};

void check(mp_status s, const std::string& context) {
  if (s == MP_OK) return;
  throw Failure(kExitError, context + ": " + mp_status_name(s) + " error: " + mp_last_error());
}

struct MeshDeleter {
  void operator()(mp_mesh* m) const { mp_mesh_free(m); }
};
struct ConfigDeleter {
  void operator()(mp_config* c) const { mp_config_free(c); }
};
struct SessionDeleter {
  void operator()(mp_session* s) const { mp_session_free(s); }
};
using MeshPtr = std::unique_ptr<mp_mesh, MeshDeleter>;
using ConfigPtr = std::unique_ptr<mp_config, ConfigDeleter>;
using SessionPtr = std::unique_ptr<mp_session, SessionDeleter>;

MeshPtr load_mesh(const std::string& path) {
  mp_mesh* m = nullptr;
  check(mp_mesh_load(path.c_str(), &m), "loading '" + path + "'");
  return MeshPtr(m);
}

MeshPtr session_mesh(const mp_session* s, mp_mesh_kind kind) {
  mp_mesh* m = nullptr;
  check(mp_session_get_mesh(s, kind, &m), "fetching mesh");
  return MeshPtr(m);
}

void save_mesh(const mp_mesh* m, const fs::path& path, const double* scalars = nullptr) {
  check(mp_mesh_save(m, path.string().c_str(), scalars), "writing '" + path.string() + "'");
}

std::string config_get(const mp_config* c, const std::string& key) {
  size_t needed = 0;
  check(mp_config_get(c, key.c_str(), nullptr, 0, &needed), "reading " + key);
  std::string s(needed, '\0');
  check(mp_config_get(c, key.c_str(), s.data(), s.size(), &needed), "reading " + key);
  s.resize(needed - 1);
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure(kExitError, "cannot write '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// One byte per line, 1 = known, 0 = hole.
void write_mask(const fs::path& path, const std::vector<std::uint8_t>& mask) {
  std::string s;
  s.reserve(mask.size() * 2);
  for (auto m : mask) s += m ? "1\n" : "0\n";
  write_text(path, s);
}

std::vector<std::uint8_t> read_mask(const std::string& path, size_t expected) {
  std::ifstream in(path);
  if (!in) throw Failure(kExitError, "cannot open mask '" + path + "'");
  std::vector<std::uint8_t> mask;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line != "0" && line != "1") throw Failure(kExitError, "mask '" + path + "': lines must be 0 or 1");
    mask.push_back(line == "1");
  }
  if (mask.size() != expected) {
    throw Failure(kExitError, "mask '" + path + "' has " + std::to_string(mask.size()) + " entries, mesh has " +
                                  std::to_string(expected) + " vertices");
  }
  return mask;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json metrics_json(const mp_metrics& m) {
  json j;
  j["eps_all"] = m.eps_all;
  j["eps_hole"] = m.has_eps_hole ? json(m.eps_hole) : json(nullptr);
  j["hole_vertices"] = m.hole_vertices;
  if (m.eps_all_vertex > 0 || m.has_eps_hole_vertex) {
    j["eps_all_vertex"] = m.eps_all_vertex;
    j["eps_hole_vertex"] = m.has_eps_hole_vertex ? json(m.eps_hole_vertex) : json(nullptr);
  }
  return j;
}

json refine_json(const mp_refine_report& r) {
  return json{{"relative_residual", r.relative_residual}, {"iterations", r.iterations}, {"hbar_size", r.hbar_size}};
}

// ---------------------------------------------------------------------------
// Run configuration shared by preprocess and inpaint

struct RunFlags {
  std::string config_path;
  std::string input;
  std::string gt;
  std::string out;
  std::string arch;
  std::string type;
  std::optional<long long> steps;
  std::optional<unsigned long long> seed;
  std::optional<double> mu;
  std::optional<double> p;
  std::optional<int> k;
  std::optional<int> mask_sets;
  std::vector<std::string> sets;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--input", f.input, "Input mesh (.obj/.ply) or fixture:NAME");
  cmd->add_option("--gt", f.gt, "Ground-truth mesh or fixture:NAME (enables metrics)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--arch", f.arch, "Network architecture")->check(CLI::IsMember({"sgcn", "mgcn"}));
  cmd->add_option("--type", f.type, "Mesh type (selects loss weights)")
      ->check(CLI::IsMember({"cad", "noncad", "realscan"}));
  cmd->add_option("--steps", f.steps, "Optimization steps");
  cmd->add_option("--seed", f.seed, "Global RNG seed");
  cmd->add_option("--mu", f.mu, "Refinement weight");
  cmd->add_option("--p", f.p, "Fake-hole seed probability");
  cmd->add_option("--k", f.k, "Fake-hole ring size");
  cmd->add_option("--mask-sets", f.mask_sets, "Number of fake-hole mask sets");
  cmd->add_option("--set", f.sets, "Override any config key: section.key=value (repeatable)");
}

// File values first, then flags.
ConfigPtr build_config(const RunFlags& f) {
  mp_config* raw = nullptr;
  if (f.config_path.empty()) {
    check(mp_config_create(&raw), "creating config");
  } else {
    check(mp_config_load(f.config_path.c_str(), &raw), "loading config");
  }
  ConfigPtr c(raw);
  auto set = [&](const std::string& key, const std::string& value) {
    check(mp_config_set(c.get(), key.c_str(), value.c_str()), "setting " + key);
  };
  if (!f.input.empty()) set("run.input", f.input);
  if (!f.gt.empty()) set("run.ground_truth", f.gt);
  if (!f.out.empty()) set("run.output_dir", f.out);
  if (!f.arch.empty()) set("run.arch", f.arch);
  if (!f.type.empty()) set("run.type", f.type);
  if (f.steps) set("train.steps", std::to_string(*f.steps));
  if (f.seed) set("run.seed", std::to_string(*f.seed));
  if (f.mu) set("refine.mu", num(*f.mu));
  if (f.p) set("augment.p", num(*f.p));
  if (f.k) set("augment.k", std::to_string(*f.k));
  if (f.mask_sets) set("augment.sets", std::to_string(*f.mask_sets));
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Failure(kExitUsage, "--set expects section.key=value, got '" + kv + "'");
    set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  check(mp_config_validate(c.get()), "config");
  if (config_get(c.get(), "run.input").empty()) throw Failure(kExitUsage, "no input: pass --input or set run.input");
  if (config_get(c.get(), "run.output_dir").empty()) {
    throw Failure(kExitUsage, "no output directory: pass --out or set run.output_dir");
  }
  return c;
}

fs::path prepare_output_dir(const mp_config* c) {
  const fs::path dir = config_get(c, "run.output_dir");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure(kExitError, "cannot create '" + dir.string() + "': " + ec.message());
  check(mp_config_write(c, (dir / "config.ini").string().c_str()), "writing config");
  return dir;
}

SessionPtr start_session(const mp_config* c, mp_preprocess_summary& summary) {
  mp_session* raw = nullptr;
  check(mp_session_create(c, &raw), "creating session");
  SessionPtr s(raw);
  check(mp_session_load_inputs(s.get()), "loading inputs");
  check(mp_session_preprocess(s.get(), &summary), "preprocess");
  return s;
}

void print_summary(const mp_preprocess_summary& s) {
  std::printf("input: %d vertices, %d faces, %d hole%s\n", s.input_vertices, s.input_faces, s.hole_loops,
              s.hole_loops == 1 ? "" : "s");
  std::printf("M_init: %d vertices, %d faces, %d hole vertices (%.2f%% masked), edge length %.6g\n", s.vertices,
              s.faces, s.hole_vertices, 100.0 * s.masked_fraction, s.target_edge_length);
}

std::vector<std::uint8_t> session_mask(const mp_session* s, size_t n) {
  std::vector<std::uint8_t> mask(n);
  check(mp_session_real_mask(s, mask.data()), "reading mask");
  return mask;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_preprocess(const RunFlags& f) {
  ConfigPtr c = build_config(f);
  const fs::path dir = prepare_output_dir(c.get());
  mp_preprocess_summary summary{};
  SessionPtr s = start_session(c.get(), summary);
  print_summary(summary);

  MeshPtr init = session_mesh(s.get(), MP_MESH_INIT);
  MeshPtr smooth = session_mesh(s.get(), MP_MESH_SMOOTH);
  save_mesh(init.get(), dir / "init.obj");
  save_mesh(smooth.get(), dir / "smooth.obj");
  const size_t n = mp_mesh_num_vertices(init.get());
  write_mask(dir / "real_mask.txt", session_mask(s.get(), n));

  std::vector<double> d(3 * n);
  check(mp_session_displacement(s.get(), d.data()), "reading displacement");
  std::string csv = "dx,dy,dz\n";
  for (size_t i = 0; i < n; ++i) csv += num(d[3 * i]) + "," + num(d[3 * i + 1]) + "," + num(d[3 * i + 2]) + "\n";
  write_text(dir / "displacement.csv", csv);

  write_json(dir / "preprocess.json", json{{"input_vertices", summary.input_vertices},
                                           {"input_faces", summary.input_faces},
                                           {"holes", summary.hole_loops},
                                           {"vertices", summary.vertices},
                                           {"faces", summary.faces},
                                           {"hole_vertices", summary.hole_vertices},
                                           {"masked_fraction", summary.masked_fraction},
                                           {"target_edge_length", summary.target_edge_length}});
  std::printf("wrote %s\n", dir.string().c_str());
  return kExitOk;
}

struct Progress {
  int every = 10;
  bool quiet = false;
};

int on_step(const mp_loss_record* r, void* user) {
  const auto* p = static_cast<const Progress*>(user);
  if (p->quiet || (r->step != 1 && r->step % p->every != 0)) return 0;
  std::printf("step %4d  lr %.4g  e_pos %.6g  e_nrm %.6g  e_reg %.6g  total %.6g\n", r->step, r->lr, r->pos[0],
              r->nrm, r->reg, r->total);
  std::fflush(stdout);
  return 0;
}

int cmd_inpaint(const RunFlags& f, const std::string& resume, const Progress& progress) {
  const auto t0 = std::chrono::steady_clock::now();
  ConfigPtr c = build_config(f);
  const fs::path dir = prepare_output_dir(c.get());
  mp_preprocess_summary summary{};
  SessionPtr s = start_session(c.get(), summary);
  if (!progress.quiet) print_summary(summary);
  check(mp_session_prepare(s.get()), "preparing training");
  if (!resume.empty()) {
    check(mp_session_load_checkpoint(s.get(), resume.c_str()), "loading checkpoint");
    int32_t done = 0;
    check(mp_session_steps_done(s.get(), &done), "reading step count");
    if (!progress.quiet) std::printf("resuming after step %d\n", done);
  }

  const fs::path trace_path = dir / "loss.csv";
  const fs::path checkpoint_path = dir / "checkpoint.bin";
  const mp_status trained = mp_session_train(s.get(), on_step, const_cast<Progress*>(&progress));
  if (trained != MP_OK) {
    const std::string message = mp_last_error();
    mp_session_write_loss_trace(s.get(), trace_path.string().c_str());
    mp_session_save_checkpoint(s.get(), checkpoint_path.string().c_str());
    throw Failure(kExitTrainingAborted, std::string("training aborted (") + mp_status_name(trained) +
                                            "): " + message + "; loss trace and checkpoint in " + dir.string());
  }
  check(mp_session_write_loss_trace(s.get(), trace_path.string().c_str()), "writing loss trace");
  check(mp_session_save_checkpoint(s.get(), checkpoint_path.string().c_str()), "writing checkpoint");

  check(mp_session_evaluate(s.get()), "evaluate");
  mp_refine_report rr{};
  check(mp_session_refine(s.get(), &rr), "refine");

  MeshPtr init = session_mesh(s.get(), MP_MESH_INIT);
  MeshPtr cmp = session_mesh(s.get(), MP_MESH_COMPLETED);
  MeshPtr out = session_mesh(s.get(), MP_MESH_OUTPUT);
  save_mesh(init.get(), dir / "init.obj");
  save_mesh(cmp.get(), dir / "completed.obj");
  save_mesh(out.get(), dir / "output.obj");
  const size_t n = mp_mesh_num_vertices(init.get());
  write_mask(dir / "real_mask.txt", session_mask(s.get(), n));

  json report;
  report["steps"] = std::stoi(config_get(c.get(), "train.steps"));
  report["refine"] = refine_json(rr);
  if (!config_get(c.get(), "run.ground_truth").empty()) {
    json metrics;
    std::vector<double> signed_distance(n);
    for (auto [kind, name] : {std::pair{MP_MESH_INIT, "init"}, std::pair{MP_MESH_SMOOTH, "smooth"},
                              std::pair{MP_MESH_COMPLETED, "completed"}, std::pair{MP_MESH_OUTPUT, "output"}}) {
      mp_metrics m{};
      check(mp_session_metrics(s.get(), kind, &m, signed_distance.data()), std::string("metrics of ") + name);
      metrics[name] = metrics_json(m);
    }
    report["metrics"] = metrics;
    // signed_distance now holds the output mesh's values.
    save_mesh(out.get(), dir / "error.ply", signed_distance.data());
    const auto& mo = report["metrics"]["output"];
    const auto& mi = report["metrics"]["init"];
    std::printf("eps_all %.6g -> %.6g, eps_hole %s -> %s (x1e-3 bbox diagonal)\n", mi["eps_all"].get<double>(),
                mo["eps_all"].get<double>(), mi["eps_hole"].dump().c_str(), mo["eps_hole"].dump().c_str());
  }
  write_json(dir / "metrics.json", report);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("refine residual %.3g, wrote %s in %.1f s\n", rr.relative_residual, dir.string().c_str(), seconds);
  return kExitOk;
}

struct RefineFlags {
  std::string init;
  std::string completed;
  std::string mask;
  std::string out;
  std::string type = "noncad";
  std::string mesh_name;
  std::optional<double> mu;
};

int cmd_refine(const RefineFlags& f) {
  MeshPtr init = load_mesh(f.init);
  MeshPtr cmp = load_mesh(f.completed);
  const size_t n = mp_mesh_num_vertices(init.get());
  if (mp_mesh_num_vertices(cmp.get()) != n) {
    throw Failure(kExitError, "completed mesh has a different vertex count than the initial mesh");
  }
  const auto mask = read_mask(f.mask, n);
  double mu = 0.0;
  if (f.mu) {
    mu = *f.mu;
  } else {
    check(mp_default_mu(f.type.c_str(), f.mesh_name.c_str(), &mu), "refinement weight");
  }
  std::vector<double> x(3 * n);
  check(mp_mesh_copy_vertices(cmp.get(), x.data()), "reading vertices");
  std::vector<std::int32_t> faces(3 * mp_mesh_num_faces(init.get()));
  check(mp_mesh_copy_faces(init.get(), faces.data()), "reading faces");
  std::vector<double> out(3 * n);
  mp_refine_report rr{};
  check(mp_refine(init.get(), x.data(), mask.data(), mu, out.data(), &rr), "refine");
  mp_mesh* raw = nullptr;
  check(mp_mesh_create(out.data(), n, faces.data(), faces.size() / 3, &raw), "building output");
  MeshPtr result(raw);

  const fs::path dir = f.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure(kExitError, "cannot create '" + dir.string() + "': " + ec.message());
  save_mesh(result.get(), dir / "output.obj");
  json report = refine_json(rr);
  report["mu"] = mu;
  write_json(dir / "refine.json", report);
  std::printf("mu %.6g, residual %.3g after %d iterations, |H-bar| = %d\n", mu, rr.relative_residual, rr.iterations,
              rr.hbar_size);
  return kExitOk;
}

struct EvalFlags {
  std::string output;
  std::string gt;
  std::string mask;
  std::string out;
  bool nearest_vertex = false;
};

int cmd_eval(const EvalFlags& f) {
  MeshPtr output = load_mesh(f.output);
  MeshPtr gt = load_mesh(f.gt);
  const size_t n = mp_mesh_num_vertices(output.get());
  std::vector<std::uint8_t> mask;
  if (!f.mask.empty()) mask = read_mask(f.mask, n);
  mp_metrics m{};
  std::vector<double> signed_distance(n);
  check(mp_metrics_compute(output.get(), gt.get(), mask.empty() ? nullptr : mask.data(), f.nearest_vertex, &m,
                           signed_distance.data()),
        "metrics");
  const fs::path dir = f.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure(kExitError, "cannot create '" + dir.string() + "': " + ec.message());
  write_json(dir / "metrics.json", metrics_json(m));
  save_mesh(output.get(), dir / "error.ply", signed_distance.data());
  std::printf("eps_all %.6g, eps_hole %s (x1e-3 bbox diagonal)\n", m.eps_all,
              m.has_eps_hole ? num(m.eps_hole).c_str() : "n/a");
  return kExitOk;
}

struct GradFlags {
  std::string arch = "sgcn";
  int width = 0;
  double h = 0.0;
  double tolerance = 0.0;
  int warmup = -1;
  unsigned long long seed = 0;
  bool seed_set = false;
  bool corrupt = false;
  std::string corrupt_param = "block00.cheb.W0";
  bool no_freeze = false;
  std::string json_path;
};

int cmd_gradcheck(const GradFlags& f) {
  mp_gradcheck_options o;
  mp_gradcheck_default_options(&o);
  o.arch = f.arch == "mgcn" ? MP_ARCH_MGCN : MP_ARCH_SGCN;
  if (f.width > 0) o.width = f.width;
  if (f.h > 0) o.h = f.h;
  if (f.tolerance > 0) o.tolerance = f.tolerance;
  if (f.warmup >= 0) o.warmup_steps = f.warmup;
  if (f.seed_set) o.seed = f.seed;
  if (f.no_freeze) o.freeze_activations = 0;
  if (f.corrupt) o.corrupt_parameter = f.corrupt_param.c_str();
  mp_gradcheck_report r{};
  check(mp_gradcheck(&o, &r), "gradcheck");
  std::printf("gradcheck %s %s: max rel error %.3g (tolerance %.3g) over %lld entries of %d parameters, %.1f s\n",
              f.arch.c_str(), r.passed ? "PASS" : "FAIL", r.max_rel_error, o.tolerance,
              static_cast<long long>(r.checked), r.parameters, r.seconds);
  if (!r.passed) {
    std::printf("offending parameter: %s entry %d (analytic %.9g, numeric %.9g)\n", r.worst_parameter,
                r.worst_entry, r.analytic, r.numeric);
  }
  if (!f.json_path.empty()) {
    write_json(f.json_path, json{{"arch", f.arch},
                                 {"passed", r.passed != 0},
                                 {"max_rel_error", r.max_rel_error},
                                 {"tolerance", o.tolerance},
                                 {"worst_parameter", r.worst_parameter},
                                 {"worst_entry", r.worst_entry},
                                 {"analytic", r.analytic},
                                 {"numeric", r.numeric},
                                 {"checked", r.checked},
                                 {"parameters", r.parameters}});
  }
  return r.passed ? kExitOk : kExitCheckFailed;
}

int cmd_fixture(const std::string& name, const std::string& out, bool list) {
  if (list || name.empty()) {
    size_t needed = 0;
    check(mp_fixture_names(nullptr, 0, &needed), "fixtures");
    std::string names(needed, '\0');
    check(mp_fixture_names(names.data(), names.size(), &needed), "fixtures");
    names.resize(needed - 1);
    std::printf("%s\n", names.c_str());
    return kExitOk;
  }
  mp_mesh* d = nullptr;
  mp_mesh* g = nullptr;
  check(mp_fixture(name.c_str(), &d, &g), "fixture");
  MeshPtr damaged(d);
  MeshPtr gt(g);
  const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure(kExitError, "cannot create '" + dir.string() + "': " + ec.message());
  save_mesh(damaged.get(), dir / (name + "-damaged.obj"));
  save_mesh(gt.get(), dir / (name + "-gt.obj"));
  size_t loops = 0;
  check(mp_mesh_boundary_loops(damaged.get(), &loops), "boundary loops");
  std::printf("%s: %zu vertices, %zu boundary loop%s; ground truth %zu vertices\n", name.c_str(),
              mp_mesh_num_vertices(damaged.get()), loops, loops == 1 ? "" : "s", mp_mesh_num_vertices(gt.get()));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised mesh inpainting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mp_version()));

  RunFlags run;
  auto* pre = app.add_subcommand("preprocess", "Fill, remesh and smooth; write M_init, smooth mesh, mask, displacement");
  add_run_flags(pre, run);

  auto* inpaint = app.add_subcommand("inpaint", "Full run: preprocess, train, evaluate, refine");
  add_run_flags(inpaint, run);
  std::string resume;
  Progress progress;
  inpaint->add_option("--resume", resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
  inpaint->add_option("--progress-every", progress.every, "Print losses every N steps")->check(CLI::PositiveNumber);
  inpaint->add_flag("--quiet", progress.quiet, "No per-step output");

  RefineFlags rf;
  auto* refine = app.add_subcommand("refine", "Refine a completed mesh against the initial mesh");
  refine->add_option("--init", rf.init, "M_init mesh")->required()->check(CLI::ExistingFile);
  refine->add_option("--cmp", rf.completed, "Completed mesh (same connectivity)")->required()->check(CLI::ExistingFile);
  refine->add_option("--mask", rf.mask, "Real-hole mask file, one 0/1 per vertex")->required()->check(CLI::ExistingFile);
  refine->add_option("--out", rf.out, "Output directory")->required();
  refine->add_option("--type", rf.type, "Mesh type for the default weight")
      ->check(CLI::IsMember({"cad", "noncad", "realscan"}));
  refine->add_option("--mesh-name", rf.mesh_name, "Mesh name for a per-mesh default weight");
  refine->add_option("--mu", rf.mu, "Refinement weight");

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "Distances of a mesh to a ground-truth surface");
  eval->add_option("--output", ef.output, "Mesh to evaluate")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", ef.gt, "Ground-truth mesh")->required()->check(CLI::ExistingFile);
  eval->add_option("--mask", ef.mask, "Hole mask file, one 0/1 per vertex")->check(CLI::ExistingFile);
  eval->add_option("--out", ef.out, "Output directory")->required();
  eval->add_flag("--nearest-vertex", ef.nearest_vertex, "Also report nearest-vertex distances");

  GradFlags gf;
  auto* grad = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  grad->add_option("--arch", gf.arch, "Network architecture")->check(CLI::IsMember({"sgcn", "mgcn"}));
  grad->add_option("--width", gf.width, "Hidden width")->check(CLI::PositiveNumber);
  grad->add_option("--step-size", gf.h, "Finite-difference step h")->check(CLI::PositiveNumber);
  grad->add_option("--tolerance", gf.tolerance, "Maximum relative error")->check(CLI::PositiveNumber);
  grad->add_option("--warmup", gf.warmup, "Training steps before the check")->check(CLI::NonNegativeNumber);
  grad->add_option("--seed", gf.seed, "Model seed")->each([&](const std::string&) { gf.seed_set = true; });
  grad->add_flag("--corrupt", gf.corrupt, "Perturb one analytic gradient (the check must fail)");
  grad->add_option("--corrupt-param", gf.corrupt_param, "Parameter perturbed by --corrupt");
  grad->add_flag("--no-freeze", gf.no_freeze, "Let activation and sign patterns change during differencing");
  grad->add_option("--json", gf.json_path, "Also write the report as JSON");

  std::string fixture_name;
  std::string fixture_out;
  bool fixture_list = false;
  auto* fixture = app.add_subcommand("fixture", "Write a built-in test mesh and its ground truth");
  fixture->add_option("--name", fixture_name, "Fixture name");
  fixture->add_option("--out", fixture_out, "Output directory");
  fixture->add_flag("--list", fixture_list, "List fixture names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (pre->parsed()) return cmd_preprocess(run);
    if (inpaint->parsed()) return cmd_inpaint(run, resume, progress);
    if (refine->parsed()) return cmd_refine(rf);
    if (eval->parsed()) return cmd_eval(ef);
    if (grad->parsed()) return cmd_gradcheck(gf);
    if (fixture->parsed()) return cmd_fixture(fixture_name, fixture_out, fixture_list);
  } catch (const Failure& e) {
    std::fprintf(stderr, "meshprior: %s\n", e.what());
    return e.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "meshprior: %s\n", e.what());
    return kExitError;
  }
  return kExitUsage;
}
