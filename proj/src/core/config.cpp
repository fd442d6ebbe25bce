// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <sstream>

#include "core/error.hpp"

namespace meshprior {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw Error(ErrorCode::Config, "config key '" + key + "': cannot use '" + value + "' (expected " + expected + ")");
}

double parse_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
    bad_value(key, raw, "a finite number");
  }
  return v;
}

long long parse_integer(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  long long v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) bad_value(key, raw, "an integer");
  return v;
}

int parse_int(const std::string& key, const std::string& raw) {
  const long long v = parse_integer(key, raw);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) bad_value(key, raw, "a 32-bit integer");
  return static_cast<int>(v);
}

std::uint64_t parse_seed(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) bad_value(key, raw, "a non-negative integer");
  return v;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad_value(key, raw, "true or false");
}

bool is_auto(const std::string& raw) { return trim(raw) == "auto"; }

// Shortest text that parses back to the same double.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Key {
  const char* section;
  const char* name;
  std::function<void(RunConfig&, const std::string& dotted, const std::string& value)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    auto add = [&](const char* section, const char* name, auto set, auto get) {
      k.push_back({section, name, set, get});
    };
    // [run]
    add("run", "input", [](RunConfig& c, auto&, auto& v) { c.input = trim(v); },
        [](const RunConfig& c) { return c.input; });
    add("run", "ground_truth", [](RunConfig& c, auto&, auto& v) { c.ground_truth = trim(v); },
        [](const RunConfig& c) { return c.ground_truth; });
    add("run", "output_dir", [](RunConfig& c, auto&, auto& v) { c.output_dir = trim(v); },
        [](const RunConfig& c) { return c.output_dir; });
    add("run", "mesh_name", [](RunConfig& c, auto&, auto& v) { c.mesh_name = trim(v); },
        [](const RunConfig& c) { return c.mesh_name; });
    add("run", "arch", [](RunConfig& c, auto&, auto& v) { c.arch = parse_architecture(trim(v)); },
        [](const RunConfig& c) { return std::string(architecture_name(c.arch)); });
    add("run", "type", [](RunConfig& c, auto&, auto& v) { c.type = parse_mesh_type(trim(v)); },
        [](const RunConfig& c) { return std::string(mesh_type_name(c.type)); });
    add("run", "seed", [](RunConfig& c, auto& key, auto& v) { c.seed = parse_seed(key, v); },
        [](const RunConfig& c) { return std::to_string(c.seed); });
    // [remesh]
    add("remesh", "iterations",
        [](RunConfig& c, auto& key, auto& v) { c.preprocess.remesh_iterations = parse_int(key, v); },
        [](const RunConfig& c) { return std::to_string(c.preprocess.remesh_iterations); });
    add("remesh", "target_edge_length",
        [](RunConfig& c, auto& key, auto& v) {
          c.preprocess.target_edge_length = is_auto(v) ? 0.0 : parse_double(key, v);
        },
        [](const RunConfig& c) {
          return c.preprocess.target_edge_length > 0 ? num(c.preprocess.target_edge_length) : std::string("auto");
        });
    add("remesh", "feature_angle_deg",
        [](RunConfig& c, auto& key, auto& v) { c.preprocess.feature_angle_deg = parse_double(key, v); },
        [](const RunConfig& c) { return num(c.preprocess.feature_angle_deg); });
    // [smooth]
    add("smooth", "steps", [](RunConfig& c, auto& key, auto& v) { c.preprocess.smooth_steps = parse_int(key, v); },
        [](const RunConfig& c) { return std::to_string(c.preprocess.smooth_steps); });
    // [augment]
    add("augment", "p", [](RunConfig& c, auto& key, auto& v) { c.p = parse_double(key, v); },
        [](const RunConfig& c) { return num(c.p); });
    add("augment", "k", [](RunConfig& c, auto& key, auto& v) { c.k = parse_int(key, v); },
        [](const RunConfig& c) { return std::to_string(c.k); });
    add("augment", "sets", [](RunConfig& c, auto& key, auto& v) { c.mask_sets = parse_int(key, v); },
        [](const RunConfig& c) { return std::to_string(c.mask_sets); });
    // [train]
    add("train", "steps", [](RunConfig& c, auto& key, auto& v) { c.steps = parse_int(key, v); },
        [](const RunConfig& c) { return std::to_string(c.steps); });
    add("train", "learning_rate", [](RunConfig& c, auto& key, auto& v) { c.adam.learning_rate = parse_double(key, v); },
        [](const RunConfig& c) { return num(c.adam.learning_rate); });
    add("train", "beta1", [](RunConfig& c, auto& key, auto& v) { c.adam.beta1 = parse_double(key, v); },
        [](const RunConfig& c) { return num(c.adam.beta1); });
    add("train", "beta2", [](RunConfig& c, auto& key, auto& v) { c.adam.beta2 = parse_double(key, v); },
        [](const RunConfig& c) { return num(c.adam.beta2); });
    add("train", "epsilon", [](RunConfig& c, auto& key, auto& v) { c.adam.epsilon = parse_double(key, v); },
        [](const RunConfig& c) { return num(c.adam.epsilon); });
    add("train", "halving_step", [](RunConfig& c, auto& key, auto& v) { c.adam.halving_step = parse_int(key, v); },
        [](const RunConfig& c) { return std::to_string(c.adam.halving_step); });
    add("train", "width", [](RunConfig& c, auto& key, auto& v) { c.width = parse_int(key, v); },
        [](const RunConfig& c) { return std::to_string(c.width); });
    add("train", "cheb_order", [](RunConfig& c, auto& key, auto& v) { c.cheb_order = parse_int(key, v); },
        [](const RunConfig& c) { return std::to_string(c.cheb_order); });
    add("train", "sgcn_blocks", [](RunConfig& c, auto& key, auto& v) { c.sgcn_blocks = parse_int(key, v); },
        [](const RunConfig& c) { return std::to_string(c.sgcn_blocks); });
    add("train", "mgcn_blocks_per_stage",
        [](RunConfig& c, auto& key, auto& v) { c.mgcn_blocks_per_stage = parse_int(key, v); },
        [](const RunConfig& c) { return std::to_string(c.mgcn_blocks_per_stage); });
    add("train", "levels", [](RunConfig& c, auto& key, auto& v) { c.levels = parse_int(key, v); },
        [](const RunConfig& c) { return std::to_string(c.levels); });
    add("train", "leaky_slope", [](RunConfig& c, auto& key, auto& v) { c.leaky_slope = parse_double(key, v); },
        [](const RunConfig& c) { return num(c.leaky_slope); });
    add("train", "bn_eps", [](RunConfig& c, auto& key, auto& v) { c.bn_eps = parse_double(key, v); },
        [](const RunConfig& c) { return num(c.bn_eps); });
    add("train", "bn_momentum", [](RunConfig& c, auto& key, auto& v) { c.bn_momentum = parse_double(key, v); },
        [](const RunConfig& c) { return num(c.bn_momentum); });
    add("train", "w_pos",
        [](RunConfig& c, auto& key, auto& v) {
          if (is_auto(v)) {
            c.w_pos.reset();
            return;
          }
          std::vector<double> w;
          std::stringstream ss(v);
          std::string item;
          while (std::getline(ss, item, ',')) w.push_back(parse_double(key, item));
          if (w.empty()) bad_value(key, v, "auto or a comma-separated list of numbers");
          c.w_pos = w;
        },
        [](const RunConfig& c) {
          if (!c.w_pos) return std::string("auto");
          std::string s;
          for (size_t i = 0; i < c.w_pos->size(); ++i) s += (i ? "," : "") + num((*c.w_pos)[i]);
          return s;
        });
    add("train", "w_nrm",
        [](RunConfig& c, auto& key, auto& v) {
          if (is_auto(v)) c.w_nrm.reset(); else c.w_nrm = parse_double(key, v);
        },
        [](const RunConfig& c) { return c.w_nrm ? num(*c.w_nrm) : std::string("auto"); });
    add("train", "w_reg",
        [](RunConfig& c, auto& key, auto& v) {
          if (is_auto(v)) c.w_reg.reset(); else c.w_reg = parse_double(key, v);
        },
        [](const RunConfig& c) { return c.w_reg ? num(*c.w_reg) : std::string("auto"); });
    // [bnf]
    add("bnf", "iterations", [](RunConfig& c, auto& key, auto& v) { c.bnf.iterations = parse_int(key, v); },
        [](const RunConfig& c) { return std::to_string(c.bnf.iterations); });
    add("bnf", "sigma_c",
        [](RunConfig& c, auto& key, auto& v) { c.bnf.sigma_c = is_auto(v) ? 0.0 : parse_double(key, v); },
        [](const RunConfig& c) { return c.bnf.sigma_c > 0 ? num(c.bnf.sigma_c) : std::string("auto"); });
    add("bnf", "sigma_s", [](RunConfig& c, auto& key, auto& v) { c.bnf.sigma_s = parse_double(key, v); },
        [](const RunConfig& c) { return num(c.bnf.sigma_s); });
    // [refine]
    add("refine", "mu",
        [](RunConfig& c, auto& key, auto& v) {
          if (is_auto(v)) c.mu.reset(); else c.mu = parse_double(key, v);
        },
        [](const RunConfig& c) { return c.mu ? num(*c.mu) : std::string("auto"); });
    add("refine", "tolerance", [](RunConfig& c, auto& key, auto& v) { c.refine_tolerance = parse_double(key, v); },
        [](const RunConfig& c) { return num(c.refine_tolerance); });
    add("refine", "max_residual",
        [](RunConfig& c, auto& key, auto& v) { c.refine_max_residual = parse_double(key, v); },
        [](const RunConfig& c) { return num(c.refine_max_residual); });
    // [metrics]
    add("metrics", "nearest_vertex", [](RunConfig& c, auto& key, auto& v) { c.nearest_vertex = parse_bool(key, v); },
        [](const RunConfig& c) { return std::string(c.nearest_vertex ? "true" : "false"); });
    return k;
  }();
  return table;
}

const Key& find_key(const std::string& dotted) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos) throw Error(ErrorCode::Config, "config key '" + dotted + "' must be section.key");
  const std::string section = dotted.substr(0, dot);
  const std::string name = dotted.substr(dot + 1);
  bool known_section = false;
  for (const auto& k : keys()) {
    if (section != k.section) continue;
    known_section = true;
    if (name == k.name) return k;
  }
  if (!known_section) throw Error(ErrorCode::Config, "unknown config section [" + section + "]");
  throw Error(ErrorCode::Config, "unknown config key '" + name + "' in section [" + section + "]");
}

}  // namespace

void set_config_value(RunConfig& config, const std::string& dotted_key, const std::string& value) {
  const Key& k = find_key(dotted_key);
  try {
    k.set(config, dotted_key, value);
  } catch (const Error& e) {
    if (std::string(e.what()).rfind("config key", 0) == 0) throw;
    throw Error(ErrorCode::Config, "config key '" + dotted_key + "': " + e.what());
  }
}

std::string get_config_value(const RunConfig& config, const std::string& dotted_key) {
  return find_key(dotted_key).get(config);
}

RunConfig parse_config(std::istream& in, const std::string& source_name) {
  namespace pt = boost::property_tree;
  // The INI reader drops sections without keys, so check headers first.
  const std::string text(std::istreambuf_iterator<char>(in), {});
  std::istringstream lines(text);
  int line_no = 0;
  for (std::string line; std::getline(lines, line);) {
    ++line_no;
    const std::string t = trim(line);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') continue;
    const std::string section = trim(t.substr(1, t.size() - 2));
    const bool known = std::any_of(keys().begin(), keys().end(), [&](const Key& k) { return k.section == section; });
    if (!known) {
      throw Error(ErrorCode::Config,
                  source_name + ": unknown section [" + section + "] (line " + std::to_string(line_no) + ")");
    }
  }
  std::istringstream body_in(text);
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(body_in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::Config, source_name + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw Error(ErrorCode::Config, source_name + ": key '" + section + "' appears outside any section");
    }
    for (const auto& [name, value] : body) {
      try {
        set_config_value(config, section + "." + name, value.data());
      } catch (const Error& e) {
        throw Error(ErrorCode::Config, source_name + ": " + e.what());
      }
    }
  }
  validate_config(config);
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
  return parse_config(in, path);
}

void validate_config(const RunConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::Config, what);
  };
  require(c.preprocess.remesh_iterations >= 0, "remesh.iterations must be >= 0");
  require(c.preprocess.target_edge_length >= 0, "remesh.target_edge_length must be auto or > 0");
  require(c.preprocess.feature_angle_deg > 0 && c.preprocess.feature_angle_deg < 180,
          "remesh.feature_angle_deg must lie in (0, 180)");
  require(c.preprocess.smooth_steps >= 0, "smooth.steps must be >= 0");
  require(c.p >= 0 && c.p < 1, "augment.p must lie in [0, 1)");
  require(c.k >= 0, "augment.k must be >= 0");
  require(c.mask_sets >= 1, "augment.sets must be >= 1");
  require(c.steps >= 1, "train.steps must be >= 1");
  require(c.adam.learning_rate > 0, "train.learning_rate must be > 0");
  require(c.adam.beta1 >= 0 && c.adam.beta1 < 1, "train.beta1 must lie in [0, 1)");
  require(c.adam.beta2 >= 0 && c.adam.beta2 < 1, "train.beta2 must lie in [0, 1)");
  require(c.adam.epsilon > 0, "train.epsilon must be > 0");
  require(c.width >= 1, "train.width must be >= 1");
  require(c.cheb_order >= 1, "train.cheb_order must be >= 1");
  require(c.sgcn_blocks >= 1, "train.sgcn_blocks must be >= 1");
  require(c.mgcn_blocks_per_stage >= 1, "train.mgcn_blocks_per_stage must be >= 1");
  require(c.levels >= 0 && c.levels <= 3, "train.levels must lie in [0, 3]");
  require(c.leaky_slope >= 0 && c.leaky_slope < 1, "train.leaky_slope must lie in [0, 1)");
  require(c.bn_eps > 0, "train.bn_eps must be > 0");
  require(c.bn_momentum > 0 && c.bn_momentum <= 1, "train.bn_momentum must lie in (0, 1]");
  const size_t outputs = c.arch == Architecture::Mgcn ? static_cast<size_t>(c.levels) + 1 : 1;
  if (c.w_pos) {
    require(c.w_pos->size() == outputs, "train.w_pos needs " + std::to_string(outputs) + " value(s) for " +
                                            architecture_name(c.arch));
    for (double w : *c.w_pos) require(w >= 0, "train.w_pos entries must be >= 0");
  }
  require(!c.w_nrm || *c.w_nrm >= 0, "train.w_nrm must be >= 0");
  require(!c.w_reg || *c.w_reg >= 0, "train.w_reg must be >= 0");
  require(c.bnf.iterations >= 0, "bnf.iterations must be >= 0");
  require(c.bnf.sigma_c >= 0, "bnf.sigma_c must be auto or > 0");
  require(c.bnf.sigma_s > 0, "bnf.sigma_s must be > 0");
  require(!c.mu || *c.mu > 0, "refine.mu must be > 0");
  require(c.refine_tolerance > 0, "refine.tolerance must be > 0");
  require(c.refine_max_residual > 0, "refine.max_residual must be > 0");
}

void write_config(std::ostream& out, const RunConfig& config) {
  std::string section;
  for (const auto& k : keys()) {
    if (section != k.section) {
      if (!section.empty()) out << "\n";
      section = k.section;
      out << "[" << section << "]\n";
    }
    out << k.name << " = " << k.get(config) << "\n";
  }
}

std::string config_to_string(const RunConfig& config) {
  std::ostringstream out;
  write_config(out, config);
  return out.str();
}

ModelConfig model_config(const RunConfig& c) {
  ModelConfig m;
  m.arch = c.arch;
  m.width = c.width;
  m.cheb_order = c.cheb_order;
  m.sgcn_blocks = c.sgcn_blocks;
  m.mgcn_blocks_per_stage = c.mgcn_blocks_per_stage;
  m.mgcn_levels = c.levels;
  m.leaky_slope = c.leaky_slope;
  m.bn_eps = c.bn_eps;
  m.bn_momentum = c.bn_momentum;
  m.seed = c.seed;
  return m;
}

LossWeights loss_weights(const RunConfig& c) {
  LossWeights w = LossWeights::preset(c.arch, c.type, c.levels);
  if (c.w_pos) w.pos = *c.w_pos;
  if (c.w_nrm) w.nrm = *c.w_nrm;
  if (c.w_reg) w.reg = *c.w_reg;
  return w;
}

AugmentationConfig augmentation_config(const RunConfig& c) {
  AugmentationConfig a;
  a.p = c.p;
  a.k = c.k;
  a.sets = c.mask_sets;
  // Decorrelate from the weight-initialization stream, which uses run.seed.
  a.seed = c.seed ^ 0x9E3779B97F4A7C15ull;
  return a;
}

RefineOptions refine_options(const RunConfig& c) {
  RefineOptions r;
  r.mu = c.mu ? *c.mu : named_mu(c.mesh_name, c.type);
  r.tolerance = c.refine_tolerance;
  r.max_residual = c.refine_max_residual;
  return r;
}

TrainConfig train_config(const RunConfig& c) {
  TrainConfig t;
  t.steps = c.steps;
  t.weights = loss_weights(c);
  t.adam = c.adam;
  t.bnf = c.bnf;
  return t;
}

int hierarchy_levels(const RunConfig& c) { return c.arch == Architecture::Mgcn ? c.levels : 0; }

}  // namespace meshprior
