// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "core/error.hpp"

namespace meshprior {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'M', 'P', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;
// Names and RNG states are short; anything longer means a corrupt file.
constexpr std::uint32_t kMaxString = 1u << 20;
constexpr std::uint32_t kMaxDim = 1u << 24;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  // Column-major storage, as Eigen keeps it.
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get() {
    T v;
    read(&v, sizeof v);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    if (n > kMaxString) fail("string length out of range");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  void get_matrix(Eigen::MatrixXd& m) { read(m.data(), m.size() * sizeof(double)); }
  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated file");
  }
  [[noreturn]] static void fail(const std::string& what) { throw Error(ErrorCode::Format, "checkpoint: " + what); }

 private:
  std::istream& in_;
};

}  // namespace

void write_checkpoint(std::ostream& out, const GcnModel& model, int step, double scale, const std::string& rng_state) {
  const ModelConfig& c = model.config();
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint8_t>(out, c.arch == Architecture::Sgcn ? 0 : 1);
  put<std::int32_t>(out, c.in_channels);
  put<std::int32_t>(out, c.width);
  put<std::int32_t>(out, c.cheb_order);
  put<std::int32_t>(out, c.sgcn_blocks);
  put<std::int32_t>(out, c.mgcn_blocks_per_stage);
  put<std::int32_t>(out, c.mgcn_levels);
  put<double>(out, c.leaky_slope);
  put<double>(out, c.bn_eps);
  put<double>(out, c.bn_momentum);
  put<std::uint64_t>(out, c.seed);
  put<std::uint8_t>(out, c.zero_head ? 1 : 0);
  put<std::int32_t>(out, step);
  put<double>(out, scale);
  put_string(out, rng_state);

  const auto& params = model.parameters();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put_string(out, p.name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.cols()));
    put_matrix(out, p.value);
    put_matrix(out, p.adam_m);
    put_matrix(out, p.adam_v);
  }
  const auto stats = model.running_stats();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(stats.size() / 2));
  for (const auto& s : stats) {
    out.write(reinterpret_cast<const char*>(s.data()), static_cast<std::streamsize>(s.size() * sizeof(double)));
  }
  if (!out) throw Error(ErrorCode::Io, "checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  Reader r(in);
  char magic[8];
  r.read(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) Reader::fail("bad magic header");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) Reader::fail("unsupported version " + std::to_string(version));

  ModelConfig c;
  const auto arch = r.get<std::uint8_t>();
  if (arch > 1) Reader::fail("unknown architecture tag");
  c.arch = arch == 0 ? Architecture::Sgcn : Architecture::Mgcn;
  c.in_channels = r.get<std::int32_t>();
  c.width = r.get<std::int32_t>();
  c.cheb_order = r.get<std::int32_t>();
  c.sgcn_blocks = r.get<std::int32_t>();
  c.mgcn_blocks_per_stage = r.get<std::int32_t>();
  c.mgcn_levels = r.get<std::int32_t>();
  c.leaky_slope = r.get<double>();
  c.bn_eps = r.get<double>();
  c.bn_momentum = r.get<double>();
  c.seed = r.get<std::uint64_t>();
  c.zero_head = r.get<std::uint8_t>() != 0;
  for (int d : {c.in_channels, c.width, c.cheb_order, c.sgcn_blocks, c.mgcn_blocks_per_stage}) {
    if (d < 1 || static_cast<std::uint32_t>(d) > kMaxDim) Reader::fail("layer dimension out of range");
  }

  Checkpoint ck;
  ck.step = r.get<std::int32_t>();
  ck.scale = r.get<double>();
  ck.rng_state = r.get_string();
  if (ck.step < 0) Reader::fail("negative step count");
  if (!(ck.scale > 0)) Reader::fail("non-positive data scale");

  try {
    ck.model = GcnModel(c);
  } catch (const Error& e) {
    Reader::fail(std::string("invalid model configuration: ") + e.what());
  }
  auto& params = ck.model.parameters();
  const auto count = r.get<std::uint32_t>();
  if (count != params.size()) {
    Reader::fail("parameter count " + std::to_string(count) + " does not match architecture (" +
                 std::to_string(params.size()) + ")");
  }
  for (auto& p : params) {
    const std::string name = r.get_string();
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    if (name != p.name || rows != p.value.rows() || cols != p.value.cols()) {
      Reader::fail("parameter '" + name + "' does not match expected '" + p.name + "'");
    }
    r.get_matrix(p.value);
    r.get_matrix(p.adam_m);
    r.get_matrix(p.adam_v);
  }
  auto stats = ck.model.running_stats();
  const auto blocks = r.get<std::uint32_t>();
  if (2 * static_cast<std::size_t>(blocks) != stats.size()) Reader::fail("block count does not match architecture");
  for (auto& s : stats) r.read(s.data(), s.size() * sizeof(double));
  ck.model.set_running_stats(stats);
  return ck;
}

void save_checkpoint(const std::string& path, const GcnModel& model, int step, double scale,
                     const std::string& rng_state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_checkpoint(out, model, step, scale, rng_state);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace meshprior
