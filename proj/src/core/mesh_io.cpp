// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "core/error.hpp"

namespace meshprior {

namespace {

std::string lower_extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Mesh finish(std::vector<double>& xyz, std::vector<std::vector<int>>& polys, const std::string& source) {
  const Eigen::Index nv = static_cast<Eigen::Index>(xyz.size() / 3);
  Positions v(nv, 3);
  for (Eigen::Index i = 0; i < nv; ++i) v.row(i) << xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2];

  std::vector<std::array<int, 3>> tris;
  for (size_t p = 0; p < polys.size(); ++p) {
    const auto& poly = polys[p];
    if (poly.size() < 3) {
      throw Error(ErrorCode::Data, source + ": face " + std::to_string(p) + " has fewer than 3 vertices");
    }
    for (int idx : poly) {
      if (idx < 0 || idx >= nv) {
        throw Error(ErrorCode::Data, source + ": face " + std::to_string(p) + " references vertex " +
                                         std::to_string(idx) + " out of range");
      }
    }
    for (size_t k = 1; k + 1 < poly.size(); ++k) {
      const std::array<int, 3> t{poly[0], poly[k], poly[k + 1]};
      if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
        throw Error(ErrorCode::Data, source + ": face " + std::to_string(p) +
                                         " cannot be triangulated (repeated vertex)");
      }
      tris.push_back(t);
    }
  }
  FaceArray f(static_cast<Eigen::Index>(tris.size()), 3);
  for (size_t j = 0; j < tris.size(); ++j) f.row(static_cast<Eigen::Index>(j)) << tris[j][0], tris[j][1], tris[j][2];

  const double diag = bbox_diagonal(v);
  const Eigen::VectorXd area = face_areas(v, f);
  for (Eigen::Index j = 0; j < area.size(); ++j) {
    if (area(j) < 1e-12 * diag * diag) {
      throw Error(ErrorCode::Degenerate,
                  source + ": triangle " + std::to_string(j) +
                      " is degenerate (near-zero area); remove or repair it first, e.g. by "
                      "merging duplicate vertices and deleting zero-area faces");
    }
  }
  return Mesh(std::move(v), std::move(f));
}

Mesh load_obj(const std::string& text, const std::string& source) {
  std::vector<double> xyz;
  std::vector<std::vector<int>> polys;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.size() < 2) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) {
        throw Error(ErrorCode::Format, source + ":" + std::to_string(lineno) + ": malformed vertex record");
      }
      xyz.insert(xyz.end(), {x, y, z});
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ls >> tok) {
        const auto slash = tok.find('/');
        const std::string head = tok.substr(0, slash);
        long idx = 0;
        try {
          size_t used = 0;
          idx = std::stol(head, &used);
          if (used != head.size()) throw std::invalid_argument(head);
        } catch (const std::exception&) {
          throw Error(ErrorCode::Format, source + ":" + std::to_string(lineno) + ": bad face index '" + tok + "'");
        }
        const long nv = static_cast<long>(xyz.size() / 3);
        if (idx < 0) idx = nv + idx;
        else idx = idx - 1;
        poly.push_back(static_cast<int>(idx));
      }
      polys.push_back(std::move(poly));
    }
  }
  return finish(xyz, polys, source);
}

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

PlyType parse_type(const std::string& t, const std::string& source) {
  if (t == "char" || t == "int8") return PlyType::Int8;
  if (t == "uchar" || t == "uint8") return PlyType::UInt8;
  if (t == "short" || t == "int16") return PlyType::Int16;
  if (t == "ushort" || t == "uint16") return PlyType::UInt16;
  if (t == "int" || t == "int32") return PlyType::Int32;
  if (t == "uint" || t == "uint32") return PlyType::UInt32;
  if (t == "float" || t == "float32") return PlyType::Float32;
  if (t == "double" || t == "float64") return PlyType::Float64;
  throw Error(ErrorCode::Format, source + ": unknown PLY type '" + t + "'");
}

size_t type_size(PlyType t) {
  switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::Float32;
  bool is_list = false;
  PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
  std::string name;
  size_t count = 0;
  std::vector<PlyProperty> props;
};

class BinaryCursor {
 public:
  BinaryCursor(const std::string& data, size_t pos, bool big_endian, std::string source)
      : data_(data), pos_(pos), swap_(big_endian != (std::endian::native == std::endian::big)),
        source_(std::move(source)) {}

  double read(PlyType t) {
    const size_t n = type_size(t);
    if (pos_ + n > data_.size()) {
      throw Error(ErrorCode::Format, source_ + ": unexpected end of binary data at byte " + std::to_string(pos_));
    }
    unsigned char buf[8];
    std::memcpy(buf, data_.data() + pos_, n);
    if (swap_) std::reverse(buf, buf + n);
    pos_ += n;
    switch (t) {
      case PlyType::Int8: { int8_t v; std::memcpy(&v, buf, 1); return v; }
      case PlyType::UInt8: { uint8_t v; std::memcpy(&v, buf, 1); return v; }
      case PlyType::Int16: { int16_t v; std::memcpy(&v, buf, 2); return v; }
      case PlyType::UInt16: { uint16_t v; std::memcpy(&v, buf, 2); return v; }
      case PlyType::Int32: { int32_t v; std::memcpy(&v, buf, 4); return v; }
      case PlyType::UInt32: { uint32_t v; std::memcpy(&v, buf, 4); return v; }
      case PlyType::Float32: { float v; std::memcpy(&v, buf, 4); return v; }
      case PlyType::Float64: { double v; std::memcpy(&v, buf, 8); return v; }
    }
    return 0.0;
  }

  size_t pos() const { return pos_; }

 private:
  const std::string& data_;
  size_t pos_;
  bool swap_;
  std::string source_;
};

Mesh load_ply(const std::string& data, const std::string& source) {
  size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const size_t end = data.find('\n', pos);
    if (end == std::string::npos) throw Error(ErrorCode::Format, source + ": truncated PLY header");
    std::string line = data.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line() != "ply") throw Error(ErrorCode::Format, source + ": missing 'ply' magic");
  enum class Fmt { Ascii, BinLE, BinBE } fmt = Fmt::Ascii;
  std::vector<PlyElement> elements;
  bool have_format = false;
  for (int lineno = 2;; ++lineno) {
    const std::string line = next_line();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "end_header") break;
    if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
    if (kw == "format") {
      std::string f;
      ls >> f;
      if (f == "ascii") fmt = Fmt::Ascii;
      else if (f == "binary_little_endian") fmt = Fmt::BinLE;
      else if (f == "binary_big_endian") fmt = Fmt::BinBE;
      else throw Error(ErrorCode::Format, source + ":" + std::to_string(lineno) + ": unknown format '" + f + "'");
      have_format = true;
    } else if (kw == "element") {
      PlyElement el;
      ls >> el.name >> el.count;
      if (!ls) throw Error(ErrorCode::Format, source + ":" + std::to_string(lineno) + ": malformed element line");
      elements.push_back(el);
    } else if (kw == "property") {
      if (elements.empty()) throw Error(ErrorCode::Format, source + ":" + std::to_string(lineno) + ": property before element");
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        p.is_list = true;
        p.count_type = parse_type(ct, source);
        p.type = parse_type(it, source);
      } else {
        p.type = parse_type(t, source);
        ls >> p.name;
      }
      elements.back().props.push_back(p);
    } else {
      throw Error(ErrorCode::Format, source + ":" + std::to_string(lineno) + ": unexpected header keyword '" + kw + "'");
    }
  }
  if (!have_format) throw Error(ErrorCode::Format, source + ": missing format line");

  std::vector<double> xyz;
  std::vector<std::vector<int>> polys;

  auto consume = [&](auto&& read_value) {
    for (const PlyElement& el : elements) {
      int ix = -1, iy = -1, iz = -1, iface = -1;
      for (size_t k = 0; k < el.props.size(); ++k) {
        const auto& n = el.props[k].name;
        if (n == "x") ix = static_cast<int>(k);
        if (n == "y") iy = static_cast<int>(k);
        if (n == "z") iz = static_cast<int>(k);
        if ((n == "vertex_indices" || n == "vertex_index") && el.props[k].is_list) iface = static_cast<int>(k);
      }
      const bool is_vertex = el.name == "vertex";
      const bool is_face = el.name == "face";
      if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) {
        throw Error(ErrorCode::Format, source + ": vertex element lacks x/y/z");
      }
      if (is_face && iface < 0) throw Error(ErrorCode::Format, source + ": face element lacks vertex_indices");
      for (size_t r = 0; r < el.count; ++r) {
        double p[3] = {0, 0, 0};
        std::vector<int> poly;
        for (size_t k = 0; k < el.props.size(); ++k) {
          const PlyProperty& pr = el.props[k];
          if (pr.is_list) {
            const double cnt = read_value(pr.count_type);
            if (cnt < 0) throw Error(ErrorCode::Format, source + ": negative list length");
            for (size_t q = 0; q < static_cast<size_t>(cnt); ++q) {
              const double val = read_value(pr.type);
              if (is_face && static_cast<int>(k) == iface) poly.push_back(static_cast<int>(val));
            }
          } else {
            const double val = read_value(pr.type);
            if (is_vertex) {
              if (static_cast<int>(k) == ix) p[0] = val;
              if (static_cast<int>(k) == iy) p[1] = val;
              if (static_cast<int>(k) == iz) p[2] = val;
            }
          }
        }
        if (is_vertex) xyz.insert(xyz.end(), {p[0], p[1], p[2]});
        if (is_face) polys.push_back(std::move(poly));
      }
    }
  };

  if (fmt == Fmt::Ascii) {
    std::istringstream body(data.substr(pos));
    size_t tokens = 0;
    consume([&](PlyType) {
      double v;
      if (!(body >> v)) {
        throw Error(ErrorCode::Format, source + ": malformed ascii PLY body near token " + std::to_string(tokens));
      }
      ++tokens;
      return v;
    });
  } else {
    BinaryCursor cur(data, pos, fmt == Fmt::BinBE, source);
    consume([&](PlyType t) { return cur.read(t); });
  }
  return finish(xyz, polys, source);
}

template <typename T>
void put(std::string& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(reinterpret_cast<const char*>(buf), sizeof(T));
}

}  // namespace

std::array<unsigned char, 3> signed_colormap(double value, double max_abs) {
  if (!(max_abs > 0)) return {255, 255, 255};
  const double t = std::clamp(value / max_abs, -1.0, 1.0);
  const auto c = [](double s) { return static_cast<unsigned char>(std::lround(255.0 * s)); };
  if (t < 0) return {c(1 + t), c(1 + t), 255};
  return {255, c(1 - t), c(1 - t)};
}

std::string encode_ply(const Mesh& mesh, const Eigen::VectorXd* scalars) {
  if (scalars && scalars->size() != mesh.num_vertices()) {
    throw Error(ErrorCode::Argument, "scalar field size does not match vertex count");
  }
  std::string out;
  out += "ply\nformat binary_little_endian 1.0\ncomment meshprior\n";
  out += "element vertex " + std::to_string(mesh.num_vertices()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  if (scalars) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "element face " + std::to_string(mesh.num_faces()) + "\n";
  out += "property list uchar int vertex_indices\nend_header\n";
  const double max_abs = scalars && scalars->size() ? scalars->cwiseAbs().maxCoeff() : 0.0;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    for (int c = 0; c < 3; ++c) put<double>(out, mesh.vertices()(i, c));
    if (scalars) {
      const auto rgb = signed_colormap((*scalars)(i), max_abs);
      for (unsigned char ch : rgb) put<uint8_t>(out, ch);
    }
  }
  for (int j = 0; j < mesh.num_faces(); ++j) {
    put<uint8_t>(out, 3);
    for (int c = 0; c < 3; ++c) put<int32_t>(out, mesh.faces()(j, c));
  }
  return out;
}

Mesh decode_ply(const std::string& bytes, const std::string& source_name) {
  return load_ply(bytes, source_name);
}

Mesh load_mesh(const std::string& path) {
  const std::string ext = lower_extension(path);
  const std::string data = read_file(path);
  if (ext == "obj") return load_obj(data, path);
  if (ext == "ply") return load_ply(data, path);
  throw Error(ErrorCode::Format, "unsupported mesh extension for '" + path + "' (expected .obj or .ply)");
}

void save_mesh(const Mesh& mesh, const std::string& path, const Eigen::VectorXd* scalars) {
  const std::string ext = lower_extension(path);
  std::string out;
  if (ext == "ply") {
    out = encode_ply(mesh, scalars);
  } else if (ext == "obj") {
    std::ostringstream ss;
    ss.precision(17);
    for (int i = 0; i < mesh.num_vertices(); ++i) {
      ss << "v " << mesh.vertices()(i, 0) << ' ' << mesh.vertices()(i, 1) << ' ' << mesh.vertices()(i, 2) << '\n';
    }
    for (int j = 0; j < mesh.num_faces(); ++j) {
      ss << "f " << mesh.faces()(j, 0) + 1 << ' ' << mesh.faces()(j, 1) + 1 << ' ' << mesh.faces()(j, 2) + 1 << '\n';
    }
    out = ss.str();
  } else {
    throw Error(ErrorCode::Format, "unsupported mesh extension for '" + path + "' (expected .obj or .ply)");
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

}  // namespace meshprior
