// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <tuple>

#include "core/error.hpp"
#include "core/mesh_edit.hpp"
#include "core/mesh_io.hpp"

namespace meshprior {

MergeMap MergeMap::identity(int n) {
  MergeMap m;
  m.fine_count = n;
  m.sets.resize(n);
  m.surviving.resize(n);
  m.coarse_of.resize(n);
  for (int i = 0; i < n; ++i) {
    m.sets[i] = {i};
    m.surviving[i] = i;
    m.coarse_of[i] = i;
  }
  return m;
}

void MergeMap::validate() const {
  std::vector<int> seen(fine_count, -1);
  if (surviving.size() != sets.size()) throw Error(ErrorCode::Data, "merge map: survivor count mismatch");
  for (int i = 0; i < coarse_count(); ++i) {
    if (sets[i].empty()) throw Error(ErrorCode::Data, "merge map: empty merge set");
    for (int k : sets[i]) {
      if (k < 0 || k >= fine_count) throw Error(ErrorCode::Data, "merge map: index out of range");
      if (seen[k] >= 0) throw Error(ErrorCode::Data, "merge map: sets overlap");
      seen[k] = i;
    }
    if (!std::binary_search(sets[i].begin(), sets[i].end(), surviving[i])) {
      throw Error(ErrorCode::Data, "merge map: survivor outside its set");
    }
  }
  for (int k = 0; k < fine_count; ++k) {
    if (seen[k] < 0) throw Error(ErrorCode::Data, "merge map: sets do not cover the fine level");
  }
  if (static_cast<int>(coarse_of.size()) != fine_count || coarse_of != seen) {
    throw Error(ErrorCode::Data, "merge map: inverse map inconsistent");
  }
}

int coarse_size(int n) { return static_cast<int>(std::lround(0.6 * n)); }

namespace {

using Quadric = Eigen::Matrix4d;

struct Candidate {
  double cost;
  int v0;
  int v1;
  int kept;
  int stamp0;
  int stamp1;

  // Min-heap order: cost, then lowest edge.
  bool operator<(const Candidate& o) const {
    return std::tie(cost, v0, v1) > std::tie(o.cost, o.v0, o.v1);
  }
};

class Simplifier {
 public:
  explicit Simplifier(const Mesh& mesh) : em_(mesh), quadric_(mesh.num_vertices(), Quadric::Zero()) {
    const Positions n = face_normals_unchecked(mesh.vertices(), mesh.faces());
    for (int f = 0; f < mesh.num_faces(); ++f) {
      const Vec3 nf = n.row(f).transpose();
      const Eigen::Vector4d p(nf.x(), nf.y(), nf.z(), -nf.dot(mesh.position(mesh.faces()(f, 0))));
      const Quadric k = p * p.transpose();
      for (int c = 0; c < 3; ++c) quadric_[mesh.faces()(f, c)] += k;
    }
    stamp_.assign(mesh.num_vertices(), 0);
    sets_.resize(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) sets_[v] = {v};
  }

  SimplifyResult run(int target) {
    for (const auto& [a, b] : em_.edges()) push(a, b);
    while (em_.num_live_vertices() > target) {
      if (heap_.empty()) {
        throw Error(ErrorCode::Simplification,
                    "no legal collapse left: reached " + std::to_string(em_.num_live_vertices()) +
                        " vertices, target " + std::to_string(target));
      }
      const Candidate c = heap_.top();
      heap_.pop();
      if (!em_.vertex_alive(c.v0) || !em_.vertex_alive(c.v1)) continue;
      if (stamp_[c.v0] != c.stamp0 || stamp_[c.v1] != c.stamp1) continue;
      const auto [cost, kept] = best_collapse(c.v0, c.v1);
      if (kept < 0) continue;
      if (cost > c.cost) {
        push(c.v0, c.v1);
        continue;
      }
      collapse(kept, kept == c.v0 ? c.v1 : c.v0);
    }
    std::vector<int> vmap;
    SimplifyResult out;
    out.mesh = em_.to_mesh(&vmap, nullptr);
    MergeMap& m = out.merge;
    m.fine_count = static_cast<int>(vmap.size());
    m.sets.resize(out.mesh.num_vertices());
    m.surviving.resize(out.mesh.num_vertices());
    m.coarse_of.assign(m.fine_count, -1);
    for (int v = 0; v < m.fine_count; ++v) {
      if (vmap[v] < 0) continue;
      auto s = sets_[v];
      std::sort(s.begin(), s.end());
      for (int k : s) m.coarse_of[k] = vmap[v];
      m.sets[vmap[v]] = std::move(s);
      m.surviving[vmap[v]] = v;
    }
    return out;
  }

 private:
  double cost(int kept, int removed) const {
    const int valence = em_.valence(kept) + em_.valence(removed) - 4;
    const double penalty = valence_penalty(valence);
    if (std::isinf(penalty)) return penalty;
    const Vec3 p = em_.position(kept);
    const Eigen::Vector4d h(p.x(), p.y(), p.z(), 1.0);
    const double qem = h.dot((quadric_[kept] + quadric_[removed]) * h);
    return std::max(qem, 0.0) + penalty;
  }

  bool legal(int kept, int removed) const {
    if (!em_.link_condition(kept, removed)) return false;
    const auto fs = em_.edge_faces(kept, removed);
    if (fs.size() != 2) return false;
    for (int f : fs) {
      if (em_.valence(em_.opposite(f, kept, removed)) - 1 <= 3) return false;
    }
    const Vec3 p = em_.position(kept);
    for (int f : em_.vertex_faces(removed)) {
      const auto& t = em_.face(f);
      if (t[0] == kept || t[1] == kept || t[2] == kept) continue;
      Vec3 q[3];
      for (int c = 0; c < 3; ++c) q[c] = t[c] == removed ? p : em_.position(t[c]);
      const Vec3 n = (q[1] - q[0]).cross(q[2] - q[0]);
      if (!(n.norm() > 0) || n.dot(em_.face_normal(f)) <= 0) return false;
    }
    return true;
  }

  std::pair<double, int> best_collapse(int a, int b) const {
    double best = std::numeric_limits<double>::infinity();
    int kept = -1;
    for (const auto& [k, r] : {std::pair{a, b}, std::pair{b, a}}) {
      const double c = cost(k, r);
      if (std::isinf(c) || !(c < best)) continue;
      if (!legal(k, r)) continue;
      best = c;
      kept = k;
    }
    return {best, kept};
  }

  void push(int a, int b) {
    if (a > b) std::swap(a, b);
    const auto [c, kept] = best_collapse(a, b);
    if (kept < 0) return;
    heap_.push({c, a, b, kept, stamp_[a], stamp_[b]});
  }

  void collapse(int kept, int removed) {
    em_.collapse(kept, removed);
    quadric_[kept] += quadric_[removed];
    sets_[kept].insert(sets_[kept].end(), sets_[removed].begin(), sets_[removed].end());
    sets_[removed].clear();
    // Costs and legality depend on valences within two rings of the kept vertex.
    std::vector<int> touched = em_.one_ring(kept);
    touched.push_back(kept);
    std::vector<int> second;
    for (int v : touched) {
      const auto r = em_.one_ring(v);
      second.insert(second.end(), r.begin(), r.end());
    }
    touched.insert(touched.end(), second.begin(), second.end());
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (int v : touched) ++stamp_[v];
    for (int v : touched) {
      for (int w : em_.one_ring(v)) {
        if (w > v || !std::binary_search(touched.begin(), touched.end(), w)) push(v, w);
      }
    }
  }

  EditableMesh em_;
  std::vector<Quadric> quadric_;
  std::vector<int> stamp_;
  std::vector<std::vector<int>> sets_;
  std::priority_queue<Candidate> heap_;
};

}  // namespace

SimplifyResult qem_simplify(const Mesh& mesh, int target_vertices) {
  if (target_vertices > mesh.num_vertices() || target_vertices < 4) {
    throw Error(ErrorCode::Argument, "qem_simplify: target must lie in [4, |V|]");
  }
  if (!mesh.is_closed()) throw Error(ErrorCode::Structure, "qem_simplify: mesh must be watertight");
  if (target_vertices == mesh.num_vertices()) return {mesh, MergeMap::identity(mesh.num_vertices())};
  return Simplifier(mesh).run(target_vertices);
}

Hierarchy build_hierarchy(const Mesh& smooth_mesh, int levels_below) {
  if (levels_below < 0) throw Error(ErrorCode::Argument, "build_hierarchy: level count must be >= 0");
  Hierarchy h;
  h.levels.push_back(smooth_mesh);
  for (int r = 0; r < levels_below; ++r) {
    SimplifyResult s = qem_simplify(h.levels.back(), coarse_size(h.levels.back().num_vertices()));
    h.levels.push_back(std::move(s.mesh));
    h.merges.push_back(std::move(s.merge));
  }
  return h;
}

std::vector<int> Hierarchy::fine_index(int level) const {
  if (level < 0 || level >= num_levels()) throw Error(ErrorCode::Argument, "hierarchy level out of range");
  std::vector<int> idx(levels[level].num_vertices());
  for (size_t i = 0; i < idx.size(); ++i) {
    int v = static_cast<int>(i);
    for (int r = level - 1; r >= 0; --r) v = merges[r].surviving[v];
    idx[i] = v;
  }
  return idx;
}

Positions Hierarchy::restrict_positions(const Positions& values, int level) const {
  if (values.rows() != levels[0].num_vertices()) {
    throw Error(ErrorCode::Argument, "restrict_positions: row count does not match level 0");
  }
  const auto idx = fine_index(level);
  Positions out(static_cast<Eigen::Index>(idx.size()), 3);
  for (size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = values.row(idx[i]);
  return out;
}

std::vector<std::uint8_t> Hierarchy::restrict_mask(std::span<const std::uint8_t> fine_mask, int level) const {
  if (static_cast<int>(fine_mask.size()) != levels[0].num_vertices()) {
    throw Error(ErrorCode::Argument, "restrict_mask: size does not match level 0");
  }
  if (level < 0 || level >= num_levels()) throw Error(ErrorCode::Argument, "hierarchy level out of range");
  std::vector<std::uint8_t> cur(fine_mask.begin(), fine_mask.end());
  for (int r = 0; r < level; ++r) {
    std::vector<std::uint8_t> next(merges[r].coarse_count(), 1);
    for (int i = 0; i < merges[r].coarse_count(); ++i) {
      for (int k : merges[r].sets[i]) next[i] &= cur[k];
    }
    cur.swap(next);
  }
  return cur;
}

namespace {

void check_rows(const Features& f, int rows, const char* what) {
  if (f.rows() != rows) {
    throw Error(ErrorCode::Argument, std::string(what) + ": feature rows " + std::to_string(f.rows()) +
                                         " do not match vertex count " + std::to_string(rows));
  }
}

}  // namespace

Features sum_pool(const Features& fine, const MergeMap& merge) {
  check_rows(fine, merge.fine_count, "sum_pool");
  Features out = Features::Zero(merge.coarse_count(), fine.cols());
  for (int k = 0; k < merge.fine_count; ++k) out.row(merge.coarse_of[k]) += fine.row(k);
  return out;
}

Features pool_avg(const Features& fine, const MergeMap& merge) {
  check_rows(fine, merge.fine_count, "pool_avg");
  Features out = Features::Zero(merge.coarse_count(), fine.cols());
  for (int i = 0; i < merge.coarse_count(); ++i) {
    for (int k : merge.sets[i]) out.row(i) += fine.row(k);
    out.row(i) /= static_cast<double>(merge.sets[i].size());
  }
  return out;
}

Features unpool(const Features& coarse, const MergeMap& merge) {
  check_rows(coarse, merge.coarse_count(), "unpool");
  Features out(merge.fine_count, coarse.cols());
  for (int k = 0; k < merge.fine_count; ++k) out.row(k) = coarse.row(merge.coarse_of[k]);
  return out;
}

void write_hierarchy(const Hierarchy& h, std::ostream& out) {
  out << "meshprior-hierarchy 1\n";
  out << "levels " << h.num_levels() << "\n";
  for (int r = 0; r < h.num_levels(); ++r) {
    const std::string ply = encode_ply(h.levels[r]);
    out << "level " << r << " ply " << ply.size() << "\n";
    out.write(ply.data(), static_cast<std::streamsize>(ply.size()));
    out << "\n";
    if (r + 1 < h.num_levels()) {
      const MergeMap& m = h.merges[r];
      out << "merge " << r << " " << m.fine_count << " " << m.coarse_count() << "\n";
      for (int i = 0; i < m.coarse_count(); ++i) {
        out << m.surviving[i] << " " << m.sets[i].size();
        for (int k : m.sets[i]) out << " " << k;
        out << "\n";
      }
    }
  }
}

Hierarchy read_hierarchy(std::istream& in, const std::string& source_name) {
  auto fail = [&](const std::string& msg) {
    return Error(ErrorCode::Format, source_name + ": " + msg);
  };
  std::string line;
  if (!std::getline(in, line) || line != "meshprior-hierarchy 1") throw fail("not a hierarchy file");
  std::string word;
  int count = 0;
  if (!(in >> word >> count) || word != "levels" || count < 1) throw fail("bad level count");
  Hierarchy h;
  for (int r = 0; r < count; ++r) {
    int idx = 0;
    size_t bytes = 0;
    std::string tag;
    if (!(in >> word >> idx >> tag >> bytes) || word != "level" || idx != r || tag != "ply") {
      throw fail("bad level header " + std::to_string(r));
    }
    in.get();
    std::string ply(bytes, '\0');
    if (!in.read(ply.data(), static_cast<std::streamsize>(bytes))) throw fail("truncated level mesh");
    h.levels.push_back(decode_ply(ply, source_name + " level " + std::to_string(r)));
    if (r + 1 < count) {
      MergeMap m;
      int coarse = 0;
      if (!(in >> word >> idx >> m.fine_count >> coarse) || word != "merge" || idx != r) {
        throw fail("bad merge header " + std::to_string(r));
      }
      if (m.fine_count != h.levels[r].num_vertices() || coarse < 0) throw fail("merge map size mismatch");
      m.sets.resize(coarse);
      m.surviving.resize(coarse);
      m.coarse_of.assign(m.fine_count, -1);
      for (int i = 0; i < coarse; ++i) {
        size_t n = 0;
        if (!(in >> m.surviving[i] >> n) || n > static_cast<size_t>(m.fine_count)) throw fail("bad merge set");
        m.sets[i].resize(n);
        for (auto& k : m.sets[i]) {
          if (!(in >> k) || k < 0 || k >= m.fine_count) throw fail("bad merge index");
          m.coarse_of[k] = i;
        }
      }
      try {
        m.validate();
      } catch (const Error& e) {
        throw fail(e.what());
      }
      h.merges.push_back(std::move(m));
    }
  }
  for (int r = 0; r + 1 < count; ++r) {
    if (h.merges[r].coarse_count() != h.levels[r + 1].num_vertices()) throw fail("merge map / level mismatch");
  }
  return h;
}

void save_hierarchy(const Hierarchy& h, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_hierarchy(h, out);
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

Hierarchy load_hierarchy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return read_hierarchy(in, path);
}

}  // namespace meshprior
