// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <cstdlib>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "core/mesh.hpp"

namespace meshprior {

using Features = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// |n - 6| + 1 for n > 3, +inf otherwise.
inline double valence_penalty(int valence) {
  return valence > 3 ? std::abs(valence - 6) + 1.0 : std::numeric_limits<double>::infinity();
}

/// Fine-to-coarse correspondence between two consecutive levels.
struct MergeMap {
  int fine_count = 0;
  /// sets[i] = sorted fine vertices merged into coarse vertex i.
  std::vector<std::vector<int>> sets;
  /// surviving[i] = fine vertex whose position coarse vertex i keeps.
  std::vector<int> surviving;
  /// coarse_of[k] = coarse vertex containing fine vertex k.
  std::vector<int> coarse_of;

  int coarse_count() const { return static_cast<int>(sets.size()); }
  static MergeMap identity(int n);
  /// Throws unless the sets partition [0, fine_count) and survivors lie in their sets.
  void validate() const;
};

struct SimplifyResult {
  Mesh mesh;
  MergeMap merge;
};

/// Collapses edges in ascending order of QEM cost plus the valence penalty of
/// the merged vertex until `target_vertices` remain. Survivors keep their own
/// positions.
SimplifyResult qem_simplify(const Mesh& mesh, int target_vertices);

/// round(0.6 n).
int coarse_size(int n);

struct Hierarchy {
  std::vector<Mesh> levels;  // level 0 = finest
  std::vector<MergeMap> merges;  // merges[r]: level r -> r + 1

  int num_levels() const { return static_cast<int>(levels.size()); }
  /// Fine (level-0) vertex index behind each vertex of `level`.
  std::vector<int> fine_index(int level) const;
  /// Rows of level-0 `values` picked at the survivors of `level`.
  Positions restrict_positions(const Positions& values, int level) const;
  /// Level mask: a coarse vertex is known iff every fine vertex merged into it is.
  std::vector<std::uint8_t> restrict_mask(std::span<const std::uint8_t> fine_mask, int level) const;
};

Hierarchy build_hierarchy(const Mesh& smooth_mesh, int levels_below = 3);

/// f'_i = mean over sets[i] of f_k.
Features pool_avg(const Features& fine, const MergeMap& merge);
/// Sum over sets[i]; the adjoint of unpool.
Features sum_pool(const Features& fine, const MergeMap& merge);
/// Every fine vertex of sets[i] receives f_i.
Features unpool(const Features& coarse, const MergeMap& merge);

void save_hierarchy(const Hierarchy& h, const std::string& path);
Hierarchy load_hierarchy(const std::string& path);
void write_hierarchy(const Hierarchy& h, std::ostream& out);
Hierarchy read_hierarchy(std::istream& in, const std::string& source_name);

}  // namespace meshprior
