#pragma once

#include <map>
#include <string>
#include <vector>

#include "stfem/cutcell.hpp"

namespace stfem {

/// Slab-wise aggregation: every ill-posed active cell is attached, through
/// a face-connected path, to the aggregate of exactly one well-posed root
/// cell. Generation is the hop distance to the root.
struct AggregateMap {
  std::vector<int> root_of;     // per cell; -1 on non-active cells
  std::vector<int> generation;  // per cell; -1 on non-active cells
  std::map<int, std::vector<int>> aggregates;  // root -> members (root included)

  /// Filled by duplicate_disconnected only: cut cells whose intersection
  /// with the domain has several connected components throughout the slab,
  /// logically split with one root per component.
  struct DuplicatedCell {
    int cell = -1;
    std::vector<int> component_roots;
  };
  std::vector<DuplicatedCell> duplicated;

  int max_generation() const;
};

/// Breadth-first aggregation sweep: well-posed cells are marked touched
/// first (generation 0, own root); each round attaches every untouched
/// ill-posed cell that is face-adjacent to a touched cell, choosing among
/// the candidate touched neighbours the one whose root has the lowest cell
/// id. Throws (naming the cell) if an active cell stays unreachable.
AggregateMap aggregate_slab(const CartesianMesh& mesh, const SlabClassification& cls);

/// Opt-in refinement: cut cells whose inside geometry has >= 2 connected
/// components at every classification sample time are split, one logical
/// cell per component, each re-rooted through the faces its component
/// touches.
AggregateMap duplicate_disconnected(const CartesianMesh& mesh, const SlabClassification& cls,
                                    const AggregateMap& agg, const LevelSetField& ls);

/// Debug dump: cell id, status, eta, root, generation.
void write_aggregation_csv(const std::string& path, const CartesianMesh& mesh,
                           const SlabClassification& cls, const AggregateMap& agg);

}  // namespace stfem
