#include "stfem/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace stfem {

int AggregateMap::max_generation() const {
  int g = 0;
  for (int v : generation) g = std::max(g, v);
  return g;
}

AggregateMap aggregate_slab(const CartesianMesh& mesh, const SlabClassification& cls) {
  const int nc = mesh.num_cells();
  AggregateMap agg;
  agg.root_of.assign(nc, -1);
  agg.generation.assign(nc, -1);

  int n_untouched = 0;
  for (int c : cls.active_cells) {
    if (cls.well_posed[c]) {
      agg.root_of[c] = c;
      agg.generation[c] = 0;
    } else {
      ++n_untouched;
    }
  }

  int gen = 0;
  while (n_untouched > 0) {
    ++gen;
    // candidates are measured against the previous rounds' touched set
    std::vector<std::pair<int, int>> assign;  // (cell, root)
    for (int c : cls.active_cells) {
      if (agg.root_of[c] >= 0) continue;
      int best_root = -1;
      for (int nb : mesh.cell_neighbors(c)) {
        if (!cls.is_active(nb) || agg.root_of[nb] < 0 || agg.generation[nb] >= gen) continue;
        const int r = agg.root_of[nb];
        if (best_root < 0 || r < best_root) best_root = r;
      }
      if (best_root >= 0) assign.emplace_back(c, best_root);
    }
    if (assign.empty()) {
      for (int c : cls.active_cells)
        if (agg.root_of[c] < 0)
          throw std::runtime_error(
              "aggregate_slab: active cell " + std::to_string(c) +
              " is not face-connected to any well-posed cell (slab " +
              std::to_string(cls.slab_index) + ")");
    }
    for (auto [c, r] : assign) {
      agg.root_of[c] = r;
      agg.generation[c] = gen;
      --n_untouched;
    }
  }

  for (int c : cls.active_cells) agg.aggregates[agg.root_of[c]].push_back(c);
  return agg;
}

AggregateMap duplicate_disconnected(const CartesianMesh& mesh, const SlabClassification& cls,
                                    const AggregateMap& agg, const LevelSetField& ls) {
  AggregateMap out = agg;
  out.duplicated.clear();
  const double face_tol = 1e-9 * mesh.max_h();

  for (int c : cls.active_cells) {
    if (cls.status[c] != CellStatus::Cut) continue;

    // components at every sample time; the split uses the first sample
    bool multi_at_all_times = true;
    SubTriangulation st_first;
    std::vector<int> labels_first;
    int n_comp_first = 0;
    bool first = true;
    for (double ts : cls.sample_times) {
      SubTriangulation st = subtriangulate(mesh, c, ls, ts);
      std::vector<int> labels;
      const int n_comp = inside_components(st, mesh.dim, &labels);
      if (n_comp < 2) {
        multi_at_all_times = false;
        break;
      }
      if (first) {
        st_first = std::move(st);
        labels_first = std::move(labels);
        n_comp_first = n_comp;
        first = false;
      }
    }
    if (!multi_at_all_times || n_comp_first < 2) continue;

    // Re-root each component through the neighbours behind the faces its
    // geometry touches. Falls back to the base root when a component has
    // no rooted neighbour on its side.
    const Coord lo = mesh.cell_lo(c), hi = mesh.cell_hi(c);
    AggregateMap::DuplicatedCell dup;
    dup.cell = c;
    for (int comp = 0; comp < n_comp_first; ++comp) {
      int best_root = -1;
      for (std::size_t s = 0; s < st_first.inside.size(); ++s) {
        if (labels_first[s] != comp) continue;
        const int nv = mesh.dim == 1 ? 2 : 3;
        for (int v = 0; v < nv; ++v) {
          const Coord& p = st_first.inside[s].v[v];
          for (int axis = 0; axis < mesh.dim; ++axis) {
            for (int side = 0; side < 2; ++side) {
              const double plane = side == 0 ? lo[axis] : hi[axis];
              if (std::abs(p[axis] - plane) > face_tol) continue;
              auto idx = mesh.cell_multi_index(c);
              idx[axis] += side == 0 ? -1 : 1;
              if (idx[axis] < 0 || idx[axis] >= mesh.n_cells[axis]) continue;
              const int nb = mesh.cell_id(idx);
              if (!cls.is_active(nb) || nb == c) continue;
              const int r = agg.root_of[nb];
              if (r >= 0 && (best_root < 0 || r < best_root)) best_root = r;
            }
          }
        }
      }
      dup.component_roots.push_back(best_root >= 0 ? best_root : agg.root_of[c]);
    }
    out.duplicated.push_back(std::move(dup));
  }
  return out;
}

void write_aggregation_csv(const std::string& path, const CartesianMesh& mesh,
                           const SlabClassification& cls, const AggregateMap& agg) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_aggregation_csv: cannot open " + path);
  f << "cell,status,eta,root,generation\n";
  f.precision(17);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const char* s = cls.status[c] == CellStatus::Interior ? "interior"
                    : cls.status[c] == CellStatus::Cut    ? "cut"
                                                          : "exterior";
    f << c << ',' << s << ',';
    if (cls.is_active(c))
      f << cls.eta[c];
    f << ',' << agg.root_of[c] << ',' << agg.generation[c] << '\n';
  }
}

}  // namespace stfem
