#pragma once

#include <vector>

#include "stfem/levelset.hpp"
#include "stfem/mesh.hpp"

namespace stfem {

enum class CellStatus : unsigned char { Interior, Cut, Exterior };

/// Per-cell cut classification of one time slab. eta is the minimum over
/// the sampled times of the in-domain volume fraction |T ∩ Omega(t)| / |T|;
/// a cell is well-posed when eta >= eta0.
struct SlabClassification {
  int slab_index = 0;
  double t_begin = 0.0, t_end = 0.0;
  double eta0 = 1.0;
  std::vector<double> sample_times;
  std::vector<CellStatus> status;  // per cell
  std::vector<double> eta;         // per cell; 1 on interior cells, unused on exterior
  std::vector<char> well_posed;    // per cell
  std::vector<int> active_cells;   // interior + cut, ascending ids

  bool is_active(int cell) const { return status[cell] != CellStatus::Exterior; }
  int num_active() const { return static_cast<int>(active_cells.size()); }
};

/// Classify every cell of the slab (t0, t1). The in-fraction is sampled at
/// the slab endpoints plus (n_time_samples - 2) interior Gauss points and
/// computed from the sub-triangulated cut geometry. Throws when no
/// well-posed cell exists or the level set evaluates to a non-finite value.
SlabClassification classify_slab(const CartesianMesh& mesh, const LevelSetField& ls, double t0,
                                 double t1, int n_time_samples, double eta0, int slab_index = 0);

/// Quadrature points/weights on T ∩ Omega(t) (volume rules) or on the
/// linearised zero level set within a cell (interface rules, with unit
/// normals pointing out of Omega, i.e. toward positive level-set values).
struct CutQuadrature {
  std::vector<Coord> points;
  std::vector<double> weights;
  std::vector<Coord> normals;  // interface rules only

  int size() const { return static_cast<int>(points.size()); }
  double total_weight() const;
};

/// Volume rule on T ∩ Omega(t) with polynomial exactness >= order on each
/// piece (tensor Gauss on uncut cells, conical Gauss per sub-simplex on cut
/// cells). Throws if the cell is exterior at t.
CutQuadrature cut_cell_quadrature(const CartesianMesh& mesh, int cell, const LevelSetField& ls,
                                  double t, int order);

/// Surface rule with outward normals on the linearised interface inside a
/// cut cell. Throws if the cell is not cut at t.
CutQuadrature interface_quadrature(const CartesianMesh& mesh, int cell, const LevelSetField& ls,
                                   double t, int order);

/// As cut_cell_quadrature / interface_quadrature, but returning an empty
/// rule instead of throwing (assembly iterates over slab-active cells that
/// may be exterior or uncut at individual time points).
CutQuadrature cell_volume_rule(const CartesianMesh& mesh, int cell, const LevelSetField& ls,
                               double t, int order);
CutQuadrature cell_interface_rule(const CartesianMesh& mesh, int cell, const LevelSetField& ls,
                                  double t, int order);

/// Tensor Gauss rule over the whole (uncut) cell box.
CutQuadrature full_cell_rule(const CartesianMesh& mesh, int cell, int order);

/// One temporal Gauss point of a space-time rule: integrate g over the
/// space-time cell as sum_k weight_k * sum_j rule.weights[j] * g(x_j, t_k).
struct TimeSlice {
  double t = 0.0;
  double weight = 0.0;
  CutQuadrature rule;
};

/// Fubini rule over the tensor-product space-time cell T x (t0,t1):
/// temporal Gauss-Legendre with exactness >= temporal_order, a spatial cut
/// rule at each temporal point. Slices where the cell is exterior carry an
/// empty rule.
std::vector<TimeSlice> spacetime_quadrature(const CartesianMesh& mesh, int cell,
                                            const LevelSetField& ls, double t0, double t1,
                                            int spatial_order, int temporal_order);

// --- sub-triangulation (exposed for the aggregation module, tests and VTK dumps) ---

struct Simplex {
  std::array<Coord, 3> v;  // d=1 uses v[0], v[1]
  double measure(int dim) const;
};

struct InterfaceFacet {
  std::array<Coord, 2> v;  // d=1 uses v[0] only
  Coord normal;
  double measure(int dim) const;
};

struct SubTriangulation {
  std::vector<Simplex> inside;
  std::vector<InterfaceFacet> facets;
  double inside_measure = 0.0;
};

/// Sub-triangulation of T ∩ Omega(t) from the vertex-sampled (and, in 2D,
/// centre-sampled) level set with linear interpolation along edges.
SubTriangulation subtriangulate(const CartesianMesh& mesh, int cell, const LevelSetField& ls,
                                double t);

/// In-domain volume fraction of a cell at time t, with fractions within
/// 1e-9 of 0 or 1 snapped to the exact value (tie rule for interfaces that
/// coincide with cell faces).
double in_fraction(const CartesianMesh& mesh, int cell, const LevelSetField& ls, double t);

/// Connected-component labels of the inside simplices (edge adjacency);
/// returns the number of components.
int inside_components(const SubTriangulation& st, int dim, std::vector<int>* labels = nullptr);

}  // namespace stfem
