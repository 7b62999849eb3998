#pragma once

#include <array>
#include <optional>
#include <vector>

namespace stfem {

// Spatial point / vector, padded to the maximum supported dimension.
// For dim == 1 the second component is unused and kept at zero.
using Coord = std::array<double, 2>;

/// Uniform Cartesian partition of the artificial bounding box.
/// Cells and vertices are numbered lexicographically with x running
/// fastest; this fixes a reproducible DOF ordering for all downstream
/// modules and for the CSV outputs.
struct CartesianMesh {
  int dim = 2;
  Coord origin{};
  Coord lengths{};
  std::array<int, 2> n_cells{1, 1};
  Coord h{};

  int num_cells() const;
  int num_vertices_per_dim(int d) const { return n_cells[d] + 1; }

  std::array<int, 2> cell_multi_index(int cell) const;
  int cell_id(const std::array<int, 2>& idx) const;
  bool valid_cell(int cell) const;

  Coord cell_lo(int cell) const;
  Coord cell_hi(int cell) const;
  double cell_volume() const;
  double max_h() const;
  double min_h() const;

  /// Face-adjacent spatial neighbours only (2*dim in the interior,
  /// fewer on the boundary); no diagonal adjacency.
  std::vector<int> cell_neighbors(int cell) const;

  /// The unique cell whose closed box contains x, ties broken toward the
  /// lower-index cell. Returns nothing if x lies outside the box by more
  /// than 1e-12 * max(lengths).
  std::optional<int> locate_point(const Coord& x) const;

  /// All cells whose closed box contains x (up to 2^dim of them when x
  /// sits on shared faces). Ordered by cell id.
  std::vector<int> cells_containing(const Coord& x) const;

  /// True if the given face of the cell lies on the boundary of the box.
  /// Faces are numbered (axis, side): face = 2*axis + side, side 0 = low.
  bool face_on_box_boundary(int cell, int face) const;
};

/// Throws std::invalid_argument on a degenerate box, zero cell counts or
/// a violation of the quasi-uniformity bound max(h)/min(h) <= 10.
CartesianMesh build_mesh(int dim, const Coord& lo, const Coord& hi,
                         const std::array<int, 2>& cells);

/// Partition 0 = t^0 < ... < t^N = T into time slabs J^n = (t^{n-1}, t^n).
/// Slabs are indexed 0-based in code: slab n spans (t_points[n], t_points[n+1]).
struct TimeSlabbing {
  std::vector<double> t_points;

  int num_slabs() const { return static_cast<int>(t_points.size()) - 1; }
  double slab_begin(int n) const { return t_points[n]; }
  double slab_end(int n) const { return t_points[n + 1]; }
  double tau(int n) const { return t_points[n + 1] - t_points[n]; }
  double max_tau() const;
};

TimeSlabbing make_slabbing(std::vector<double> t_points);
TimeSlabbing uniform_slabbing(double t_end, int n_slabs);

}  // namespace stfem
