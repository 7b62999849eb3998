#include "stfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stfem {

int CartesianMesh::num_cells() const {
  int n = 1;
  for (int d = 0; d < dim; ++d) n *= n_cells[d];
  return n;
}

std::array<int, 2> CartesianMesh::cell_multi_index(int cell) const {
  std::array<int, 2> idx{0, 0};
  idx[0] = cell % n_cells[0];
  if (dim > 1) idx[1] = cell / n_cells[0];
  return idx;
}

int CartesianMesh::cell_id(const std::array<int, 2>& idx) const {
  return dim == 1 ? idx[0] : idx[0] + n_cells[0] * idx[1];
}

bool CartesianMesh::valid_cell(int cell) const {
  return cell >= 0 && cell < num_cells();
}

Coord CartesianMesh::cell_lo(int cell) const {
  auto idx = cell_multi_index(cell);
  Coord lo{origin[0] + idx[0] * h[0], 0.0};
  if (dim > 1) lo[1] = origin[1] + idx[1] * h[1];
  return lo;
}

Coord CartesianMesh::cell_hi(int cell) const {
  auto lo = cell_lo(cell);
  Coord hi{lo[0] + h[0], 0.0};
  if (dim > 1) hi[1] = lo[1] + h[1];
  return hi;
}

double CartesianMesh::cell_volume() const {
  double v = 1.0;
  for (int d = 0; d < dim; ++d) v *= h[d];
  return v;
}

double CartesianMesh::max_h() const {
  double m = h[0];
  for (int d = 1; d < dim; ++d) m = std::max(m, h[d]);
  return m;
}

double CartesianMesh::min_h() const {
  double m = h[0];
  for (int d = 1; d < dim; ++d) m = std::min(m, h[d]);
  return m;
}

std::vector<int> CartesianMesh::cell_neighbors(int cell) const {
  if (!valid_cell(cell))
    throw std::invalid_argument("cell_neighbors: invalid cell id " + std::to_string(cell));
  auto idx = cell_multi_index(cell);
  std::vector<int> out;
  out.reserve(2 * dim);
  for (int d = 0; d < dim; ++d) {
    for (int s : {-1, 1}) {
      auto nb = idx;
      nb[d] += s;
      if (nb[d] >= 0 && nb[d] < n_cells[d]) out.push_back(cell_id(nb));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<int> CartesianMesh::locate_point(const Coord& x) const {
  const double tol = 1e-12 * std::max(lengths[0], dim > 1 ? lengths[1] : 0.0);
  std::array<int, 2> idx{0, 0};
  for (int d = 0; d < dim; ++d) {
    const double xi = (x[d] - origin[d]) / h[d];
    if (xi < -tol / h[d] || xi > n_cells[d] + tol / h[d]) return std::nullopt;
    int i = static_cast<int>(std::floor(xi));
    // exact face hit: tie toward the lower-index cell
    if (xi == static_cast<double>(i) && i > 0) i -= 1;
    idx[d] = std::clamp(i, 0, n_cells[d] - 1);
  }
  return cell_id(idx);
}

std::vector<int> CartesianMesh::cells_containing(const Coord& x) const {
  const double tol = 1e-12 * std::max(lengths[0], dim > 1 ? lengths[1] : 0.0);
  std::array<std::vector<int>, 2> per_dim;
  for (int d = 0; d < dim; ++d) {
    const double xi = (x[d] - origin[d]) / h[d];
    if (xi < -tol / h[d] || xi > n_cells[d] + tol / h[d]) return {};
    const double ftol = 1e-12;
    const double r = xi - std::round(xi);
    if (std::abs(r) <= ftol) {
      const int k = static_cast<int>(std::round(xi));
      if (k > 0) per_dim[d].push_back(k - 1);
      if (k < n_cells[d]) per_dim[d].push_back(k);
    } else {
      per_dim[d].push_back(std::clamp(static_cast<int>(std::floor(xi)), 0, n_cells[d] - 1));
    }
  }
  std::vector<int> out;
  if (dim == 1) {
    for (int i : per_dim[0]) out.push_back(cell_id({i, 0}));
  } else {
    for (int j : per_dim[1])
      for (int i : per_dim[0]) out.push_back(cell_id({i, j}));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool CartesianMesh::face_on_box_boundary(int cell, int face) const {
  const int axis = face / 2, side = face % 2;
  auto idx = cell_multi_index(cell);
  return side == 0 ? idx[axis] == 0 : idx[axis] == n_cells[axis] - 1;
}

CartesianMesh build_mesh(int dim, const Coord& lo, const Coord& hi,
                         const std::array<int, 2>& cells) {
  if (dim < 1 || dim > 2) throw std::invalid_argument("build_mesh: dim must be 1 or 2");
  CartesianMesh m;
  m.dim = dim;
  for (int d = 0; d < dim; ++d) {
    if (!(hi[d] > lo[d]))
      throw std::invalid_argument("build_mesh: degenerate box in dimension " + std::to_string(d));
    if (cells[d] < 1)
      throw std::invalid_argument("build_mesh: cell count must be >= 1 in dimension " +
                                  std::to_string(d));
    m.origin[d] = lo[d];
    m.lengths[d] = hi[d] - lo[d];
    m.n_cells[d] = cells[d];
    m.h[d] = m.lengths[d] / cells[d];
  }
  if (dim == 1) m.n_cells[1] = 1;
  if (m.max_h() / m.min_h() > 10.0)
    throw std::invalid_argument("build_mesh: mesh violates quasi-uniformity (max(h)/min(h) > 10)");
  return m;
}

double TimeSlabbing::max_tau() const {
  double m = 0.0;
  for (int n = 0; n < num_slabs(); ++n) m = std::max(m, tau(n));
  return m;
}

TimeSlabbing make_slabbing(std::vector<double> t_points) {
  if (t_points.size() < 2) throw std::invalid_argument("make_slabbing: need at least one slab");
  for (std::size_t i = 1; i < t_points.size(); ++i)
    if (!(t_points[i] > t_points[i - 1]))
      throw std::invalid_argument("make_slabbing: time points must be strictly increasing");
  return TimeSlabbing{std::move(t_points)};
}

TimeSlabbing uniform_slabbing(double t_end, int n_slabs) {
  if (n_slabs < 1 || !(t_end > 0.0))
    throw std::invalid_argument("uniform_slabbing: need t_end > 0 and n_slabs >= 1");
  std::vector<double> t(n_slabs + 1);
  for (int i = 0; i <= n_slabs; ++i) t[i] = t_end * i / n_slabs;
  t.back() = t_end;
  return TimeSlabbing{std::move(t)};
}

}  // namespace stfem
