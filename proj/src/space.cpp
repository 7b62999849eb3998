#include "stfem/space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stfem/gauss.hpp"

namespace stfem {

namespace {

void shape1d(int p, double xi, double* N, double* dN, double* ddN) {
  if (p == 1) {
    N[0] = 1.0 - xi;
    N[1] = xi;
    if (dN) {
      dN[0] = -1.0;
      dN[1] = 1.0;
    }
    if (ddN) ddN[0] = ddN[1] = 0.0;
  } else if (p == 2) {
    N[0] = 2.0 * xi * xi - 3.0 * xi + 1.0;
    N[1] = 4.0 * xi * (1.0 - xi);
    N[2] = 2.0 * xi * xi - xi;
    if (dN) {
      dN[0] = 4.0 * xi - 3.0;
      dN[1] = 4.0 - 8.0 * xi;
      dN[2] = 4.0 * xi - 1.0;
    }
    if (ddN) {
      ddN[0] = 4.0;
      ddN[1] = -8.0;
      ddN[2] = 4.0;
    }
  } else {
    throw std::invalid_argument("shape1d: supported spatial orders are 1 and 2");
  }
}

int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

AgFESpace build_common(const CartesianMesh& mesh, const SlabClassification& cls, int p, int q) {
  if (p < 1 || p > 2 || q < 1 || q > 2)
    throw std::invalid_argument("build_space: supported orders are p, q in {1,2}");
  AgFESpace sp;
  sp.mesh = &mesh;
  sp.cls = cls;
  sp.p = p;
  sp.q = q;
  sp.t0 = cls.t_begin;
  sp.t1 = cls.t_end;
  sp.temporal_ref_nodes = gauss_lobatto_nodes(q + 1);
  for (int d = 0; d < mesh.dim; ++d) sp.nodes_per_dim[d] = p * mesh.n_cells[d] + 1;
  if (mesh.dim == 1) sp.nodes_per_dim[1] = 1;

  const int n_grid = sp.nodes_per_dim[0] * sp.nodes_per_dim[1];
  sp.active_of_grid.assign(n_grid, -1);
  sp.active_cell_index.assign(mesh.num_cells(), -1);

  auto grid_id = [&](int i, int j) { return i + sp.nodes_per_dim[0] * j; };

  // active nodes in grid order, then per-cell tables
  std::vector<char> owned_by_well_posed(n_grid, 0);
  std::vector<char> is_active_node(n_grid, 0);
  for (int c : cls.active_cells) {
    const auto ci = mesh.cell_multi_index(c);
    const int nj = mesh.dim == 1 ? 0 : p;
    for (int j = 0; j <= nj; ++j)
      for (int i = 0; i <= p; ++i) {
        const int g = grid_id(p * ci[0] + i, mesh.dim == 1 ? 0 : p * ci[1] + j);
        is_active_node[g] = 1;
        if (cls.well_posed[c]) owned_by_well_posed[g] = 1;
      }
  }
  for (int g = 0; g < n_grid; ++g) {
    if (!is_active_node[g]) continue;
    sp.active_of_grid[g] = static_cast<int>(sp.grid_of_active.size());
    sp.grid_of_active.push_back(g);
    const int i = g % sp.nodes_per_dim[0], j = g / sp.nodes_per_dim[0];
    Coord x{mesh.origin[0] + i * mesh.h[0] / p, 0.0};
    if (mesh.dim > 1) x[1] = mesh.origin[1] + j * mesh.h[1] / p;
    sp.coords.push_back(x);
    sp.free_flag.push_back(owned_by_well_posed[g]);
  }

  sp.active_cell_ids = cls.active_cells;
  sp.cell_active_nodes.resize(sp.active_cell_ids.size());
  for (std::size_t k = 0; k < sp.active_cell_ids.size(); ++k) {
    const int c = sp.active_cell_ids[k];
    sp.active_cell_index[c] = static_cast<int>(k);
    const auto ci = mesh.cell_multi_index(c);
    auto& tbl = sp.cell_active_nodes[k];
    const int nj = mesh.dim == 1 ? 0 : p;
    for (int j = 0; j <= nj; ++j)
      for (int i = 0; i <= p; ++i)
        tbl.push_back(sp.active_of_grid[grid_id(p * ci[0] + i, mesh.dim == 1 ? 0 : p * ci[1] + j)]);
  }
  return sp;
}

void number_free_dofs(AgFESpace& sp) {
  sp.free_of_active.assign(sp.coords.size(), -1);
  for (std::size_t a = 0; a < sp.coords.size(); ++a) {
    if (sp.free_flag[a]) {
      sp.free_of_active[a] = sp.n_free_spatial++;
      sp.active_of_free.push_back(static_cast<int>(a));
    }
  }
  sp.constraints.assign(sp.coords.size(), {});
}

}  // namespace

int AgFESpace::n_local_spatial() const { return ipow(p + 1, mesh->dim); }

void AgFESpace::temporal_basis(double t, double* psi, double* dpsi) const {
  const double tau = t1 - t0;
  const double xi = (t - t0) / tau;
  const int n = q + 1;
  for (int i = 0; i < n; ++i) {
    double v = 1.0;
    for (int j = 0; j < n; ++j)
      if (j != i) v *= (xi - temporal_ref_nodes[j]) / (temporal_ref_nodes[i] - temporal_ref_nodes[j]);
    psi[i] = v;
    if (dpsi) {
      double dv = 0.0;
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        double term = 1.0 / (temporal_ref_nodes[i] - temporal_ref_nodes[k]);
        for (int j = 0; j < n; ++j)
          if (j != i && j != k)
            term *= (xi - temporal_ref_nodes[j]) / (temporal_ref_nodes[i] - temporal_ref_nodes[j]);
        dv += term;
      }
      dpsi[i] = dv / tau;
    }
  }
}

void AgFESpace::spatial_basis(int cell, const Coord& x, double* N, Coord* grad,
                              std::array<double, 3>* hess) const {
  const Coord lo = mesh->cell_lo(cell);
  double nx[3], dnx[3], ddnx[3];
  const double xix = (x[0] - lo[0]) / mesh->h[0];
  shape1d(p, xix, nx, dnx, ddnx);
  if (mesh->dim == 1) {
    for (int i = 0; i <= p; ++i) {
      N[i] = nx[i];
      if (grad) grad[i] = {dnx[i] / mesh->h[0], 0.0};
      if (hess) hess[i] = {ddnx[i] / (mesh->h[0] * mesh->h[0]), 0.0, 0.0};
    }
    return;
  }
  double ny[3], dny[3], ddny[3];
  const double xiy = (x[1] - lo[1]) / mesh->h[1];
  shape1d(p, xiy, ny, dny, ddny);
  int a = 0;
  for (int j = 0; j <= p; ++j)
    for (int i = 0; i <= p; ++i, ++a) {
      N[a] = nx[i] * ny[j];
      if (grad) grad[a] = {dnx[i] * ny[j] / mesh->h[0], nx[i] * dny[j] / mesh->h[1]};
      if (hess)
        hess[a] = {ddnx[i] * ny[j] / (mesh->h[0] * mesh->h[0]),
                   dnx[i] * dny[j] / (mesh->h[0] * mesh->h[1]),
                   nx[i] * ddny[j] / (mesh->h[1] * mesh->h[1])};
    }
}

AgFESpace build_space(const CartesianMesh& mesh, const SlabClassification& cls,
                      const AggregateMap& agg, int p, int q) {
  AgFESpace sp = build_common(mesh, cls, p, q);
  sp.aggregated = true;
  number_free_dofs(sp);

  double N[9];
  for (std::size_t a = 0; a < sp.coords.size(); ++a) {
    if (sp.free_flag[a]) continue;
    // owning ill-posed cell with the lowest root id decides the aggregate
    const int g = sp.grid_of_active[a];
    const int gi = g % sp.nodes_per_dim[0], gj = g / sp.nodes_per_dim[0];
    int root = -1;
    // enumerate owning cells directly from the node's grid position
    const int ci_lo = std::max(0, (gi - p) / p), ci_hi = std::min(mesh.n_cells[0] - 1, gi / p);
    int cj_lo = 0, cj_hi = 0;
    if (mesh.dim > 1) {
      cj_lo = std::max(0, (gj - p) / p);
      cj_hi = std::min(mesh.n_cells[1] - 1, gj / p);
    }
    for (int cj = cj_lo; cj <= cj_hi; ++cj)
      for (int ci = ci_lo; ci <= ci_hi; ++ci) {
        const int c = mesh.cell_id({ci, cj});
        // owning test: the node's grid range must fall on the cell's nodes
        if (gi < p * ci || gi > p * ci + p) continue;
        if (mesh.dim > 1 && (gj < p * cj || gj > p * cj + p)) continue;
        if (!cls.is_active(c)) continue;
        const int r = agg.root_of[c];
        if (r >= 0 && (root < 0 || r < root)) root = r;
      }
    if (root < 0)
      throw std::runtime_error("build_space: constrained node " + std::to_string(a) +
                               " has no rooted owning cell");
    sp.spatial_basis(root, sp.coords[a], N);
    const int root_k = sp.active_cell_index[root];
    auto& list = sp.constraints[a];
    for (int ln = 0; ln < sp.n_local_spatial(); ++ln) {
      const int an = sp.cell_active_nodes[root_k][ln];
      const int fd = sp.free_of_active[an];
      if (fd < 0)
        throw std::runtime_error("build_space: root cell of an aggregate carries a constrained DOF");
      if (N[ln] != 0.0) list.emplace_back(fd, N[ln]);
    }
  }
  return sp;
}

AgFESpace build_space_unaggregated(const CartesianMesh& mesh, const SlabClassification& cls,
                                   int p, int q) {
  AgFESpace sp = build_common(mesh, cls, p, q);
  sp.aggregated = false;
  std::fill(sp.free_flag.begin(), sp.free_flag.end(), 1);
  number_free_dofs(sp);
  return sp;
}

namespace {

int active_cell_at(const AgFESpace& sp, const Coord& x) {
  for (int c : sp.mesh->cells_containing(x))
    if (sp.cls.is_active(c)) return c;
  throw std::invalid_argument("eval: point outside the active region");
}

// coefficient of (active spatial node, temporal node) with constraints expanded
double nodal_coef(const AgFESpace& sp, const Eigen::VectorXd& coef, int a, int k) {
  const int fd = sp.free_of_active[a];
  if (fd >= 0) return coef[sp.st_dof(fd, k)];
  double v = 0.0;
  for (const auto& [c, w] : sp.constraints[a]) v += w * coef[sp.st_dof(c, k)];
  return v;
}

double nodal_coef_spatial(const AgFESpace& sp, const Eigen::VectorXd& coef, int a) {
  const int fd = sp.free_of_active[a];
  if (fd >= 0) return coef[fd];
  double v = 0.0;
  for (const auto& [c, w] : sp.constraints[a]) v += w * coef[c];
  return v;
}

}  // namespace

double eval_on_cell(const AgFESpace& sp, const SlabFunction& f, int cell, const Coord& x,
                    double t) {
  const int ck = sp.active_cell_index[cell];
  if (ck < 0) throw std::invalid_argument("eval_on_cell: cell is not active");
  double N[9], psi[3];
  sp.spatial_basis(cell, x, N);
  sp.temporal_basis(t, psi);
  double v = 0.0;
  const auto& tbl = sp.cell_active_nodes[ck];
  for (int a = 0; a < sp.n_local_spatial(); ++a) {
    double ca = 0.0;
    for (int k = 0; k <= sp.q; ++k) ca += psi[k] * nodal_coef(sp, f.coef, tbl[a], k);
    v += N[a] * ca;
  }
  return v;
}

double eval(const AgFESpace& sp, const SlabFunction& f, const Coord& x, double t) {
  if (t < sp.t0 - 1e-14 * (sp.t1 - sp.t0) || t > sp.t1 + 1e-14 * (sp.t1 - sp.t0))
    throw std::invalid_argument("eval: t outside the slab");
  return eval_on_cell(sp, f, active_cell_at(sp, x), x, t);
}

double eval_dt_on_cell(const AgFESpace& sp, const SlabFunction& f, int cell, const Coord& x,
                       double t) {
  const int ck = sp.active_cell_index[cell];
  if (ck < 0) throw std::invalid_argument("eval_dt_on_cell: cell is not active");
  double N[9], psi[3], dpsi[3];
  sp.spatial_basis(cell, x, N);
  sp.temporal_basis(t, psi, dpsi);
  double v = 0.0;
  const auto& tbl = sp.cell_active_nodes[ck];
  for (int a = 0; a < sp.n_local_spatial(); ++a) {
    double ca = 0.0;
    for (int k = 0; k <= sp.q; ++k) ca += dpsi[k] * nodal_coef(sp, f.coef, tbl[a], k);
    v += N[a] * ca;
  }
  return v;
}

void eval_derivatives_on_cell(const AgFESpace& sp, const SlabFunction& f, int cell, const Coord& x,
                              double t, double* value, Coord* grad, std::array<double, 3>* hess) {
  const int ck = sp.active_cell_index[cell];
  if (ck < 0) throw std::invalid_argument("eval_derivatives_on_cell: cell is not active");
  double N[9], psi[3];
  Coord dN[9];
  std::array<double, 3> ddN[9];
  sp.spatial_basis(cell, x, N, dN, ddN);
  sp.temporal_basis(t, psi);
  double v = 0.0;
  Coord g{0.0, 0.0};
  std::array<double, 3> H{0.0, 0.0, 0.0};
  const auto& tbl = sp.cell_active_nodes[ck];
  for (int a = 0; a < sp.n_local_spatial(); ++a) {
    double ca = 0.0;
    for (int k = 0; k <= sp.q; ++k) ca += psi[k] * nodal_coef(sp, f.coef, tbl[a], k);
    v += N[a] * ca;
    g[0] += dN[a][0] * ca;
    g[1] += dN[a][1] * ca;
    for (int m = 0; m < 3; ++m) H[m] += ddN[a][m] * ca;
  }
  if (value) *value = v;
  if (grad) *grad = g;
  if (hess) *hess = H;
}

double SpatialField::eval_on_cell(int cell, const Coord& x) const {
  const int ck = space->active_cell_index[cell];
  if (ck < 0) throw std::invalid_argument("SpatialField: cell is not active");
  double N[9];
  space->spatial_basis(cell, x, N);
  double v = 0.0;
  const auto& tbl = space->cell_active_nodes[ck];
  for (int a = 0; a < space->n_local_spatial(); ++a)
    v += N[a] * nodal_coef_spatial(*space, coef, tbl[a]);
  return v;
}

double SpatialField::operator()(const Coord& x) const {
  return eval_on_cell(active_cell_at(*space, x), x);
}

SpatialField restrict_at_time(const AgFESpace& sp, const SlabFunction& f, double t) {
  if (t < sp.t0 - 1e-14 * (sp.t1 - sp.t0) || t > sp.t1 + 1e-14 * (sp.t1 - sp.t0))
    throw std::invalid_argument("restrict_at_time: t outside the slab");
  double psi[3];
  sp.temporal_basis(t, psi);
  SpatialField out;
  out.space = &sp;
  out.coef = Eigen::VectorXd::Zero(sp.n_free_spatial);
  for (int s = 0; s < sp.n_free_spatial; ++s)
    for (int k = 0; k <= sp.q; ++k) out.coef[s] += psi[k] * f.coef[sp.st_dof(s, k)];
  return out;
}

SlabFunction interpolate(const AgFESpace& sp,
                         const std::function<double(const Coord&, double)>& g) {
  SlabFunction f;
  f.space = &sp;
  f.coef = Eigen::VectorXd::Zero(sp.n_st_dofs());
  for (int s = 0; s < sp.n_free_spatial; ++s) {
    const Coord& x = sp.coords[sp.active_of_free[s]];
    for (int k = 0; k <= sp.q; ++k) {
      const double v = g(x, sp.temporal_node_time(k));
      if (!std::isfinite(v)) throw std::runtime_error("interpolate: non-finite nodal value");
      f.coef[sp.st_dof(s, k)] = v;
    }
  }
  return f;
}

}  // namespace stfem
