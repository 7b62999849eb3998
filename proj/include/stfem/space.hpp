#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "stfem/aggregation.hpp"
#include "stfem/cutcell.hpp"

namespace stfem {

/// Tensor-product space-time Lagrangian FE space on the active mesh of one
/// slab: continuous Q_p in space, discontinuous P_q in time (Lagrange basis
/// at Gauss-Lobatto points of the slab, so the traces at both slab ends are
/// nodal). Spatial DOFs owned by at least one well-posed cell are free; the
/// remaining ones are constrained to the Lagrange basis of their aggregate's
/// root cell, extrapolated polynomially. Constraints act on spatial DOFs
/// only and are replicated across all q+1 temporal nodes.
struct AgFESpace {
  const CartesianMesh* mesh = nullptr;
  SlabClassification cls;
  int p = 1, q = 1;
  bool aggregated = true;
  double t0 = 0.0, t1 = 1.0;

  std::vector<double> temporal_ref_nodes;  // on [0,1]
  std::array<int, 2> nodes_per_dim{};

  std::vector<int> grid_of_active;  // active spatial node -> grid node id
  std::vector<int> active_of_grid;  // grid node id -> active index or -1
  std::vector<Coord> coords;        // per active spatial node
  std::vector<char> free_flag;
  std::vector<int> free_of_active;  // -1 when constrained
  std::vector<int> active_of_free;
  // per constrained active node: (free spatial dof, coefficient); the
  // coefficients of one node sum to 1 (partition of unity of the root
  // cell's basis survives extrapolation).
  std::vector<std::vector<std::pair<int, double>>> constraints;

  std::vector<int> active_cell_ids;
  std::vector<int> active_cell_index;             // cell id -> position or -1
  std::vector<std::vector<int>> cell_active_nodes;  // per active cell, x fastest

  int n_free_spatial = 0;

  int n_local_spatial() const;
  int n_temporal() const { return q + 1; }
  int n_st_dofs() const { return n_free_spatial * (q + 1); }
  int st_dof(int free_spatial, int k) const { return free_spatial * (q + 1) + k; }
  double temporal_node_time(int k) const { return t0 + temporal_ref_nodes[k] * (t1 - t0); }

  /// Lagrange basis in time at physical time t; dpsi in d/dt units.
  void temporal_basis(double t, double* psi, double* dpsi = nullptr) const;

  /// Q_p basis of a cell at physical point x: values, gradients and (when
  /// requested) second derivatives (dxx, dxy, dyy).
  void spatial_basis(int cell, const Coord& x, double* N, Coord* grad = nullptr,
                     std::array<double, 3>* hess = nullptr) const;
};

AgFESpace build_space(const CartesianMesh& mesh, const SlabClassification& cls,
                      const AggregateMap& agg, int p, int q);

/// Unconstrained active space (every active spatial DOF free); the trial
/// space of the unaggregated standard method and of the ghost-penalty
/// variants.
AgFESpace build_space_unaggregated(const CartesianMesh& mesh, const SlabClassification& cls,
                                   int p, int q);

/// Coefficients live on free space-time DOFs only; evaluation anywhere in
/// the active region goes through the constraints.
struct SlabFunction {
  const AgFESpace* space = nullptr;
  Eigen::VectorXd coef;
};

/// Space-only field on the slab's spatial AgFE structure (a time trace or
/// a projected initial condition).
struct SpatialField {
  const AgFESpace* space = nullptr;
  Eigen::VectorXd coef;  // size n_free_spatial

  double operator()(const Coord& x) const;
  double eval_on_cell(int cell, const Coord& x) const;
};

double eval(const AgFESpace& space, const SlabFunction& f, const Coord& x, double t);
double eval_on_cell(const AgFESpace& space, const SlabFunction& f, int cell, const Coord& x,
                    double t);

/// Time derivative of the space-time field at (x, t).
double eval_dt_on_cell(const AgFESpace& space, const SlabFunction& f, int cell, const Coord& x,
                       double t);

/// Value, spatial gradient and spatial second derivatives at (x, t).
void eval_derivatives_on_cell(const AgFESpace& space, const SlabFunction& f, int cell,
                              const Coord& x, double t, double* value, Coord* grad,
                              std::array<double, 3>* hess);

/// Restriction f(. , t) as a space-only field (the map from the space-time
/// reference cell at fixed time onto the spatial reference cell).
SpatialField restrict_at_time(const AgFESpace& space, const SlabFunction& f, double t);

/// Nodal interpolation of g(x,t) at the space-time Lagrange nodes of the
/// free DOFs.
SlabFunction interpolate(const AgFESpace& space,
                         const std::function<double(const Coord&, double)>& g);

}  // namespace stfem
