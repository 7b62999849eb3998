#pragma once

#include <Eigen/Sparse>
#include <functional>

#include "stfem/space.hpp"

namespace stfem {

enum class BoundaryKind { Dirichlet, Neumann };

/// Data of the model problem du/dt + w . grad(u) - mu Lap(u) = f with
/// weakly imposed Dirichlet data (Nitsche, beta_T = mu*gamma/h_T) and/or
/// Neumann flux. The moving interface and the outer box boundary carry
/// their own tags.
struct ProblemData {
  double mu = 1.0;
  double gamma = 20.0;  // Nitsche parameter; experiments use 10 p (p+1)
  std::function<double(const Coord&, double)> source;
  std::function<double(const Coord&, double)> dirichlet;
  std::function<double(const Coord&, double)> neumann;
  std::function<Coord(const Coord&, double)> convection;  // solenoidal
  BoundaryKind interface_bc = BoundaryKind::Dirichlet;
  BoundaryKind outer_bc = BoundaryKind::Dirichlet;
};

using SpMat = Eigen::SparseMatrix<double>;

/// Reduced linear system over the free space-time DOFs of one slab;
/// constrained DOFs are eliminated through the constraint coefficients
/// during the scatter, never penalised.
struct SlabSystem {
  SpMat matrix;
  Eigen::VectorXd rhs;
};

struct AssemblyOptions {
  int spatial_order = -1;   // default 2p
  int temporal_order = -1;  // default 2q+1
};

/// Trace of the previous slab's solution (or the projected initial datum),
/// evaluated per cell at quadrature points of Omega^{n-1}.
using CellEval = std::function<double(int cell, const Coord& x)>;

/// Slab-wise space-time form: time derivative term, inter-slab coupling on
/// Omega^{n-1} (the known part of the jump moves to the right-hand side),
/// diffusion, convection and Nitsche boundary terms integrated with the
/// Fubini space-time rules.
SlabSystem assemble_slab(const AgFESpace& space, const LevelSetField& ls, const ProblemData& data,
                         const CellEval& prev, const AssemblyOptions& opt = {});

/// Space-time mass matrix over the free DOFs, constraints expanded.
SpMat assemble_mass(const AgFESpace& space, const LevelSetField& ls,
                    const AssemblyOptions& opt = {});

/// Time-integrated spatial form including the Nitsche terms; symmetric.
SpMat assemble_stiffness(const AgFESpace& space, const LevelSetField& ls, const ProblemData& data,
                         const AssemblyOptions& opt = {});

enum class GhostKind { WeakAgfem, Bulk, Face };

/// Ghost-penalty stabilisation on the unconstrained active space, the
/// alternative to aggregation: deviation-from-projection penalties on cut
/// cells (WeakAgfem projects with the discrete extension, Bulk with the
/// aggregate-wise L2 projection onto polynomials of total degree p) or
/// normal-derivative jumps across cut faces (Face, orders 1..i_max).
SpMat ghost_penalty(const AgFESpace& unaggregated, const SlabClassification& cls,
                    const AggregateMap* agg, GhostKind kind, double gamma_g, int i_max);

}  // namespace stfem
