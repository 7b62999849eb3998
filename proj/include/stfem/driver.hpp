#pragma once

#include <memory>

#include "stfem/assembly.hpp"
#include "stfem/solver.hpp"

namespace stfem {

enum class Stabilization { AgFEM, GhostWeak, GhostBulk, GhostFace, None };

struct RunParams {
  int p = 1, q = 1;
  double eta0 = 1.0;
  int n_eta_samples = 0;  // 0 -> max(q+2, 5)
  Stabilization stab = Stabilization::AgFEM;
  double gamma_ghost = 1.0;
  int ghost_i_max = 1;
  AssemblyOptions quad;
  bool collect_condition = false;
  int cond_dense_cap = 20000;
};

struct SlabDiagnostics {
  int n_active = 0, n_cut = 0, n_free_dofs = 0;
  double residual = 0.0;
  double kappa_mass = 0.0, kappa_stiffness = 0.0;
  bool kappa_is_estimate = false;
};

/// Outcome of the slab-marching loop. Every slab's space and coefficient
/// field is kept so norms, traces and snapshots can be evaluated after the
/// run. The result references the mesh and level set it was built with.
struct SimulationResult {
  TimeSlabbing slabs;
  std::vector<std::shared_ptr<AgFESpace>> spaces;
  std::vector<SlabFunction> solutions;
  std::shared_ptr<AgFESpace> initial_space;  // aggregated trace space at t^0
  SpatialField initial;                      // projected initial datum
  std::vector<SlabDiagnostics> diagnostics;
};

/// L2 projection of u0 onto the aggregated trace space at the slab start
/// (cut quadrature at t^0); returns free spatial coefficients.
Eigen::VectorXd project_initial(const AgFESpace& space, const LevelSetField& ls,
                                const std::function<double(const Coord&)>& u0, int order = -1);

/// March the slabs: classify -> aggregate -> build space -> assemble with
/// the previous trace -> solve -> record. The first slab's incoming trace
/// is the projected initial condition.
SimulationResult run(const CartesianMesh& mesh, const LevelSetField& ls, const ProblemData& data,
                     const std::function<double(const Coord&)>& u0, const TimeSlabbing& slabs,
                     const RunParams& params);

/// Manufactured solution with the spatial derivatives the error norms need.
struct ExactSolution {
  std::function<double(const Coord&, double)> value;
  std::function<Coord(const Coord&, double)> grad;
  std::function<std::array<double, 3>(const Coord&, double)> hess;  // dxx, dxy, dyy
};

struct ErrorNorms {
  double accumulated_dg = 0.0;
  double l2_final = 0.0;
};

/// Accumulated DG norm (final trace + inter-slab jumps + c_mu * time
/// integral of the broken V(h) norm with the Nitsche boundary and the
/// mu h^2 |.|_H2 terms) and the final-time L2 norm of u - u_h.
ErrorNorms error_norms(const SimulationResult& result, const LevelSetField& ls,
                       const ProblemData& data, const ExactSolution& exact, double c_mu);

/// Integral of the slab-end trace u_h^{n,-} over Omega(t^n).
double trace_integral(const SimulationResult& result, const LevelSetField& ls, int slab);

}  // namespace stfem
