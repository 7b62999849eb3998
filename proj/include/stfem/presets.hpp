#pragma once

#include <memory>
#include <string>

#include "stfem/driver.hpp"

namespace stfem::presets {

/// Nitsche parameter used in all experiments: 10 p (p+1).
double nitsche_gamma(int p);

/// A fully specified run: mesh, geometry, data, initial condition, slabs
/// and (when available) the exact solution with derivatives.
struct Problem {
  CartesianMesh mesh;
  std::shared_ptr<const LevelSetField> ls;
  ProblemData data;
  std::function<double(const Coord&)> u0;
  ExactSolution exact;
  TimeSlabbing slabs;
  bool has_exact = false;
};

/// Heat problem on Omega_art = [0,2]x[0,1] with mu = 1, T = 1 and the
/// manufactured solution sin(pi x / Lx) sin(pi y / Ly) exp(-2 mu pi^2 t / T),
/// Dirichlet data imposed weakly everywhere. geometry selects the hole:
/// "moving-square", "moving-disk" (side 0.4 / radius 0.2, centre
/// (1.5 - 0.5 t, 0.5)) or "none". h = tau = 2^-m.
Problem manufactured(const std::string& geometry, int m, int p);

/// Single-slab disk configuration of the condition experiments: mesh
/// h = 2^-m on [0,2]x[0,1], one slab (0, tau), disk centre
/// (1.5 - ell - 0.5 t, 0.5).
Problem disk_single_slab(int m, double tau, double ell, int p);

/// Two travelling disks (radius 0.5) that merge and separate; pure Neumann
/// advection-diffusion with u0 = sign(y) and the advection field equal to
/// the disk motion. Omega_art = (-0.6,0.6)x(-1.35,1.35), T = 1.5.
Problem two_disks(int nx, int ny, int n_slabs, double mu);

// --- experiment drivers -------------------------------------------------

struct ConvergenceRow {
  int m = 0;
  double h = 0, dg = 0, l2 = 0;
};
struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double dg_slope = 0, l2_slope = 0;  // least-squares slope in log-log
};
ConvergenceTable convergence_study(const std::string& geometry, const std::vector<int>& m_list,
                                   int p, int q, double c_mu, int threads = 1);

struct CondSample {
  double ell = 0;
  std::string method;  // "agfem" | "standard"
  double kappa_m = 0, kappa_a = 0;
  bool est_m = false, est_a = false;
  bool sing_m = false, sing_a = false;
};
std::vector<CondSample> condition_sweep(int m, double tau, const std::vector<double>& ells, int p,
                                        int q, bool run_agfem, bool run_standard, int dense_cap,
                                        int threads = 1);

struct CondScalingRow {
  int m = 0;
  double h = 0, kappa_m = 0, kappa_a = 0;
  bool est = false;
};
struct CondScalingTable {
  std::vector<CondScalingRow> rows;
  double slope_m = 0, slope_a = 0;  // log-log slope of kappa vs h
};
CondScalingTable condition_scaling(const std::vector<int>& m_list, int p, int q, int dense_cap);

struct TopologyReport {
  SimulationResult result;
  int first_contact_slab = -1;  // 0-based
  double domain_area_t0 = 0;
  std::vector<double> mass;  // per slab, integral of the end trace
  double max_abs_mass = 0;
  // extreme values sampled on the disks' vertical diameters (5 interior
  // points each) over all pre-contact slabs
  double upper_min = 0, upper_max = 0;
  double lower_min = 0, lower_max = 0;
  double max_residual = 0;
};
TopologyReport topology_run(int nx, int ny, int n_slabs, double mu, int p, int q,
                            Stabilization stab = Stabilization::AgFEM);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace stfem::presets
