#include "stfem/presets.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <future>
#include <numbers>
#include <stdexcept>

#include "stfem/aggregation.hpp"

namespace stfem::presets {

namespace {

constexpr double kPi = std::numbers::pi;

// simple index-parallel map; results land by index, so output is
// independent of the thread count
template <typename F>
void parallel_for(int n, int threads, F&& body) {
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
  };
  std::vector<std::future<void>> pool;
  for (int k = 0; k < std::min(threads, n); ++k)
    pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();
}

ExactSolution manufactured_exact(double mu, double T, double Lx, double Ly) {
  const double kx = kPi / Lx, ky = kPi / Ly, kt = 2.0 * mu * kPi * kPi / T;
  ExactSolution ex;
  ex.value = [=](const Coord& x, double t) {
    return std::sin(kx * x[0]) * std::sin(ky * x[1]) * std::exp(-kt * t);
  };
  ex.grad = [=](const Coord& x, double t) -> Coord {
    const double e = std::exp(-kt * t);
    return {kx * std::cos(kx * x[0]) * std::sin(ky * x[1]) * e,
            ky * std::sin(kx * x[0]) * std::cos(ky * x[1]) * e};
  };
  ex.hess = [=](const Coord& x, double t) -> std::array<double, 3> {
    const double e = std::exp(-kt * t);
    const double sx = std::sin(kx * x[0]), cx = std::cos(kx * x[0]);
    const double sy = std::sin(ky * x[1]), cy = std::cos(ky * x[1]);
    return {-kx * kx * sx * sy * e, kx * ky * cx * cy * e, -ky * ky * sx * sy * e};
  };
  return ex;
}

}  // namespace

double nitsche_gamma(int p) { return 10.0 * p * (p + 1); }

Problem manufactured(const std::string& geometry, int m, int p) {
  const double Lx = 2.0, Ly = 1.0, mu = 1.0, T = 1.0;
  const double h = std::pow(2.0, -m);
  Problem pr;
  pr.mesh = build_mesh(2, {0.0, 0.0}, {Lx, Ly},
                       {static_cast<int>(std::lround(Lx / h)), static_cast<int>(std::lround(Ly / h))});
  if (geometry == "moving-square")
    pr.ls = std::make_shared<MovingSquareComplement>(Coord{1.5, 0.5 * Ly}, Coord{-0.5, 0.0}, 0.2);
  else if (geometry == "moving-disk")
    pr.ls = std::make_shared<MovingDiskComplement>(Coord{1.5, 0.5 * Ly}, Coord{-0.5, 0.0}, 0.2);
  else if (geometry == "none")
    pr.ls = std::make_shared<ConstantLevelSet>(-1.0);
  else
    throw std::invalid_argument("manufactured: unknown geometry '" + geometry + "'");
  pr.exact = manufactured_exact(mu, T, Lx, Ly);
  pr.has_exact = true;

  const double kt = 2.0 * mu * kPi * kPi / T;
  const double lap = mu * kPi * kPi * (1.0 / (Lx * Lx) + 1.0 / (Ly * Ly));
  const auto uex = pr.exact.value;
  pr.data.mu = mu;
  pr.data.gamma = nitsche_gamma(p);
  pr.data.source = [=](const Coord& x, double t) { return (lap - kt) * uex(x, t); };
  pr.data.dirichlet = uex;
  pr.data.interface_bc = BoundaryKind::Dirichlet;
  pr.data.outer_bc = BoundaryKind::Dirichlet;
  pr.u0 = [uex](const Coord& x) { return uex(x, 0.0); };
  pr.slabs = uniform_slabbing(T, static_cast<int>(std::lround(T / h)));
  return pr;
}

Problem disk_single_slab(int m, double tau, double ell, int p) {
  Problem pr = manufactured("moving-disk", m, p);
  pr.ls = std::make_shared<MovingDiskComplement>(Coord{1.5 - ell, 0.5}, Coord{-0.5, 0.0}, 0.2);
  pr.slabs = uniform_slabbing(tau, 1);
  return pr;
}

Problem two_disks(int nx, int ny, int n_slabs, double mu) {
  const double T = 1.5;
  Problem pr;
  pr.mesh = build_mesh(2, {-0.6, -1.35}, {0.6, 1.35}, {nx, ny});
  pr.ls = make_two_disk_union({0.0, -0.75}, {0.0, 1.0}, {0.0, 0.75}, {0.0, -1.0}, 0.5);
  pr.data.mu = mu;
  pr.data.gamma = nitsche_gamma(1);
  pr.data.interface_bc = BoundaryKind::Neumann;
  pr.data.outer_bc = BoundaryKind::Neumann;
  // the advection equals the disk motion: the region above the symmetry
  // axis moves with the disk that currently bounds it from that side
  pr.data.convection = [T](const Coord& x, double t) -> Coord {
    const bool first_half = t <= 0.5 * T;
    const bool upper = x[1] > 0.0;
    const double wy = (upper == first_half) ? -1.0 : 1.0;
    return {0.0, wy};
  };
  pr.u0 = [](const Coord& x) { return x[1] > 0.0 ? 1.0 : (x[1] < 0.0 ? -1.0 : 0.0); };
  pr.slabs = uniform_slabbing(T, n_slabs);
  return pr;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceTable convergence_study(const std::string& geometry, const std::vector<int>& m_list,
                                   int p, int q, double c_mu, int threads) {
  ConvergenceTable table;
  table.rows.resize(m_list.size());
  parallel_for(static_cast<int>(m_list.size()), threads, [&](int i) {
    const int m = m_list[i];
    Problem pr = manufactured(geometry, m, p);
    RunParams params;
    params.p = p;
    params.q = q;
    SimulationResult res = run(pr.mesh, *pr.ls, pr.data, pr.u0, pr.slabs, params);
    const ErrorNorms err = error_norms(res, *pr.ls, pr.data, pr.exact, c_mu);
    table.rows[i] = {m, std::pow(2.0, -m), err.accumulated_dg, err.l2_final};
  });
  std::vector<double> hs, dgs, l2s;
  for (const auto& r : table.rows) {
    hs.push_back(r.h);
    dgs.push_back(r.dg);
    l2s.push_back(r.l2);
  }
  table.dg_slope = loglog_slope(hs, dgs);
  table.l2_slope = loglog_slope(hs, l2s);
  return table;
}

std::vector<CondSample> condition_sweep(int m, double tau, const std::vector<double>& ells, int p,
                                        int q, bool run_agfem, bool run_standard, int dense_cap,
                                        int threads) {
  std::vector<std::string> methods;
  if (run_agfem) methods.push_back("agfem");
  if (run_standard) methods.push_back("standard");
  std::vector<CondSample> out(ells.size() * methods.size());
  parallel_for(static_cast<int>(out.size()), threads, [&](int idx) {
    const double ell = ells[idx / methods.size()];
    const std::string& method = methods[idx % methods.size()];
    Problem pr = disk_single_slab(m, tau, ell, p);
    const int n_eta = std::max(q + 2, 5);
    SlabClassification cls = classify_slab(pr.mesh, *pr.ls, 0.0, tau, n_eta, 1.0, 0);
    AgFESpace space;
    if (method == "agfem") {
      AggregateMap agg = aggregate_slab(pr.mesh, cls);
      space = build_space(pr.mesh, cls, agg, p, q);
    } else {
      space = build_space_unaggregated(pr.mesh, cls, p, q);
    }
    const CondResult km = condition_number_1(assemble_mass(space, *pr.ls), dense_cap);
    const CondResult ka =
        condition_number_1(assemble_stiffness(space, *pr.ls, pr.data), dense_cap);
    out[idx] = {ell, method, km.value, ka.value, km.is_estimate, ka.is_estimate, km.singular,
                ka.singular};
  });
  return out;
}

CondScalingTable condition_scaling(const std::vector<int>& m_list, int p, int q, int dense_cap) {
  CondScalingTable table;
  for (int m : m_list) {
    const double h = std::pow(2.0, -m);
    Problem pr = disk_single_slab(m, h, 0.0, p);
    const int n_eta = std::max(q + 2, 5);
    SlabClassification cls = classify_slab(pr.mesh, *pr.ls, 0.0, h, n_eta, 1.0, 0);
    AggregateMap agg = aggregate_slab(pr.mesh, cls);
    AgFESpace space = build_space(pr.mesh, cls, agg, p, q);
    const CondResult km = condition_number_1(assemble_mass(space, *pr.ls), dense_cap);
    const CondResult ka =
        condition_number_1(assemble_stiffness(space, *pr.ls, pr.data), dense_cap);
    table.rows.push_back({m, h, km.value, ka.value, km.is_estimate || ka.is_estimate});
  }
  std::vector<double> hs, kms, kas;
  for (const auto& r : table.rows) {
    hs.push_back(r.h);
    kms.push_back(r.kappa_m);
    kas.push_back(r.kappa_a);
  }
  table.slope_m = loglog_slope(hs, kms);
  table.slope_a = loglog_slope(hs, kas);
  return table;
}

namespace {

// first slab whose active-cell graph connects the cells around the two
// disk centres (the classification bridge through cut cells)
bool slab_connects_disks(const SimulationResult& res, int n) {
  const AgFESpace& sp = *res.spaces[n];
  const CartesianMesh& mesh = *sp.mesh;
  const double tm = 0.5 * (res.slabs.slab_begin(n) + res.slabs.slab_end(n));
  const Coord c1{0.0, tm - 0.75}, c2{0.0, 0.75 - tm};
  auto ref1 = mesh.locate_point(c1), ref2 = mesh.locate_point(c2);
  if (!ref1 || !ref2) return false;
  if (!sp.cls.is_active(*ref1) || !sp.cls.is_active(*ref2)) return false;
  if (*ref1 == *ref2) return true;
  std::vector<char> seen(mesh.num_cells(), 0);
  std::vector<int> stack{*ref1};
  seen[*ref1] = 1;
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    if (c == *ref2) return true;
    for (int nb : mesh.cell_neighbors(c))
      if (!seen[nb] && sp.cls.is_active(nb)) {
        seen[nb] = 1;
        stack.push_back(nb);
      }
  }
  return false;
}

}  // namespace

TopologyReport topology_run(int nx, int ny, int n_slabs, double mu, int p, int q,
                            Stabilization stab) {
  Problem pr = two_disks(nx, ny, n_slabs, mu);
  RunParams params;
  params.p = p;
  params.q = q;
  params.stab = stab;
  TopologyReport rep;
  rep.result = run(pr.mesh, *pr.ls, pr.data, pr.u0, pr.slabs, params);

  // discrete measure of Omega(0)
  for (int cell : rep.result.initial_space->cls.active_cells)
    rep.domain_area_t0 += cell_volume_rule(pr.mesh, cell, *pr.ls, 0.0, 2).total_weight();

  for (int n = 0; n < n_slabs; ++n) {
    rep.mass.push_back(trace_integral(rep.result, *pr.ls, n));
    rep.max_abs_mass = std::max(rep.max_abs_mass, std::abs(rep.mass.back()));
    rep.max_residual = std::max(rep.max_residual, rep.result.diagnostics[n].residual);
    if (rep.first_contact_slab < 0 && slab_connects_disks(rep.result, n))
      rep.first_contact_slab = n;
  }

  // purity samples on the disks' vertical diameters at every pre-contact
  // slab end: five uniformly spaced interior points per disk
  rep.upper_min = rep.lower_min = 1e300;
  rep.upper_max = rep.lower_max = -1e300;
  const int pre_end = rep.first_contact_slab < 0 ? n_slabs : rep.first_contact_slab;
  for (int n = 0; n < pre_end; ++n) {
    const double t = rep.result.slabs.slab_end(n);
    const double cy = 0.75 - t;  // upper disk centre pre-contact
    for (int k = -2; k <= 2; ++k) {
      const double off = k * (0.5 / 3.0);
      const double vu = eval(*rep.result.spaces[n], rep.result.solutions[n], {0.0, cy + off}, t);
      const double vl = eval(*rep.result.spaces[n], rep.result.solutions[n], {0.0, -cy - off}, t);
      rep.upper_min = std::min(rep.upper_min, vu);
      rep.upper_max = std::max(rep.upper_max, vu);
      rep.lower_min = std::min(rep.lower_min, vl);
      rep.lower_max = std::max(rep.lower_max, vl);
    }
  }
  return rep;
}

}  // namespace stfem::presets
