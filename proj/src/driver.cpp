#include "stfem/driver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stfem/aggregation.hpp"
#include "stfem/gauss.hpp"

namespace stfem {

Eigen::VectorXd project_initial(const AgFESpace& sp, const LevelSetField& ls,
                                const std::function<double(const Coord&)>& u0, int order) {
  const CartesianMesh& mesh = *sp.mesh;
  const int so = order > 0 ? order : 2 * sp.p + 2;
  const int nsp = sp.n_local_spatial();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(sp.n_free_spatial);
  double N[9];

  for (std::size_t ck = 0; ck < sp.active_cell_ids.size(); ++ck) {
    const int cell = sp.active_cell_ids[ck];
    const CutQuadrature q = cell_volume_rule(mesh, cell, ls, sp.t0, so);
    if (q.size() == 0) continue;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nsp, nsp);
    Eigen::VectorXd F = Eigen::VectorXd::Zero(nsp);
    for (int m = 0; m < q.size(); ++m) {
      sp.spatial_basis(cell, q.points[m], N);
      const double uv = u0(q.points[m]);
      for (int bb = 0; bb < nsp; ++bb) {
        for (int aa = 0; aa < nsp; ++aa) K(bb, aa) += q.weights[m] * N[aa] * N[bb];
        F(bb) += q.weights[m] * uv * N[bb];
      }
    }
    // spatial-only scatter through the constraints
    const auto& tbl = sp.cell_active_nodes[ck];
    auto expansion = [&](int a) -> std::vector<std::pair<int, double>> {
      const int fd = sp.free_of_active[tbl[a]];
      if (fd >= 0) return {{fd, 1.0}};
      return sp.constraints[tbl[a]];
    };
    for (int bb = 0; bb < nsp; ++bb)
      for (const auto& [fb, wb] : expansion(bb)) {
        b[fb] += wb * F(bb);
        for (int aa = 0; aa < nsp; ++aa)
          for (const auto& [fa, wa] : expansion(aa))
            trip.emplace_back(fb, fa, wb * wa * K(bb, aa));
      }
  }

  SpMat M(sp.n_free_spatial, sp.n_free_spatial);
  M.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("project_initial: trace mass matrix is singular (internal error)");
  return lu.solve(b);
}

SimulationResult run(const CartesianMesh& mesh, const LevelSetField& ls, const ProblemData& data,
                     const std::function<double(const Coord&)>& u0, const TimeSlabbing& slabs,
                     const RunParams& params) {
  SimulationResult result;
  result.slabs = slabs;
  const int n_eta = params.n_eta_samples > 0 ? params.n_eta_samples : std::max(params.q + 2, 5);

  SpatialField prev_trace;  // valid from slab 1 on; slab 0 uses the projection
  for (int n = 0; n < slabs.num_slabs(); ++n) {
    try {
      const double t0 = slabs.slab_begin(n), t1 = slabs.slab_end(n);
      SlabClassification cls = classify_slab(mesh, ls, t0, t1, n_eta, params.eta0, n);
      AggregateMap agg = aggregate_slab(mesh, cls);

      std::shared_ptr<AgFESpace> space;
      if (params.stab == Stabilization::AgFEM)
        space = std::make_shared<AgFESpace>(build_space(mesh, cls, agg, params.p, params.q));
      else
        space = std::make_shared<AgFESpace>(
            build_space_unaggregated(mesh, cls, params.p, params.q));

      if (n == 0) {
        if (params.stab == Stabilization::AgFEM)
          result.initial_space = space;
        else
          result.initial_space =
              std::make_shared<AgFESpace>(build_space(mesh, cls, agg, params.p, params.q));
        result.initial.space = result.initial_space.get();
        result.initial.coef = project_initial(*result.initial_space, ls, u0);
      }

      CellEval prev;
      if (n == 0) {
        const SpatialField& f = result.initial;
        prev = [&f](int cell, const Coord& x) { return f.eval_on_cell(cell, x); };
      } else {
        prev = [&prev_trace](int cell, const Coord& x) { return prev_trace.eval_on_cell(cell, x); };
      }

      SlabSystem sys = assemble_slab(*space, ls, data, prev, params.quad);
      if (params.stab == Stabilization::GhostWeak)
        sys.matrix += ghost_penalty(*space, cls, &agg, GhostKind::WeakAgfem, params.gamma_ghost,
                                    params.ghost_i_max);
      else if (params.stab == Stabilization::GhostBulk)
        sys.matrix +=
            ghost_penalty(*space, cls, &agg, GhostKind::Bulk, params.gamma_ghost, params.ghost_i_max);
      else if (params.stab == Stabilization::GhostFace)
        sys.matrix +=
            ghost_penalty(*space, cls, nullptr, GhostKind::Face, params.gamma_ghost, params.ghost_i_max);

      SlabSolve sol = solve_slab(sys);

      SlabDiagnostics diag;
      diag.n_active = cls.num_active();
      for (int c : cls.active_cells) diag.n_cut += cls.status[c] == CellStatus::Cut ? 1 : 0;
      diag.n_free_dofs = space->n_st_dofs();
      diag.residual = sol.residual;
      if (params.collect_condition) {
        const CondResult km = condition_number_1(assemble_mass(*space, ls, params.quad),
                                                 params.cond_dense_cap);
        const CondResult ka = condition_number_1(assemble_stiffness(*space, ls, data, params.quad),
                                                 params.cond_dense_cap);
        diag.kappa_mass = km.value;
        diag.kappa_stiffness = ka.value;
        diag.kappa_is_estimate = km.is_estimate || ka.is_estimate;
      }

      result.spaces.push_back(space);
      result.solutions.push_back(SlabFunction{space.get(), std::move(sol.x)});
      result.diagnostics.push_back(diag);
      prev_trace = restrict_at_time(*space, result.solutions.back(), t1);
    } catch (const std::exception& e) {
      throw std::runtime_error("run: failure in slab " + std::to_string(n) + ": " + e.what());
    }
  }
  return result;
}

namespace {

std::vector<std::pair<double, double>> slab_temporal_points(double t0, double t1, int order) {
  const Rule1D g = gauss_legendre(gauss_count_for_degree(order));
  std::vector<std::pair<double, double>> out;
  for (int k = 0; k < g.size(); ++k) out.emplace_back(t0 + g.x[k] * (t1 - t0), g.w[k] * (t1 - t0));
  return out;
}

}  // namespace

ErrorNorms error_norms(const SimulationResult& result, const LevelSetField& ls,
                       const ProblemData& data, const ExactSolution& exact, double c_mu) {
  if (result.spaces.empty()) throw std::invalid_argument("error_norms: empty result");
  if (!exact.value || !exact.grad || !exact.hess)
    throw std::invalid_argument("error_norms: exact solution needs value/grad/hess callbacks");
  const CartesianMesh& mesh = *result.spaces.front()->mesh;
  const int N = result.slabs.num_slabs();
  const int p = result.spaces.front()->p, q = result.spaces.front()->q;
  const int so = 2 * p + 4;
  const int to = 2 * q + 4;
  const double beta = data.mu * data.gamma / mesh.max_h();
  const double h2 = mesh.max_h() * mesh.max_h();

  double dg2 = 0.0;

  // ||e^{N,-}||^2 on Omega(t^N)
  double l2_final2 = 0.0;
  {
    const AgFESpace& sp = *result.spaces.back();
    const SlabFunction& u_h = result.solutions.back();
    const double T = result.slabs.slab_end(N - 1);
    for (int cell : sp.cls.active_cells) {
      const CutQuadrature qd = cell_volume_rule(mesh, cell, ls, T, so);
      for (int m = 0; m < qd.size(); ++m) {
        const double e = exact.value(qd.points[m], T) - eval_on_cell(sp, u_h, cell, qd.points[m], T);
        l2_final2 += qd.weights[m] * e * e;
      }
    }
  }
  dg2 += l2_final2;

  // inter-slab jumps: the exact solution is continuous, so the error jump
  // is the solution jump (at i = 0, against the projected initial datum)
  for (int i = 0; i < N; ++i) {
    const AgFESpace& sp_up = *result.spaces[i];  // slab above t^i
    const SlabFunction& u_up = result.solutions[i];
    const double ti = result.slabs.slab_begin(i);
    double jump2 = 0.0;
    for (int cell : sp_up.cls.active_cells) {
      const CutQuadrature qd = cell_volume_rule(mesh, cell, ls, ti, so);
      for (int m = 0; m < qd.size(); ++m) {
        const Coord& x = qd.points[m];
        const double up = eval_on_cell(sp_up, u_up, cell, x, ti);
        const double lo = i == 0 ? result.initial.eval_on_cell(cell, x)
                                 : eval_on_cell(*result.spaces[i - 1], result.solutions[i - 1],
                                                cell, x, ti);
        jump2 += qd.weights[m] * (up - lo) * (up - lo);
      }
    }
    dg2 += jump2;
  }

  // c_mu * int_0^T ||e||^2_{V(h)} dt, slab by slab
  double vh2 = 0.0;
  for (int n = 0; n < N; ++n) {
    const AgFESpace& sp = *result.spaces[n];
    const SlabFunction& u_h = result.solutions[n];
    for (auto [t, wt] : slab_temporal_points(result.slabs.slab_begin(n), result.slabs.slab_end(n), to)) {
      for (int cell : sp.cls.active_cells) {
        const CutQuadrature qd = cell_volume_rule(mesh, cell, ls, t, so);
        for (int m = 0; m < qd.size(); ++m) {
          const Coord& x = qd.points[m];
          double v;
          Coord g;
          std::array<double, 3> H;
          eval_derivatives_on_cell(sp, u_h, cell, x, t, &v, &g, &H);
          const Coord ge = exact.grad(x, t);
          const auto He = exact.hess(x, t);
          const double gx = ge[0] - g[0], gy = ge[1] - g[1];
          double hterm = 0.0;
          for (int k = 0; k < 3; ++k) {
            const double d = He[k] - H[k];
            hterm += d * d;
          }
          vh2 += wt * qd.weights[m] * (data.mu * (gx * gx + gy * gy) + data.mu * h2 * hterm);
        }
        // Nitsche boundary portion of the V(h) norm
        if (data.interface_bc == BoundaryKind::Dirichlet &&
            sp.cls.status[cell] == CellStatus::Cut) {
          const CutQuadrature iq = cell_interface_rule(mesh, cell, ls, t, so);
          for (int m = 0; m < iq.size(); ++m) {
            const double e =
                exact.value(iq.points[m], t) - eval_on_cell(sp, u_h, cell, iq.points[m], t);
            vh2 += wt * iq.weights[m] * beta * e * e;
          }
        }
        if (data.outer_bc == BoundaryKind::Dirichlet) {
          for (int face = 0; face < 2 * mesh.dim; ++face) {
            if (!mesh.face_on_box_boundary(cell, face)) continue;
            // 1D Gauss points along the outer face, filtered by the level set
            const Coord lo = mesh.cell_lo(cell), hi = mesh.cell_hi(cell);
            const int axis = face / 2, side = face % 2;
            const double plane = side == 0 ? lo[axis] : hi[axis];
            if (mesh.dim == 1) {
              Coord x{plane, 0.0};
              if (ls.value(x, t) < 0.0) {
                const double e = exact.value(x, t) - eval_on_cell(sp, u_h, cell, x, t);
                vh2 += wt * beta * e * e;
              }
            } else {
              const int tangent = 1 - axis;
              const Rule1D gr = gauss_legendre(gauss_count_for_degree(so));
              for (int i = 0; i < gr.size(); ++i) {
                Coord x{};
                x[axis] = plane;
                x[tangent] = lo[tangent] + gr.x[i] * mesh.h[tangent];
                if (ls.value(x, t) >= 0.0) continue;
                const double e = exact.value(x, t) - eval_on_cell(sp, u_h, cell, x, t);
                vh2 += wt * gr.w[i] * mesh.h[tangent] * beta * e * e;
              }
            }
          }
        }
      }
    }
  }
  dg2 += c_mu * vh2;

  ErrorNorms out;
  out.accumulated_dg = std::sqrt(dg2);
  out.l2_final = std::sqrt(l2_final2);
  return out;
}

double trace_integral(const SimulationResult& result, const LevelSetField& ls, int slab) {
  const AgFESpace& sp = *result.spaces.at(slab);
  const SlabFunction& u_h = result.solutions.at(slab);
  const CartesianMesh& mesh = *sp.mesh;
  const double t = result.slabs.slab_end(slab);
  double s = 0.0;
  for (int cell : sp.cls.active_cells) {
    const CutQuadrature qd = cell_volume_rule(mesh, cell, ls, t, 2 * sp.p + 2);
    for (int m = 0; m < qd.size(); ++m)
      s += qd.weights[m] * eval_on_cell(sp, u_h, cell, qd.points[m], t);
  }
  return s;
}

}  // namespace stfem
