#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "stfem/assembly.hpp"
#include "stfem/gauss.hpp"
#include "stfem/solver.hpp"

using namespace stfem;

namespace {

struct Setup {
  CartesianMesh mesh;
  std::shared_ptr<const LevelSetField> ls;
  SlabClassification cls;
  AggregateMap agg;
  double t0 = 0.0, t1 = 0.0;
};

Setup disk_setup(int n, double t0, double t1, int q = 1) {
  Setup s;
  s.mesh = build_mesh(2, {0.0, 0.0}, {2.0, 1.0}, {2 * n, n});
  s.ls = std::make_shared<MovingDiskComplement>(Coord{1.5, 0.5}, Coord{-0.5, 0.0}, 0.2);
  s.cls = classify_slab(s.mesh, *s.ls, t0, t1, std::max(q + 2, 5), 1.0);
  s.agg = aggregate_slab(s.mesh, s.cls);
  s.t0 = t0;
  s.t1 = t1;
  return s;
}

ProblemData heat_data(int p, double mu = 1.0) {
  ProblemData d;
  d.mu = mu;
  d.gamma = 10.0 * p * (p + 1);
  return d;
}

CellEval zero_prev() {
  return [](int, const Coord&) { return 0.0; };
}

// constraint expansion matrix C: active space-time dofs x free space-time dofs
SpMat expansion_matrix(const AgFESpace& ag, const AgFESpace& full) {
  REQUIRE(ag.coords.size() == full.coords.size());
  const int nt = ag.n_temporal();
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t a = 0; a < ag.coords.size(); ++a) {
    const int row_sp = full.free_of_active[static_cast<int>(a)];
    REQUIRE(row_sp >= 0);
    if (ag.free_flag[a]) {
      const int col_sp = ag.free_of_active[a];
      for (int k = 0; k < nt; ++k)
        trip.emplace_back(full.st_dof(row_sp, k), ag.st_dof(col_sp, k), 1.0);
    } else {
      for (const auto& [fd, w] : ag.constraints[a])
        for (int k = 0; k < nt; ++k)
          trip.emplace_back(full.st_dof(row_sp, k), ag.st_dof(fd, k), w);
    }
  }
  SpMat C(full.n_st_dofs(), ag.n_st_dofs());
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

double smallest_eigenvalue(const SpMat& A) {
  Eigen::MatrixXd Ad(A);
  Eigen::MatrixXd sym = 0.5 * (Ad + Ad.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("uncut single cell, p = q = 1: mass equals the tensor Gauss oracle") {
  auto mesh = build_mesh(2, {0.0, 0.0}, {0.5, 0.25}, {1, 1});
  ConstantLevelSet inside(-1.0);
  auto cls = classify_slab(mesh, inside, 0.2, 0.7, 5, 1.0);
  auto agg = aggregate_slab(mesh, cls);
  auto sp = build_space(mesh, cls, agg, 1, 1);
  SpMat M = assemble_mass(sp, inside);
  REQUIRE(M.rows() == 8);

  // closed-form 1D mass matrices, tensorised by hand
  const double hx = 0.5, hy = 0.25, tau = 0.5;
  auto m1d = [](double len, int i, int j) { return len / 6.0 * (i == j ? 2.0 : 1.0); };
  Eigen::MatrixXd Md(M);
  for (int s = 0; s < 4; ++s)
    for (int r = 0; r < 4; ++r) {
      const int sx = s % 2, sy = s / 2, rx = r % 2, ry = r / 2;
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          const double exact = m1d(hx, sx, rx) * m1d(hy, sy, ry) * m1d(tau, k, l);
          CHECK(Md(2 * s + k, 2 * r + l) == doctest::Approx(exact).epsilon(1e-13));
        }
    }
}

TEST_CASE("mass matrix: SPD and row sums equal the basis integrals") {
  auto s = disk_setup(8, 0.0, 0.05);
  auto sp = build_space(s.mesh, s.cls, s.agg, 1, 1);
  SpMat M = assemble_mass(sp, *s.ls);
  CHECK(smallest_eigenvalue(M) > 0.0);

  // (M 1)_a = integral of the extended basis function over Q^n: compare to
  // the source term of the slab form with f = 1 and everything else zero
  ProblemData d;
  d.mu = 0.0;
  d.gamma = 1.0;
  d.source = [](const Coord&, double) { return 1.0; };
  d.interface_bc = BoundaryKind::Neumann;  // no Dirichlet terms
  d.outer_bc = BoundaryKind::Neumann;
  SlabSystem sys = assemble_slab(sp, *s.ls, d, zero_prev());
  // remove the inter-slab mass term contribution from the matrix check by
  // comparing vectors only
  Eigen::VectorXd row_sums = M * Eigen::VectorXd::Ones(M.rows());
  const double scale = row_sums.lpNorm<Eigen::Infinity>();
  CHECK((row_sums - sys.rhs).lpNorm<Eigen::Infinity>() <= 1e-12 * scale);
}

TEST_CASE("stiffness: symmetric, kernel-free with the experiment gamma, constants") {
  for (int p : {1, 2}) {
    auto s = disk_setup(4, 0.0, 0.05, p);
    auto sp = build_space(s.mesh, s.cls, s.agg, p, p);
    auto data = heat_data(p);
    SpMat A = assemble_stiffness(sp, *s.ls, data);

    SpMat diff = SpMat(A.transpose()) - A;
    CHECK(diff.coeffs().cwiseAbs().maxCoeff() <= 1e-12 * A.coeffs().cwiseAbs().maxCoeff());
    CHECK(smallest_eigenvalue(A) > 0.0);

    // A applied to the all-ones coefficient vector leaves only the Nitsche
    // boundary terms: gradients of the constant vanish
    Eigen::VectorXd Aones = A * Eigen::VectorXd::Ones(A.rows());
    // reference: assemble the boundary linear functional directly
    Eigen::VectorXd ref = Eigen::VectorXd::Zero(A.rows());
    const double beta = data.mu * data.gamma / s.mesh.max_h();
    const Rule1D tg = gauss_legendre(gauss_count_for_degree(2 * p + 1));
    double N[9], psi[3];
    Coord G[9];
    for (std::size_t ck = 0; ck < sp.active_cell_ids.size(); ++ck) {
      const int cell = sp.active_cell_ids[ck];
      const auto& tbl = sp.cell_active_nodes[ck];
      for (int k = 0; k < tg.size(); ++k) {
        const double t = s.t0 + tg.x[k] * (s.t1 - s.t0);
        const double wt = tg.w[k] * (s.t1 - s.t0);
        sp.temporal_basis(t, psi);
        auto scatter_point = [&](const Coord& x, const Coord& nrm, double w) {
          sp.spatial_basis(cell, x, N, G);
          for (int b = 0; b < sp.n_local_spatial(); ++b) {
            const double gnb = nrm[0] * G[b][0] + nrm[1] * G[b][1];
            const double val = beta * N[b] - data.mu * gnb;
            const int fd = sp.free_of_active[tbl[b]];
            for (int j = 0; j <= sp.q; ++j) {
              if (fd >= 0)
                ref[sp.st_dof(fd, j)] += w * psi[j] * val;
              else
                for (const auto& [c, wc] : sp.constraints[tbl[b]])
                  ref[sp.st_dof(c, j)] += wc * w * psi[j] * val;
            }
          }
        };
        if (s.cls.status[cell] == CellStatus::Cut) {
          auto iq = cell_interface_rule(s.mesh, cell, *s.ls, t, 2 * p);
          for (int m = 0; m < iq.size(); ++m)
            scatter_point(iq.points[m], iq.normals[m], wt * iq.weights[m]);
        }
        for (int face = 0; face < 4; ++face) {
          if (!s.mesh.face_on_box_boundary(cell, face)) continue;
          const int axis = face / 2, side = face % 2;
          const Coord lo = s.mesh.cell_lo(cell), hi = s.mesh.cell_hi(cell);
          Coord nrm{0.0, 0.0};
          nrm[axis] = side ? 1.0 : -1.0;
          const Rule1D fg = gauss_legendre(gauss_count_for_degree(2 * p));
          for (int i = 0; i < fg.size(); ++i) {
            Coord x{};
            x[axis] = side ? hi[axis] : lo[axis];
            x[1 - axis] = lo[1 - axis] + fg.x[i] * s.mesh.h[1 - axis];
            if (s.ls->value(x, t) >= 0.0) continue;
            scatter_point(x, nrm, wt * fg.w[i] * s.mesh.h[1 - axis]);
          }
        }
      }
    }
    const double scale = Aones.lpNorm<Eigen::Infinity>() + ref.lpNorm<Eigen::Infinity>();
    CHECK((Aones - ref).lpNorm<Eigen::Infinity>() <= 1e-11 * scale);
  }
}

TEST_CASE("Nitsche consistency: the constant interpolant has zero residual") {
  auto s = disk_setup(8, 0.0, 0.1);
  auto sp = build_space(s.mesh, s.cls, s.agg, 1, 1);
  auto data = heat_data(1);
  const double c = 2.75;
  data.dirichlet = [=](const Coord&, double) { return c; };
  SlabSystem sys = assemble_slab(sp, *s.ls, data, [=](int, const Coord&) { return c; });
  Eigen::VectorXd xc = Eigen::VectorXd::Constant(sp.n_st_dofs(), c);
  Eigen::VectorXd r = sys.matrix * xc - sys.rhs;
  double anorm = 0.0;
  for (int k = 0; k < sys.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.matrix, k); it; ++it) anorm = std::max(anorm, std::abs(it.value()));
  CHECK(r.lpNorm<Eigen::Infinity>() <= 1e-12 * anorm * std::abs(c) * sp.n_st_dofs());
}

TEST_CASE("discrete Gauss-Green identity on the moving-disk slab") {
  // identity of the time-derivative, jump and lateral n_t terms against the
  // trace norms; holds to quadrature + linearisation tolerance on curved
  // geometry (the exact version is exercised on a half-plane in the
  // acceptance suite)
  std::mt19937 rng(3);
  std::normal_distribution<double> gauss;
  auto s = disk_setup(16, 0.0, 0.01, 2);
  auto sp = build_space(s.mesh, s.cls, s.agg, 2, 2);
  const int so = 8, to = 9;

  for (int trial = 0; trial < 3; ++trial) {
    SlabFunction v{&sp, Eigen::VectorXd::Zero(sp.n_st_dofs())};
    for (int i = 0; i < sp.n_st_dofs(); ++i) v.coef[i] = gauss(rng);
    SpatialField vminus;
    vminus.space = &sp;
    vminus.coef = Eigen::VectorXd::Zero(sp.n_free_spatial);
    for (int i = 0; i < sp.n_free_spatial; ++i) vminus.coef[i] = gauss(rng);

    double dt_term = 0.0, jump_term = 0.0, lateral = 0.0;
    double norm_end = 0.0, norm_start_minus = 0.0, norm_jump = 0.0;
    const Rule1D tg = gauss_legendre(gauss_count_for_degree(to));
    for (int cell : s.cls.active_cells) {
      // space-time d_t v * v
      for (const auto& slice : spacetime_quadrature(s.mesh, cell, *s.ls, s.t0, s.t1, so, to)) {
        for (int m = 0; m < slice.rule.size(); ++m) {
          const Coord& x = slice.rule.points[m];
          dt_term += slice.weight * slice.rule.weights[m] *
                     eval_dt_on_cell(sp, v, cell, x, slice.t) * eval_on_cell(sp, v, cell, x, slice.t);
        }
      }
      // traces at both ends and the jump against the incoming field
      auto q0 = cell_volume_rule(s.mesh, cell, *s.ls, s.t0, so);
      for (int m = 0; m < q0.size(); ++m) {
        const Coord& x = q0.points[m];
        const double vp = eval_on_cell(sp, v, cell, x, s.t0);
        const double vm = vminus.eval_on_cell(cell, x);
        jump_term += q0.weights[m] * (vp - vm) * vp;
        norm_start_minus += q0.weights[m] * vm * vm;
        norm_jump += q0.weights[m] * (vp - vm) * (vp - vm);
      }
      auto q1 = cell_volume_rule(s.mesh, cell, *s.ls, s.t1, so);
      for (int m = 0; m < q1.size(); ++m) {
        const double ve = eval_on_cell(sp, v, cell, q1.points[m], s.t1);
        norm_end += q1.weights[m] * ve * ve;
      }
      // lateral n_t v^2 over the moving interface: n_t dS = phi_t/|grad phi| ds dt
      if (s.cls.status[cell] == CellStatus::Cut) {
        for (int k = 0; k < tg.size(); ++k) {
          const double t = s.t0 + tg.x[k] * (s.t1 - s.t0);
          const double wt = tg.w[k] * (s.t1 - s.t0);
          auto iq = cell_interface_rule(s.mesh, cell, *s.ls, t, so);
          for (int m = 0; m < iq.size(); ++m) {
            const Coord& x = iq.points[m];
            const double delta = 1e-6 * (s.t1 - s.t0);
            const double phit =
                (s.ls->value(x, t + delta) - s.ls->value(x, t - delta)) / (2.0 * delta);
            const double dh = 1e-7 * s.mesh.max_h();
            const double gx =
                (s.ls->value({x[0] + dh, x[1]}, t) - s.ls->value({x[0] - dh, x[1]}, t)) / (2.0 * dh);
            const double gy =
                (s.ls->value({x[0], x[1] + dh}, t) - s.ls->value({x[0], x[1] - dh}, t)) / (2.0 * dh);
            const double vv = eval_on_cell(sp, v, cell, x, t);
            lateral += wt * iq.weights[m] * phit / std::hypot(gx, gy) * vv * vv;
          }
        }
      }
    }
    const double lhs = dt_term + jump_term - 0.5 * lateral;
    const double rhs = 0.5 * norm_end - 0.5 * norm_start_minus + 0.5 * norm_jump;
    const double scale = std::abs(dt_term) + std::abs(jump_term) + std::abs(lateral) +
                         std::abs(rhs) + 1.0;
    // the defect is the O(h^2) gap between the analytic interface velocity
    // and the linearised facet family; measured ~1e-4 relative at h = 2^-4
    CHECK(std::abs(lhs - rhs) <= 5e-4 * scale);
  }
}

TEST_CASE("Galerkin patch test: in-space data is reproduced to solver accuracy") {
  auto s = disk_setup(8, 0.0, 0.125);
  for (int p : {1, 2}) {
    auto sp = build_space(s.mesh, s.cls, s.agg, p, 1);
    auto data = heat_data(p);
    auto uex = [](const Coord& x, double) { return 0.75 + 2.0 * x[0] - 0.5 * x[1]; };
    data.dirichlet = uex;
    SlabSystem sys = assemble_slab(sp, *s.ls, data,
                                   [&](int, const Coord& x) { return uex(x, 0.0); });
    SlabSolve sol = solve_slab(sys);
    auto interp = interpolate(sp, uex);
    const double err = (sol.x - interp.coef).lpNorm<Eigen::Infinity>();
    CHECK(err <= 1e-10 * interp.coef.lpNorm<Eigen::Infinity>() * 100);
  }
}

TEST_CASE("coercivity witness: B(v,v) + ||v-||^2 is positive on random fields") {
  auto s = disk_setup(8, 0.0, 0.125);
  auto sp = build_space(s.mesh, s.cls, s.agg, 1, 1);
  auto data = heat_data(1);
  SlabSystem sys = assemble_slab(sp, *s.ls, data, zero_prev());
  std::mt19937 rng(11);
  std::normal_distribution<double> gauss;
  double min_q = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd v(sp.n_st_dofs());
    for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    const double Q = v.dot(sys.matrix * v);  // B(v,v) with v^{n-1,-} = 0
    CHECK(Q >= 0.0);
    min_q = std::min(min_q, Q / v.squaredNorm());
  }
  MESSAGE("measured coercivity floor (v^- = 0): ", min_q);
  CHECK(min_q > 0.0);
}

TEST_CASE("constraint elimination equals congruence with the expansion matrix") {
  auto s = disk_setup(6, 0.0, 0.1);
  auto ag = build_space(s.mesh, s.cls, s.agg, 1, 1);
  auto full = build_space_unaggregated(s.mesh, s.cls, 1, 1);
  SpMat C = expansion_matrix(ag, full);

  auto data = heat_data(1);
  data.dirichlet = [](const Coord& x, double t) { return x[0] + t; };
  data.source = [](const Coord& x, double) { return x[1]; };

  SpMat M_ag = assemble_mass(ag, *s.ls);
  SpMat M_full = assemble_mass(full, *s.ls);
  SpMat M_cong = C.transpose() * M_full * C;
  SpMat dM = M_ag - M_cong;
  CHECK(dM.coeffs().cwiseAbs().maxCoeff() <= 1e-12 * M_ag.coeffs().cwiseAbs().maxCoeff());

  SlabSystem sys_ag = assemble_slab(ag, *s.ls, data, zero_prev());
  SlabSystem sys_full = assemble_slab(full, *s.ls, data, zero_prev());
  SpMat K_cong = C.transpose() * sys_full.matrix * C;
  SpMat dK = sys_ag.matrix - K_cong;
  CHECK(dK.coeffs().cwiseAbs().maxCoeff() <=
        1e-12 * sys_ag.matrix.coeffs().cwiseAbs().maxCoeff());
  Eigen::VectorXd db = sys_ag.rhs - C.transpose() * sys_full.rhs;
  CHECK(db.lpNorm<Eigen::Infinity>() <= 1e-12 * sys_ag.rhs.lpNorm<Eigen::Infinity>());
}

TEST_CASE("ghost penalty: consistency kernels and positive semidefiniteness") {
  auto s = disk_setup(8, 0.0, 0.05);
  auto full = build_space_unaggregated(s.mesh, s.cls, 1, 1);
  auto ag = build_space(s.mesh, s.cls, s.agg, 1, 1);
  SpMat C = expansion_matrix(ag, full);

  SUBCASE("weak-agfem vanishes on extended fields") {
    SpMat S = ghost_penalty(full, s.cls, &s.agg, GhostKind::WeakAgfem, 1.0, 1);
    CHECK(smallest_eigenvalue(S) >= -1e-12);
    std::mt19937 rng(5);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd u_free(ag.n_st_dofs());
    for (int i = 0; i < u_free.size(); ++i) u_free[i] = gauss(rng);
    Eigen::VectorXd u_act = C * u_free;
    CHECK(std::abs(u_act.dot(S * u_act)) <= 1e-12 * u_act.squaredNorm());
    // but it does not vanish on generic active fields
    Eigen::VectorXd w(full.n_st_dofs());
    for (int i = 0; i < w.size(); ++i) w[i] = gauss(rng);
    CHECK(w.dot(S * w) > 0.0);
  }

  SUBCASE("bulk vanishes on global polynomials of total degree <= p") {
    SpMat S = ghost_penalty(full, s.cls, &s.agg, GhostKind::Bulk, 1.0, 1);
    CHECK(smallest_eigenvalue(S) >= -1e-12);
    auto lin = interpolate(full, [](const Coord& x, double) { return 1.0 + 2.0 * x[0] - x[1]; });
    CHECK(std::abs(lin.coef.dot(S * lin.coef)) <= 1e-12 * lin.coef.squaredNorm());
  }

  SUBCASE("face penalty vanishes on smooth polynomials, also for p = 2") {
    SpMat S1 = ghost_penalty(full, s.cls, nullptr, GhostKind::Face, 1.0, 1);
    CHECK(smallest_eigenvalue(S1) >= -1e-12);
    auto lin = interpolate(full, [](const Coord& x, double) { return 0.3 * x[0] + x[1]; });
    CHECK(std::abs(lin.coef.dot(S1 * lin.coef)) <= 1e-12 * lin.coef.squaredNorm());

    auto full2 = build_space_unaggregated(s.mesh, s.cls, 2, 1);
    SpMat S2 = ghost_penalty(full2, s.cls, nullptr, GhostKind::Face, 1.0, 2);
    auto quad = interpolate(full2, [](const Coord& x, double) {
      return x[0] * x[0] - 0.5 * x[0] * x[1] + 2.0 * x[1];
    });
    CHECK(std::abs(quad.coef.dot(S2 * quad.coef)) <= 1e-11 * quad.coef.squaredNorm());
    CHECK_THROWS(ghost_penalty(full2, s.cls, nullptr, GhostKind::Face, 1.0, 3));
  }

  SUBCASE("aggregated spaces are rejected") {
    CHECK_THROWS(ghost_penalty(ag, s.cls, &s.agg, GhostKind::WeakAgfem, 1.0, 1));
  }
}
