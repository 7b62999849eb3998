#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stfem/aggregation.hpp"
#include "stfem/driver.hpp"
#include "stfem/gauss.hpp"
#include "stfem/presets.hpp"

using namespace stfem;

namespace {

ExactSolution constant_exact(double c) {
  ExactSolution ex;
  ex.value = [c](const Coord&, double) { return c; };
  ex.grad = [](const Coord&, double) -> Coord { return {0.0, 0.0}; };
  ex.hess = [](const Coord&, double) -> std::array<double, 3> { return {0.0, 0.0, 0.0}; };
  return ex;
}

}  // namespace

TEST_CASE("project_initial: constants and in-space data reproduced") {
  auto pr = presets::disk_single_slab(3, 0.1, 0.0, 1);
  auto cls = classify_slab(pr.mesh, *pr.ls, 0.0, 0.1, 5, 1.0);
  auto agg = aggregate_slab(pr.mesh, cls);
  auto sp = build_space(pr.mesh, cls, agg, 1, 1);

  auto c0 = project_initial(sp, *pr.ls, [](const Coord&) { return 3.25; });
  for (int i = 0; i < c0.size(); ++i) CHECK(c0[i] == doctest::Approx(3.25).epsilon(1e-12));

  // globally linear datum lies in the aggregated trace space
  auto lin = [](const Coord& x) { return 0.5 + x[0] - 2.0 * x[1]; };
  auto cl = project_initial(sp, *pr.ls, lin);
  for (int s = 0; s < sp.n_free_spatial; ++s) {
    const Coord& x = sp.coords[sp.active_of_free[s]];
    CHECK(cl[s] == doctest::Approx(lin(x)).epsilon(1e-11));
  }
}

TEST_CASE("project_initial: antisymmetric two-disk datum integrates to zero") {
  auto pr = presets::two_disks(24, 49, 4, 0.1);
  auto cls = classify_slab(pr.mesh, *pr.ls, 0.0, pr.slabs.tau(0), 5, 1.0);
  auto agg = aggregate_slab(pr.mesh, cls);
  auto sp = build_space(pr.mesh, cls, agg, 1, 1);
  auto c0 = project_initial(sp, *pr.ls, pr.u0);
  SpatialField f{&sp, c0};
  double integral = 0.0, area = 0.0;
  for (int cell : cls.active_cells) {
    auto q = cell_volume_rule(pr.mesh, cell, *pr.ls, 0.0, 4);
    for (int m = 0; m < q.size(); ++m) {
      integral += q.weights[m] * f.eval_on_cell(cell, q.points[m]);
      area += q.weights[m];
    }
  }
  CHECK(std::abs(integral) <= 1e-10 * area);
}

TEST_CASE("constant-solution problem stays constant through the slab march") {
  auto pr = presets::manufactured("moving-disk", 3, 1);
  const double c = 1.5;
  pr.data.source = nullptr;
  pr.data.dirichlet = [=](const Coord&, double) { return c; };
  pr.u0 = [=](const Coord&) { return c; };
  RunParams params;
  params.p = params.q = 1;
  auto slabs = uniform_slabbing(0.375, 3);
  auto res = run(pr.mesh, *pr.ls, pr.data, pr.u0, slabs, params);
  REQUIRE(res.solutions.size() == 3);
  for (const auto& u : res.solutions)
    CHECK((u.coef.array() - c).abs().maxCoeff() <= 1e-10);

  // trace integral equals c times the domain measure
  double area = 0.0;
  for (int cell : res.spaces[2]->cls.active_cells)
    area += cell_volume_rule(pr.mesh, cell, *pr.ls, slabs.slab_end(2), 2).total_weight();
  CHECK(trace_integral(res, *pr.ls, 2) == doctest::Approx(c * area).epsilon(1e-12));

  // error norms against the constant: zero to quadrature tolerance
  auto err = error_norms(res, *pr.ls, pr.data, constant_exact(c), 1.0);
  CHECK(err.accumulated_dg <= 1e-9);
  CHECK(err.l2_final <= 1e-10);
}

TEST_CASE("marching patch test: linear space-data reproduced across slabs") {
  auto pr = presets::manufactured("moving-disk", 3, 1);
  auto uex = [](const Coord& x, double) { return 0.25 + 2.0 * x[0] - x[1]; };
  pr.data.source = nullptr;
  pr.data.dirichlet = uex;
  pr.u0 = [&](const Coord& x) { return uex(x, 0.0); };
  RunParams params;
  params.p = params.q = 1;
  auto slabs = uniform_slabbing(0.25, 2);
  auto res = run(pr.mesh, *pr.ls, pr.data, pr.u0, slabs, params);
  for (int n = 0; n < 2; ++n) {
    auto interp = interpolate(*res.spaces[n], uex);
    CHECK((res.solutions[n].coef - interp.coef).lpNorm<Eigen::Infinity>() <= 1e-9);
  }
}

TEST_CASE("error norm of a constant offset matches the closed form") {
  auto pr = presets::manufactured("moving-disk", 3, 1);
  const double c = 2.0, delta = 0.35, c_mu = 1.0;
  pr.data.source = nullptr;
  pr.data.dirichlet = [=](const Coord&, double) { return c; };
  pr.u0 = [=](const Coord&) { return c; };
  RunParams params;
  params.p = params.q = 1;
  auto slabs = uniform_slabbing(0.25, 2);
  auto res = run(pr.mesh, *pr.ls, pr.data, pr.u0, slabs, params);

  // e = delta: no jumps, no gradient; only the final trace and the Nitsche
  // boundary term of the V(h) norm survive
  auto err = error_norms(res, *pr.ls, pr.data, constant_exact(c + delta), c_mu);
  CHECK(err.l2_final > 0.0);

  // closed forms from independently quadratured measures
  double area_T = 0.0;
  for (int cell : res.spaces[1]->cls.active_cells)
    area_T += cell_volume_rule(pr.mesh, cell, *pr.ls, 0.25, 2).total_weight();
  const double beta = pr.data.mu * pr.data.gamma / pr.mesh.max_h();
  // time integral of the boundary measure with a high-order temporal rule
  double bdry_time_integral = 0.0;
  {
    const auto g = gauss_legendre(6);
    for (int n = 0; n < 2; ++n)
      for (int k = 0; k < g.size(); ++k) {
        const double t = slabs.slab_begin(n) + g.x[k] * slabs.tau(n);
        double per = 0.0;
        for (int cell : res.spaces[n]->cls.active_cells) {
          per += cell_interface_rule(pr.mesh, cell, *pr.ls, t, 2).total_weight();
          for (int face = 0; face < 4; ++face)
            if (pr.mesh.face_on_box_boundary(cell, face)) {
              const int axis = face / 2;
              per += pr.mesh.h[1 - axis];  // outer faces are never cut here
            }
        }
        bdry_time_integral += g.w[k] * slabs.tau(n) * per;
      }
  }
  const double expected =
      std::sqrt(delta * delta * area_T + c_mu * beta * delta * delta * bdry_time_integral);
  CHECK(err.accumulated_dg == doctest::Approx(expected).epsilon(5e-3));
  CHECK(err.l2_final == doctest::Approx(delta * std::sqrt(area_T)).epsilon(1e-10));
}

namespace {

// level set that follows the disk until t_switch, then freezes: used to
// check that editing the future leaves earlier slabs bit-identical
struct FrozenAfter final : LevelSetField {
  MovingDiskComplement disk{{1.5, 0.5}, {-0.5, 0.0}, 0.2};
  double t_switch = 0.0;
  double value(const Coord& x, double t) const override {
    return disk.value(x, std::min(t, t_switch));
  }
};

}  // namespace

TEST_CASE("causality: editing the level set beyond t^n leaves slabs 1..n bit-identical") {
  auto pr = presets::manufactured("moving-disk", 3, 1);
  auto slabs = uniform_slabbing(0.25, 2);
  RunParams params;
  params.p = params.q = 1;

  FrozenAfter frozen;
  frozen.t_switch = slabs.slab_end(0);  // identical on the first slab only

  auto res_a = run(pr.mesh, *pr.ls, pr.data, pr.u0, slabs, params);
  auto res_b = run(pr.mesh, frozen, pr.data, pr.u0, slabs, params);
  REQUIRE(res_a.solutions[0].coef.size() == res_b.solutions[0].coef.size());
  CHECK((res_a.solutions[0].coef - res_b.solutions[0].coef).lpNorm<Eigen::Infinity>() == 0.0);
  // and the second slab genuinely differs
  CHECK((res_a.solutions[1].coef - res_b.solutions[1].coef).lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("manufactured smoke run: finite errors and sane diagnostics") {
  auto pr = presets::manufactured("moving-square", 3, 1);
  RunParams params;
  params.p = params.q = 1;
  auto res = run(pr.mesh, *pr.ls, pr.data, pr.u0, pr.slabs, params);
  REQUIRE(res.solutions.size() == 8);
  for (const auto& d : res.diagnostics) {
    CHECK(d.residual <= 1e-10);
    CHECK(d.n_active > 0);
    CHECK(d.n_cut > 0);
  }
  auto err = error_norms(res, *pr.ls, pr.data, pr.exact, 1.0);
  CHECK(std::isfinite(err.accumulated_dg));
  CHECK(std::isfinite(err.l2_final));
  CHECK(err.accumulated_dg > 0.0);
  CHECK(err.l2_final < 0.1);
}

TEST_CASE("per-slab failures report the slab index") {
  auto pr = presets::manufactured("moving-disk", 3, 1);
  FrozenAfter bad;
  bad.t_switch = -1.0;  // freeze immediately so slab geometry never moves
  // undersized slabbing is fine; instead force a failure with an invalid
  // eta0 via RunParams on the second slab: use a level set that leaves no
  // well-posed cell after t = 0.3
  struct VanishingDomain final : LevelSetField {
    double value(const Coord& x, double t) const override {
      if (t <= 0.5) return x[0] - 1.9;        // left strip; fine on slab 0
      return 1.0;                              // empty domain afterwards
    }
  } vanishing;
  RunParams params;
  params.p = params.q = 1;
  auto slabs = uniform_slabbing(1.0, 2);
  CHECK_THROWS_WITH_AS(run(pr.mesh, vanishing, pr.data, pr.u0, slabs, params),
                       doctest::Contains("slab 1"), std::runtime_error);
}

TEST_CASE("convergence study smoke: errors shrink under refinement") {
  auto table = presets::convergence_study("moving-square", {3, 4}, 1, 1, 1.0);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[1].dg < table.rows[0].dg);
  CHECK(table.rows[1].l2 < table.rows[0].l2);
  CHECK(table.dg_slope > 0.5);
  CHECK(table.l2_slope > 1.2);
}
