#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "stfem/mesh.hpp"

using namespace stfem;

TEST_CASE("build_mesh basics and paper-sized grids") {
  // Omega_art = [0,2]x[0,1] with 16x8 cells
  auto m = build_mesh(2, {0.0, 0.0}, {2.0, 1.0}, {16, 8});
  CHECK(m.num_cells() == 128);
  CHECK(m.h[0] == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(m.h[1] == doctest::Approx(0.125).epsilon(1e-15));

  auto m2 = build_mesh(2, {-0.6, -1.35}, {0.6, 1.35}, {60, 121});
  CHECK(m2.num_cells() == 7260);

  auto m1 = build_mesh(1, {0.0, 0.0}, {1.0, 0.0}, {1, 1});
  CHECK(m1.num_cells() == 1);
  CHECK(m1.num_vertices_per_dim(0) == 2);
}

TEST_CASE("build_mesh rejects degenerate input") {
  CHECK_THROWS(build_mesh(2, {0.0, 0.0}, {0.0, 1.0}, {4, 4}));
  CHECK_THROWS(build_mesh(2, {0.0, 0.0}, {1.0, 1.0}, {0, 4}));
  // quasi-uniformity bound
  CHECK_THROWS(build_mesh(2, {0.0, 0.0}, {100.0, 1.0}, {4, 4}));
}

TEST_CASE("cell volumes sum to the box volume") {
  auto m = build_mesh(2, {0.25, -1.0}, {2.25, 0.5}, {7, 13});
  double sum = 0.0;
  for (int c = 0; c < m.num_cells(); ++c) sum += m.cell_volume();
  CHECK(sum == doctest::Approx(2.0 * 1.5).epsilon(1e-14));
}

TEST_CASE("neighbours: counts and symmetry") {
  auto m = build_mesh(2, {0.0, 0.0}, {1.0, 1.0}, {4, 4});
  CHECK(m.cell_neighbors(m.cell_id({1, 1})).size() == 4);  // interior
  CHECK(m.cell_neighbors(m.cell_id({0, 0})).size() == 2);  // corner
  CHECK_THROWS(m.cell_neighbors(-1));
  CHECK_THROWS(m.cell_neighbors(16));

  for (int a = 0; a < m.num_cells(); ++a)
    for (int b : m.cell_neighbors(a)) {
      auto nb = m.cell_neighbors(b);
      CHECK(std::find(nb.begin(), nb.end(), a) != nb.end());
    }

  auto m1 = build_mesh(1, {0.0, 0.0}, {1.0, 0.0}, {3, 1});
  CHECK(m1.cell_neighbors(1).size() == 2);
}

TEST_CASE("locate_point contract") {
  auto m = build_mesh(2, {0.0, 0.0}, {2.0, 1.0}, {8, 4});
  CHECK(m.locate_point({0.0, 0.0}) == 0);
  // shared face between cells i and i+1 goes to the lower index
  CHECK(m.locate_point({0.25, 0.1}) == 0);
  CHECK(m.locate_point({0.3, 0.1}) == 1);
  CHECK_FALSE(m.locate_point({2.5, 0.5}).has_value());
  CHECK_FALSE(m.locate_point({1.0, -0.1}).has_value());

  // vertices of a cell resolve to the cell or a lower-indexed adjacent cell
  for (int c = 0; c < m.num_cells(); ++c) {
    const auto lo = m.cell_lo(c), hi = m.cell_hi(c);
    for (const Coord v : {Coord{lo[0], lo[1]}, Coord{hi[0], lo[1]}, Coord{lo[0], hi[1]},
                          Coord{hi[0], hi[1]}}) {
      auto found = m.locate_point(v);
      REQUIRE(found.has_value());
      CHECK(*found <= c);
      const auto ci = m.cell_multi_index(c), fi = m.cell_multi_index(*found);
      CHECK(std::abs(ci[0] - fi[0]) <= 1);
      CHECK(std::abs(ci[1] - fi[1]) <= 1);
    }
  }
}

TEST_CASE("cells_containing covers face and corner points") {
  auto m = build_mesh(2, {0.0, 0.0}, {1.0, 1.0}, {4, 4});
  CHECK(m.cells_containing({0.5, 0.5}).size() == 4);   // shared corner
  CHECK(m.cells_containing({0.5, 0.1}).size() == 2);   // shared face
  CHECK(m.cells_containing({0.1, 0.1}).size() == 1);
  CHECK(m.cells_containing({1.2, 0.5}).empty());
}

TEST_CASE("time slabbing") {
  auto ts = uniform_slabbing(1.0, 8);
  CHECK(ts.num_slabs() == 8);
  CHECK(ts.tau(3) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(ts.max_tau() == doctest::Approx(0.125).epsilon(1e-15));
  CHECK_THROWS(make_slabbing({0.0, 0.5, 0.5, 1.0}));
  CHECK_THROWS(uniform_slabbing(1.0, 0));
}
