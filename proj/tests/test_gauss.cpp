#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stfem/gauss.hpp"

using namespace stfem;

namespace {
double monomial_integral(int k) { return 1.0 / (k + 1); }  // int_0^1 x^k
}

TEST_CASE("Gauss-Legendre exactness up to degree 2n-1") {
  for (int n = 1; n <= 8; ++n) {
    const Rule1D g = gauss_legendre(n);
    double wsum = 0.0;
    for (double w : g.w) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < g.size(); ++i) s += g.w[i] * std::pow(g.x[i], k);
      CHECK(s == doctest::Approx(monomial_integral(k)).epsilon(1e-13));
    }
  }
}

TEST_CASE("Gauss-Jacobi (1,0) integrates x^k (1-x) exactly") {
  for (int n = 1; n <= 6; ++n) {
    const Rule1D g = gauss_jacobi10(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < g.size(); ++i) s += g.w[i] * std::pow(g.x[i], k);
      // int_0^1 x^k (1-x) dx
      const double exact = 1.0 / (k + 1) - 1.0 / (k + 2);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("point counts and Lobatto nodes") {
  CHECK(gauss_count_for_degree(0) == 1);
  CHECK(gauss_count_for_degree(1) == 1);
  CHECK(gauss_count_for_degree(2) == 2);
  CHECK(gauss_count_for_degree(3) == 2);
  CHECK(gauss_count_for_degree(5) == 3);

  auto l2 = gauss_lobatto_nodes(2);
  CHECK(l2.front() == 0.0);
  CHECK(l2.back() == 1.0);
  auto l3 = gauss_lobatto_nodes(3);
  CHECK(l3[1] == doctest::Approx(0.5));
  CHECK_THROWS(gauss_lobatto_nodes(5));
}
