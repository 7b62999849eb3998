#pragma once

#include <vector>

namespace stfem {

/// 1D quadrature rule on the reference interval [0,1].
struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
  int size() const { return static_cast<int>(x.size()); }
};

/// Gauss-Legendre rule with n points; exact for polynomials of degree 2n-1.
Rule1D gauss_legendre(int n);

/// Gauss-Jacobi rule for the weight (1-x) on [0,1]; the weights returned
/// already include the weight function. Exact for p(x)(1-x) with
/// deg p <= 2n-1. Used for the conical product rule on triangles.
Rule1D gauss_jacobi10(int n);

/// Number of Gauss points needed for polynomial exactness of `degree`.
int gauss_count_for_degree(int degree);

/// Gauss-Lobatto nodes on [0,1] (endpoints included), n in [2,4].
/// Only the nodes are needed (temporal Lagrange interpolation points).
std::vector<double> gauss_lobatto_nodes(int n);

}  // namespace stfem
