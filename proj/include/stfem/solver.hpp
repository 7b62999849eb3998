#pragma once

#include "stfem/assembly.hpp"

namespace stfem {

/// Direct sparse solve of the reduced slab system; the relative residual
/// ||Ax-b|| / ||b|| is verified against 1e-10 and returned.
struct SlabSolve {
  Eigen::VectorXd x;
  double residual = 0.0;
};
SlabSolve solve_slab(const SlabSystem& sys);

/// kappa_1 = ||A||_1 ||A^-1||_1. Below the cap the inverse norm is exact
/// (dense factorisation); above it a Hager-Higham estimate on a sparse LU,
/// flagged in the result. Singular matrices give +inf with the flag set.
struct CondResult {
  double value = 0.0;
  bool is_estimate = false;
  bool singular = false;
};
CondResult condition_number_1(const SpMat& A, int dense_cap = 20000);

}  // namespace stfem
