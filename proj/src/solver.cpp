#include "stfem/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stfem {

SlabSolve solve_slab(const SlabSystem& sys) {
  if (sys.matrix.rows() != sys.matrix.cols() || sys.matrix.rows() != sys.rhs.size())
    throw std::invalid_argument("solve_slab: system is not square");
  Eigen::SparseLU<SpMat> lu;
  lu.compute(sys.matrix);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve_slab: singular factorisation");
  SlabSolve out;
  out.x = lu.solve(sys.rhs);
  const double bnorm = sys.rhs.norm();
  out.residual = (sys.matrix * out.x - sys.rhs).norm() / (bnorm > 0.0 ? bnorm : 1.0);
  if (!(out.residual <= 1e-10))
    throw std::runtime_error("solve_slab: residual check failed, ||Ax-b||/||b|| = " +
                             std::to_string(out.residual));
  return out;
}

namespace {

double one_norm(const SpMat& A) {
  double best = 0.0;
  for (int j = 0; j < A.outerSize(); ++j) {
    double s = 0.0;
    for (SpMat::InnerIterator it(A, j); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

// Hager-Higham estimate of ||A^-1||_1 from factorisations of A and A^T.
double inv_one_norm_estimate(const SpMat& A, bool* ok) {
  const int n = static_cast<int>(A.rows());
  Eigen::SparseLU<SpMat> lu, luT;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    *ok = false;
    return 0.0;
  }
  SpMat At = A.transpose();
  luT.compute(At);
  if (luT.info() != Eigen::Success) {
    *ok = false;
    return 0.0;
  }
  *ok = true;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
  double est = 0.0;
  for (int iter = 0; iter < 8; ++iter) {
    Eigen::VectorXd y = lu.solve(x);
    est = y.lpNorm<1>();
    Eigen::VectorXd xi(n);
    for (int i = 0; i < n; ++i) xi[i] = y[i] >= 0.0 ? 1.0 : -1.0;
    Eigen::VectorXd z = luT.solve(xi);
    int j = 0;
    double zmax = -1.0;
    for (int i = 0; i < n; ++i)
      if (std::abs(z[i]) > zmax) {
        zmax = std::abs(z[i]);
        j = i;
      }
    if (zmax <= z.dot(x)) break;
    x.setZero();
    x[j] = 1.0;
  }
  // alternate lower bound from a oscillating probe vector (standard guard)
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + double(i) / (n - 1 + 1e-300));
  const double alt = 2.0 * lu.solve(v).lpNorm<1>() / (3.0 * n);
  return std::max(est, alt);
}

}  // namespace

CondResult condition_number_1(const SpMat& A, int dense_cap) {
  if (A.rows() != A.cols()) throw std::invalid_argument("condition_number_1: matrix not square");
  const int n = static_cast<int>(A.rows());
  if (n == 0) throw std::invalid_argument("condition_number_1: empty matrix");
  CondResult r;
  const double na = one_norm(A);
  if (na == 0.0) {
    r.value = std::numeric_limits<double>::infinity();
    r.singular = true;
    return r;
  }
  if (n <= dense_cap) {
    Eigen::MatrixXd Ad(A);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Ad);
    // exact column-wise 1-norm of the inverse
    Eigen::MatrixXd inv = lu.solve(Eigen::MatrixXd::Identity(n, n));
    double ninv = 0.0;
    for (int j = 0; j < n; ++j) ninv = std::max(ninv, inv.col(j).lpNorm<1>());
    if (!std::isfinite(ninv)) {
      r.value = std::numeric_limits<double>::infinity();
      r.singular = true;
      return r;
    }
    r.value = na * ninv;
    return r;
  }
  bool ok = false;
  const double ninv = inv_one_norm_estimate(A, &ok);
  r.is_estimate = true;
  if (!ok || !std::isfinite(ninv)) {
    r.value = std::numeric_limits<double>::infinity();
    r.singular = true;
    return r;
  }
  r.value = na * ninv;
  return r;
}

}  // namespace stfem
