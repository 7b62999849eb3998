#include "stfem/gauss.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace stfem {

namespace {

// Golub-Welsch: nodes/weights from the symmetric Jacobi matrix of the
// orthogonal-polynomial recurrence. diag/offdiag are for [-1,1]; mu0 is the
// integral of the weight function over [-1,1].
Rule1D golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) J(i, i) = diag(i);
  for (int i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = offdiag(i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    r.x[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    r.w[i] = mu0 * v0 * v0;
  }
  return r;
}

}  // namespace

Rule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  Rule1D r = golub_welsch(diag, off, 2.0);
  // map [-1,1] -> [0,1]
  for (int i = 0; i < n; ++i) {
    r.x[i] = 0.5 * (r.x[i] + 1.0);
    r.w[i] *= 0.5;
  }
  return r;
}

Rule1D gauss_jacobi10(int n) {
  if (n < 1) throw std::invalid_argument("gauss_jacobi10: need n >= 1");
  // Jacobi weight (1-x)^a (1+x)^b with a = 1, b = 0 on [-1,1].
  const double a = 1.0, b = 0.0;
  Eigen::VectorXd diag(n);
  Eigen::VectorXd off(n > 1 ? n - 1 : 0);
  diag(0) = (b - a) / (a + b + 2.0);
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + a + b;
    diag(k) = (b * b - a * a) / (s * (s + 2.0));
    double num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
    double den = s * s * (s + 1.0) * (s - 1.0);
    off(k - 1) = std::sqrt(num / den);
  }
  const double mu0 = 2.0;  // integral of (1-x) over [-1,1]
  Rule1D r = golub_welsch(diag, off, mu0);
  // map to [0,1] with weight (1-t): t = (1+x)/2, dt = dx/2, (1-t) = (1-x)/2
  for (int i = 0; i < n; ++i) {
    r.x[i] = 0.5 * (r.x[i] + 1.0);
    r.w[i] *= 0.25;
  }
  return r;
}

int gauss_count_for_degree(int degree) {
  if (degree < 0) degree = 0;
  return degree / 2 + 1;
}

std::vector<double> gauss_lobatto_nodes(int n) {
  switch (n) {
    case 2:
      return {0.0, 1.0};
    case 3:
      return {0.0, 0.5, 1.0};
    case 4: {
      const double s = 1.0 / std::sqrt(5.0);
      return {0.0, 0.5 * (1.0 - s), 0.5 * (1.0 + s), 1.0};
    }
    default:
      throw std::invalid_argument("gauss_lobatto_nodes: supported sizes are 2..4");
  }
}

}  // namespace stfem
