#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "forge/util/error.hpp"

namespace forge::sensitivity {

class NonFiniteInput : public Error {
 public:
  NonFiniteInput() : Error("nuclear norm of a matrix with non-finite entries") {}
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations (unsorted).
inline Eigen::VectorXd jacobi_eigenvalues(Eigen::MatrixXd a, int max_sweeps = 100) {
  const Eigen::Index n = a.rows();
  const double scale = a.norm();
  if (n == 0 || scale == 0.0) return Eigen::VectorXd::Zero(n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2 * off) <= 1e-17 * scale) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
        const double c = 1 / std::sqrt(1 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  return a.diagonal();
}

/// Sum of singular values. The singular values are square roots of the
/// eigenvalues of the smaller Gram matrix (G^T G or G G^T), clamped at zero.
template <typename Derived>
double nuclear_norm(const Eigen::MatrixBase<Derived>& g) {
  const Eigen::MatrixXd m = g.template cast<double>();
  if (!m.allFinite()) throw NonFiniteInput();
  if (m.size() == 0) return 0.0;
  const Eigen::MatrixXd gram =
      m.rows() >= m.cols() ? Eigen::MatrixXd(m.transpose() * m) : Eigen::MatrixXd(m * m.transpose());
  const Eigen::VectorXd lambda = jacobi_eigenvalues(gram);
  double sum = 0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) sum += std::sqrt(std::max(lambda(i), 0.0));
  return sum;
}

}  // namespace forge::sensitivity
