#include "fcomp/linalg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fcomp {

HermitianSolver::HermitianSolver(const Eigen::MatrixXcd& gram) {
  const Eigen::Index n = gram.rows();
  if (n == 0 || gram.cols() != n) {
    throw std::invalid_argument("Hermitian solve needs a non-empty square matrix");
  }

  scale_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = gram(i, i).real();
    scale_[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
  }
  Eigen::MatrixXcd scaled = scale_.asDiagonal() * gram * scale_.asDiagonal();
  // Enforce exact Hermitian symmetry before factoring.
  scaled = 0.5 * (scaled + scaled.adjoint()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(scaled, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();

  if (condition_ > kConditionLimit) {
    const double lambda = kTikhonovScale * scaled.trace().real() / static_cast<double>(n);
    scaled.diagonal().array() += lambda;
    regularized_ = true;
  }

  factor_.compute(scaled);
  if (factor_.info() != Eigen::Success) {
    // Only reachable for indefinite input; fall back to a stronger shift.
    const double lambda = std::max(1e-8, -lo + 1e-8) * scaled.trace().real() / static_cast<double>(n);
    scaled.diagonal().array() += lambda;
    factor_.compute(scaled);
    regularized_ = true;
    if (factor_.info() != Eigen::Success) {
      throw std::runtime_error("Hermitian factorization failed");
    }
  }

  // S = L L^H  =>  S^-1 = L^-H L^-1, and G^-1 = D S^-1 D, so W = L^-1 D.
  const Eigen::MatrixXcd l_inv =
      factor_.matrixL().solve(Eigen::MatrixXcd::Identity(n, n));
  whitener_ = l_inv * scale_.asDiagonal();
}

Eigen::VectorXcd HermitianSolver::solve(const Eigen::VectorXcd& rhs) const {
  if (rhs.size() != scale_.size()) {
    throw std::invalid_argument("right-hand side length does not match system size");
  }
  const Eigen::VectorXcd scaled_rhs = scale_.asDiagonal() * rhs;
  return scale_.asDiagonal() * factor_.solve(scaled_rhs);
}

double HermitianSolver::projected_energy(const Eigen::VectorXcd& g) const {
  return (whitener_ * g).squaredNorm();
}

}  // namespace fcomp
