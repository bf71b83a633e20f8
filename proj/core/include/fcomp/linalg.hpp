#pragma once

#include <Eigen/Dense>

namespace fcomp {

/// Condition threshold above which a Tikhonov term is added.
inline constexpr double kConditionLimit = 1e12;
/// Tikhonov weight relative to trace/n of the (equilibrated) matrix.
inline constexpr double kTikhonovScale = 1e-10;

/// Solver for Hermitian positive semidefinite systems G x = b such as Gram and
/// normal matrices.
///
/// G is first equilibrated by its diagonal, S = D G D with D = diag(G_ii)^-1/2,
/// so that atoms of very different norms do not dominate the condition number.
/// If cond(S) exceeds kConditionLimit, S + lambda*I with
/// lambda = kTikhonovScale * trace(S)/n is factored instead and regularized()
/// reports true.
class HermitianSolver {
 public:
  HermitianSolver() = default;
  explicit HermitianSolver(const Eigen::MatrixXcd& gram);

  Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;

  /// Re(g^H G^-1 g), the energy of g's least-squares projection.
  double projected_energy(const Eigen::VectorXcd& g) const;

  /// Lower-triangular W with W^H W = G^-1 (regularized if applicable), so
  /// projected_energy(g) = ||W g||^2.
  const Eigen::MatrixXcd& whitener() const noexcept { return whitener_; }

  bool regularized() const noexcept { return regularized_; }
  double condition() const noexcept { return condition_; }
  Eigen::Index size() const noexcept { return scale_.size(); }

 private:
  Eigen::VectorXd scale_;
  Eigen::LLT<Eigen::MatrixXcd> factor_;
  Eigen::MatrixXcd whitener_;
  double condition_ = 1.0;
  bool regularized_ = false;
};

}  // namespace fcomp
