#include <gtest/gtest.h>

#include "fcomp/linalg.hpp"
#include "support/generators.hpp"

using fcomp::HermitianSolver;

namespace {

Eigen::MatrixXcd random_gram(gen::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXcd a(rows, cols);
  for (auto& x : a.reshaped()) x = gen::gaussian_complex(rng);
  return a.adjoint() * a;
}

}  // namespace

TEST(HermitianSolver, SolvesWellConditionedSystems) {
  gen::Rng rng(3);
  for (int c = 0; c < 20; ++c) {
    const Eigen::MatrixXcd g = random_gram(rng, 12, 5);
    Eigen::VectorXcd x(5);
    for (auto& v : x) v = gen::gaussian_complex(rng);
    const HermitianSolver solver(g);
    EXPECT_FALSE(solver.regularized());
    EXPECT_LT((solver.solve(g * x) - x).norm(), 1e-9 * x.norm());
  }
}

TEST(HermitianSolver, ProjectedEnergyMatchesDirectFormula) {
  gen::Rng rng(4);
  const Eigen::MatrixXcd g = random_gram(rng, 9, 3);
  Eigen::VectorXcd v(3);
  for (auto& x : v) x = gen::gaussian_complex(rng);
  const HermitianSolver solver(g);
  const double direct = (v.adjoint() * g.ldlt().solve(v))(0).real();
  EXPECT_NEAR(solver.projected_energy(v), direct, 1e-10 * direct);
  EXPECT_NEAR((solver.whitener() * v).squaredNorm(), direct, 1e-10 * direct);
}

TEST(HermitianSolver, EquilibrationHandlesBadlyScaledColumns) {
  // diag(1, 1e14) is trivially invertible once rescaled.
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(2, 2);
  g(0, 0) = 1.0;
  g(1, 1) = 1e14;
  const HermitianSolver solver(g);
  EXPECT_FALSE(solver.regularized());
  Eigen::VectorXcd b(2);
  b << 1.0, 1e14;
  EXPECT_LT((solver.solve(b) - Eigen::VectorXcd::Ones(2)).norm(), 1e-12);
}

TEST(HermitianSolver, SingularMatrixFallsBackToTikhonov) {
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Ones(3, 3);
  const HermitianSolver solver(g);
  EXPECT_TRUE(solver.regularized());
  EXPECT_GT(solver.condition(), fcomp::kConditionLimit);
  const Eigen::VectorXcd x = solver.solve(Eigen::VectorXcd::Ones(3));
  EXPECT_TRUE(x.allFinite());
  // The regularized minimum-norm-like solution still reproduces the data.
  EXPECT_LT((g * x - Eigen::VectorXcd::Ones(3)).norm(), 1e-6);
}
