#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "fcomp/dictionary.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace fcomp;

TEST(SeparableGrid, UniformNodesAreCellCentred) {
  const ParameterDomain box({{0.0, 4.0}, {-1.0, 1.0}});
  const std::vector<std::size_t> counts{4, 2};
  const SeparableGrid g = SeparableGrid::uniform(box, counts);
  EXPECT_EQ(g.nodes(0), (std::vector<double>{0.5, 1.5, 2.5, 3.5}));
  EXPECT_EQ(g.nodes(1), (std::vector<double>{-0.5, 0.5}));
  EXPECT_DOUBLE_EQ(g.step(0), 1.0);
  EXPECT_EQ(g.shape(), (Shape{4, 2}));
  EXPECT_EQ(g.node_count(), 8u);
}

TEST(SeparableGrid, RejectsNonUniformOrShortAxes) {
  EXPECT_THROW(SeparableGrid({{0.0, 1.0, 2.5}}), std::invalid_argument);
  EXPECT_THROW(SeparableGrid({{0.0, 1.0}, {3.0}}), std::invalid_argument);
  EXPECT_THROW(SeparableGrid({{2.0, 1.0, 0.0}}), std::invalid_argument);
  EXPECT_THROW(SeparableGrid(std::vector<std::vector<double>>{}), std::invalid_argument);
}

TEST(SeparableGrid, AcceptsRoundingLevelJitter) {
  std::vector<double> axis;
  for (int n = 0; n < 64; ++n) axis.push_back(1e3 + 0.1 * n);
  EXPECT_NO_THROW(SeparableGrid({axis}));
}

TEST(SeparableGrid, FlatIndexIsRowMajor) {
  const SeparableGrid g({{0.0, 1.0, 2.0}, {0.0, 1.0, 2.0, 3.0}});
  const std::vector<std::size_t> n{2, 1};
  EXPECT_EQ(g.flat_index(n), 9u);
  EXPECT_EQ(g.multi_index(9), (MultiIndex{2, 1}));
  EXPECT_THROW((void)g.multi_index(12), std::invalid_argument);
}

TEST(SeparableGrid, NearestNodeClampsToTheGrid) {
  const SeparableGrid g({{0.0, 1.0, 2.0}});
  EXPECT_EQ(g.nearest_node(std::vector<double>{1.4}), (MultiIndex{1}));
  EXPECT_EQ(g.nearest_node(std::vector<double>{1.6}), (MultiIndex{2}));
  EXPECT_EQ(g.nearest_node(std::vector<double>{-7.0}), (MultiIndex{0}));
  EXPECT_EQ(g.nearest_node(std::vector<double>{9.0}), (MultiIndex{2}));
}

TEST(ExponentialSubAtom, ZeroParameterGivesAllOnes) {
  const ExponentialSubAtom psi(7, 2.0);
  EXPECT_LT((psi.value(0.0) - Eigen::VectorXcd::Ones(7)).norm(), 1e-15);
}

TEST(ExponentialSubAtom, MatchesClosedFormAndFiniteDifference) {
  const oracle::ExponentialAxis ref{9, 1.3};
  const ExponentialSubAtom psi(9, 1.3);
  const double p = 0.77;
  const Eigen::VectorXcd v = psi.value(p);
  const Eigen::VectorXcd d = psi.derivative(p);
  const double h = 1e-6;
  const Eigen::VectorXcd fd = (psi.value(p + h) - psi.value(p - h)) / (2.0 * h);
  for (std::size_t m = 0; m < 9; ++m) {
    const auto i = static_cast<Eigen::Index>(m);
    EXPECT_NEAR(std::abs(v[i] - ref.value(m, p)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(d[i] - ref.derivative(m, p)), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(d[i] - fd[i]), 0.0, 1e-7);
  }
}

TEST(ExponentialSubAtom, IsPeriodicInTheParameter) {
  const double rate = 2.5;
  const ExponentialSubAtom psi(16, rate);
  const double period = 2.0 * std::numbers::pi / rate;
  EXPECT_LT((psi.value(0.3) - psi.value(0.3 + period)).norm(), 1e-12);
}

TEST(InterpolatedDictionary, HasOneValueAndOneDerivativeAtomPerAxis) {
  gen::Rng rng(11);
  const auto inst = gen::random_instance(rng, {.rank = 3, .max_length = 5, .max_nodes = 6});
  EXPECT_EQ(inst.dict.interp_count(), 4u);
  EXPECT_EQ(InterpolatedDictionary::role_of(0, 1), Role::Value);
  EXPECT_EQ(InterpolatedDictionary::role_of(2, 1), Role::Derivative);
  EXPECT_EQ(InterpolatedDictionary::role_of(2, 0), Role::Value);
}

TEST(InterpolatedDictionary, AtomsMatchEntrywiseOracle) {
  gen::Rng rng(12);
  for (int c = 0; c < 10; ++c) {
    const auto inst = gen::random_instance(rng, {.rank = static_cast<std::size_t>(1 + c % 3)});
    const auto& grid = inst.dict.grid();
    const MultiIndex n = grid.multi_index(gen::uniform_size(rng, 0, grid.node_count() - 1));
    const auto w = grid.point(n);
    for (std::size_t i = 0; i < inst.dict.interp_count(); ++i) {
      const Eigen::VectorXcd expected = oracle::atom(inst.axes, w, i);
      const Eigen::VectorXcd got = inst.dict.atom(i, n).as_vector();
      EXPECT_LT((got - expected).norm(), 1e-12 * expected.norm());
    }
  }
}

TEST(InterpolatedDictionary, GramAndCrossGramMatchOracle) {
  gen::Rng rng(13);
  for (int c = 0; c < 10; ++c) {
    const auto inst = gen::random_instance(rng);
    const auto& grid = inst.dict.grid();
    const MultiIndex a = grid.multi_index(gen::uniform_size(rng, 0, grid.node_count() - 1));
    const MultiIndex b = grid.multi_index(gen::uniform_size(rng, 0, grid.node_count() - 1));
    const std::size_t roles = inst.dict.interp_count();
    const Eigen::MatrixXcd atoms_a = oracle::node_atoms(inst.axes, grid.point(a), roles);
    const Eigen::MatrixXcd atoms_b = oracle::node_atoms(inst.axes, grid.point(b), roles);

    const Eigen::MatrixXcd cross = atoms_a.adjoint() * atoms_b;
    EXPECT_LT((inst.dict.cross_gram(a, b) - cross).norm(), 1e-10 * cross.norm());

    const Eigen::MatrixXcd gram = atoms_a.adjoint() * atoms_a;
    EXPECT_LT((inst.dict.node_gram(a) - gram).norm(), 1e-10 * gram.norm());
    // Exponential sub-atoms give the same Gram at every node.
    EXPECT_LT((inst.dict.gram() - gram).norm(), 1e-10 * gram.norm());
    for (std::size_t i = 0; i < roles; ++i) {
      EXPECT_NEAR(inst.dict.atom_norm(i), atoms_a.col(static_cast<Eigen::Index>(i)).norm(),
                  1e-12 * gram.norm());
    }
  }
}

TEST(InterpolatedDictionary, AtomInnerProductMatchesMaterializedAtom) {
  gen::Rng rng(14);
  const auto inst = gen::random_instance(rng);
  const ComplexTensor t = gen::gaussian_tensor(rng, inst.dict.atom_shape());
  const MultiIndex n{1, 2};
  for (std::size_t i = 0; i < inst.dict.interp_count(); ++i) {
    const Complex expected = inner_product(inst.dict.atom(i, n), t);
    EXPECT_NEAR(std::abs(inst.dict.atom_inner_product(i, n, t) - expected), 0.0,
                1e-12 * (1.0 + std::abs(expected)));
  }
}

TEST(InterpolatedDictionary, CoefficientFunctionIsOneThenOffsets) {
  const auto gen0 = std::make_shared<ExponentialSubAtom>(4, 1.0);
  const InterpolatedDictionary d({gen0, gen0}, SeparableGrid({{0.0, 1.0, 2.0}, {5.0, 6.0}}));
  const MultiIndex n{1, 0};
  const std::vector<double> p{1.25, 4.9};
  const Eigen::VectorXcd c = d.coefficient_function(n, p);
  ASSERT_EQ(c.size(), 3);
  EXPECT_EQ(c[0], Complex(1.0, 0.0));
  EXPECT_NEAR(c[1].real(), 0.25, 1e-15);
  EXPECT_NEAR(c[2].real(), -0.1, 1e-15);
}

TEST(InterpolatedDictionary, InterpolationIsExactAtNodes) {
  gen::Rng rng(15);
  const auto inst = gen::random_instance(rng);
  const MultiIndex n{2, 3};
  const auto w = inst.dict.grid().point(n);
  const ComplexTensor diff = inst.dict.interpolate_atom(n, w) - inst.dict.exact_atom(w);
  EXPECT_LT(frobenius_norm(diff), 1e-13);
}

TEST(InterpolatedDictionary, TaylorRemainderIsSecondOrder) {
  // ||A(w + d) - A(w) - d A'(w)|| ~ |d|^2 for small d, so halving d quarters it.
  const auto psi = std::make_shared<ExponentialSubAtom>(8, 0.4);
  const InterpolatedDictionary d({psi}, SeparableGrid({{0.0, 1.0, 2.0}}));
  const MultiIndex n{1};
  auto error = [&](double delta) {
    const std::vector<double> p{1.0 + delta};
    return frobenius_norm(d.interpolate_atom(n, p) - d.exact_atom(p));
  };
  for (double delta : {0.1, 0.05, 0.02}) {
    EXPECT_NEAR(error(delta) / error(delta / 2.0), 4.0, 0.1) << "delta = " << delta;
  }
}

TEST(InterpolatedDictionary, RejectsMismatchedGenerators) {
  const auto psi = std::make_shared<ExponentialSubAtom>(4, 1.0);
  EXPECT_THROW(InterpolatedDictionary({psi}, SeparableGrid({{0.0, 1.0}, {0.0, 1.0}})),
               std::invalid_argument);
  EXPECT_THROW(InterpolatedDictionary({psi, nullptr}, SeparableGrid({{0.0, 1.0}, {0.0, 1.0}})),
               std::invalid_argument);
}
