#pragma once

// Continuous factorizable dictionaries and their order-1 Taylor interpolation
// over a separable grid.
//
// An atom A(p) = psi_1(p_1) (x) ... (x) psi_L(p_L) is approximated near the grid
// node n by
//     A(p) ~ sum_i c_i A^(i)[n],   c = (1, p_1 - w_1, ..., p_L - w_L),
// where A^(1)[n] is the on-grid atom and A^(l+1)[n] swaps factor l for its
// derivative psi_l'(w_l). Every interpolation atom is itself an outer product,
// so correlations against all nodes can be computed one mode at a time.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fcomp/tensor.hpp"

namespace fcomp {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

class ParameterDomain {
 public:
  explicit ParameterDomain(std::vector<Interval> axes);

  std::size_t rank() const noexcept { return axes_.size(); }
  const Interval& axis(std::size_t l) const { return axes_.at(l); }
  const std::vector<Interval>& axes() const noexcept { return axes_; }
  bool contains(std::span<const double> p) const;

 private:
  std::vector<Interval> axes_;
};

/// Omega_1 x ... x Omega_L with uniformly spaced nodes on every axis.
/// Node indices are 0-based internally.
class SeparableGrid {
 public:
  /// Validates that every axis is strictly increasing, uniformly spaced
  /// (1e-12 relative), and has at least two nodes.
  explicit SeparableGrid(std::vector<std::vector<double>> nodes);

  /// Cell-centred nodes: w_{l,n} = lo_l + (n + 1/2) * (hi_l - lo_l) / N_l.
  static SeparableGrid uniform(const ParameterDomain& domain, std::span<const std::size_t> counts);

  std::size_t rank() const noexcept { return nodes_.size(); }
  std::size_t count(std::size_t l) const { return nodes_.at(l).size(); }
  double step(std::size_t l) const { return steps_.at(l); }
  double node(std::size_t l, std::size_t n) const { return nodes_.at(l).at(n); }
  const std::vector<double>& nodes(std::size_t l) const { return nodes_.at(l); }

  /// (N_1, ..., N_L)
  const Shape& shape() const noexcept { return shape_; }
  std::size_t node_count() const noexcept { return element_count(shape_); }

  std::size_t flat_index(std::span<const std::size_t> n) const;
  MultiIndex multi_index(std::size_t flat) const;
  std::vector<double> point(std::span<const std::size_t> n) const;

  /// Node whose Voronoi cell contains p (nearest node per axis, clamped).
  MultiIndex nearest_node(std::span<const double> p) const;

 private:
  std::vector<std::vector<double>> nodes_;
  std::vector<double> steps_;
  Shape shape_;
};

/// One factor psi_l of a separable atom, with its analytic derivative in p.
class SubAtomGenerator {
 public:
  virtual ~SubAtomGenerator() = default;
  virtual std::size_t length() const = 0;
  virtual Eigen::VectorXcd value(double p) const = 0;
  virtual Eigen::VectorXcd derivative(double p) const = 0;
};

using SubAtomPtr = std::shared_ptr<const SubAtomGenerator>;

/// psi(p)_m = exp(-j * rate * p * (m - floor(M/2))), m = 0..M-1.
///
/// Indices are centred on the middle sample, which keeps psi and psi' nearly
/// uncorrelated and the first-order Taylor model accurate over a whole cell.
/// The centre is an integer so psi stays exactly 2pi/rate periodic in p.
class ExponentialSubAtom final : public SubAtomGenerator {
 public:
  ExponentialSubAtom(std::size_t length, double rate);

  std::size_t length() const override { return length_; }
  double rate() const noexcept { return rate_; }
  Eigen::VectorXcd value(double p) const override;
  Eigen::VectorXcd derivative(double p) const override;

 private:
  std::size_t length_;
  double rate_;
};

enum class Role { Value, Derivative };

/// Outer product of psi_l(p_l) over all axes.
ComplexTensor exact_atom(std::span<const SubAtomPtr> generators, std::span<const double> p);

class InterpolatedDictionary {
 public:
  InterpolatedDictionary(std::vector<SubAtomPtr> generators, SeparableGrid grid);

  std::size_t rank() const noexcept { return grid_.rank(); }
  /// I = L + 1: the value atom plus one derivative atom per axis.
  std::size_t interp_count() const noexcept { return grid_.rank() + 1; }

  const SeparableGrid& grid() const noexcept { return grid_; }
  const std::vector<SubAtomPtr>& generators() const noexcept { return generators_; }

  /// (M_1, ..., M_L)
  const Shape& atom_shape() const noexcept { return atom_shape_; }

  /// Derivative for axis l iff i == l + 1.
  static Role role_of(std::size_t i, std::size_t axis) noexcept {
    return i == axis + 1 ? Role::Derivative : Role::Value;
  }

  /// M_l x N_l table whose column n is psi_l(w_n) or psi_l'(w_n).
  const Eigen::MatrixXcd& table(std::size_t axis, Role role) const;
  const Eigen::MatrixXcd& factor_table(std::size_t i, std::size_t axis) const {
    return table(axis, role_of(i, axis));
  }

  /// Materialized A^(i)[n].
  ComplexTensor atom(std::size_t i, std::span<const std::size_t> n) const;

  /// <A^(i)[n], t> without materializing the atom.
  Complex atom_inner_product(std::size_t i, std::span<const std::size_t> n,
                             const ComplexTensor& t) const;

  /// I x I Gram of the interpolation atoms at the first node. Node-invariant
  /// for exponential sub-atoms.
  const Eigen::MatrixXcd& gram() const noexcept { return gram_; }

  /// Gram of the interpolation atoms at node n, from per-axis products.
  Eigen::MatrixXcd node_gram(std::span<const std::size_t> n) const;

  /// I x I block of <A^(i)[a], A^(j)[b]> = prod_l <psi_l^(i)[a_l], psi_l^(j)[b_l]>.
  Eigen::MatrixXcd cross_gram(std::span<const std::size_t> a, std::span<const std::size_t> b) const;

  /// ||A^(i)[n]||_F (node-invariant).
  double atom_norm(std::size_t i) const;

  /// Taylor coefficient pattern (1, p_1 - w_1, ..., p_L - w_L).
  Eigen::VectorXcd coefficient_function(std::span<const std::size_t> n,
                                        std::span<const double> p) const;

  /// sum_i c_i A^(i)[n] with c = coefficient_function(n, p).
  ComplexTensor interpolate_atom(std::span<const std::size_t> n, std::span<const double> p) const;

  ComplexTensor exact_atom(std::span<const double> p) const {
    return fcomp::exact_atom(generators_, p);
  }

 private:
  void check_node(std::span<const std::size_t> n) const;

  std::vector<SubAtomPtr> generators_;
  SeparableGrid grid_;
  Shape atom_shape_;
  std::vector<Eigen::MatrixXcd> values_;
  std::vector<Eigen::MatrixXcd> derivatives_;
  Eigen::MatrixXcd gram_;
};

/// Same as constructing an InterpolatedDictionary; kept as a free function for
/// symmetry with the other builders.
InterpolatedDictionary build_interpolated_dictionary(std::vector<SubAtomPtr> generators,
                                                     SeparableGrid grid);

}  // namespace fcomp
