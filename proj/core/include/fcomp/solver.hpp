#pragma once

// Greedy decomposition over (interpolated) factorizable dictionaries.
//
// Four algorithms share one pipeline (select, joint refit, residual update,
// and for the continuous variants a final parameter correction):
//
//   algorithm | atoms per node        | correlations
//   ----------+-----------------------+------------------------------
//   omp       | value atom only       | dense, materialized columns
//   fomp      | value atom only       | factorized, mode by mode
//   comp      | value + L derivatives | dense, materialized columns
//   fcomp     | value + L derivatives | factorized, mode by mode
//
// Dense and factorized paths agree to rounding error; the factorized one never
// builds a full atom when scoring the grid.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fcomp/dictionary.hpp"
#include "fcomp/linalg.hpp"
#include "fcomp/tensor.hpp"

namespace fcomp {

enum class Algorithm { Omp, Fomp, Comp, Fcomp };

std::string_view to_string(Algorithm algo) noexcept;
std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept;

/// Value-only (OMP family) or full Taylor pattern (COMP family).
enum class AtomSet { ValueOnly, Taylor };

/// Raised by select_atom when every node is masked.
class ExhaustedDictionaryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every atom of an interpolated dictionary, materialized as columns of
/// M x (N_1...N_L) matrices, one per interpolation role. Column order follows
/// the grid's flat node index.
class DenseDictionary {
 public:
  explicit DenseDictionary(const InterpolatedDictionary& dict,
                           AtomSet atoms = AtomSet::Taylor);

  const SeparableGrid& grid() const noexcept { return grid_; }
  const Shape& atom_shape() const noexcept { return atom_shape_; }
  std::size_t interp_count() const noexcept { return columns_.size(); }
  std::size_t rank() const noexcept { return grid_.rank(); }

  const Eigen::MatrixXcd& columns(std::size_t role) const { return columns_.at(role); }

  /// Gram of the first node, computed from materialized columns.
  const Eigen::MatrixXcd& gram() const noexcept { return gram_; }
  Eigen::MatrixXcd node_gram(std::size_t flat_node) const;

 private:
  SeparableGrid grid_;
  Shape atom_shape_;
  std::vector<Eigen::MatrixXcd> columns_;
  Eigen::MatrixXcd gram_;
};

/// scores[n] = min_beta || sum_i beta_i A^(i)[n] - R ||_F^2 over the grid.
struct SelectionScoreField {
  Shape shape;
  std::vector<double> scores;

  double at(std::span<const std::size_t> n) const;
};

struct Selection {
  MultiIndex node;
  std::size_t flat_node = 0;
  double score = 0.0;
  SelectionScoreField field;
};

/// Grid nodes excluded from selection (flat indices), one flag per node.
using NodeMask = std::vector<bool>;

struct RefitResult {
  /// One I-vector (or 1-vector for AtomSet::ValueOnly) per selected node.
  std::vector<Eigen::VectorXcd> coefficients;
  bool regularized = false;
  double condition = 1.0;
};

struct Correction {
  Complex amplitude;
  std::vector<double> parameters;
  bool degenerate = false;
};

struct Component {
  Complex amplitude;
  std::vector<double> parameters;
  MultiIndex node;
  Eigen::VectorXcd coefficients;
  bool degenerate = false;
};

struct StageTimings {
  std::int64_t select_ns = 0;
  std::int64_t refit_ns = 0;
  std::int64_t correct_ns = 0;

  std::int64_t total_ns() const noexcept { return select_ns + refit_ns + correct_ns; }
};

struct SparseSolution {
  std::vector<Component> components;
  /// ||R^(k)||_F for k = 1..K+1; the first entry is ||Y||_F.
  std::vector<double> residual_norms;
  ComplexTensor residual;
  StageTimings timing;
  /// Fewer than K components because the dictionary ran out of nodes.
  bool truncated = false;
  /// Some refit needed the Tikhonov fallback.
  bool regularized = false;
};

// --- factorized path -------------------------------------------------------

/// <A^(i)[n], R> for every node n, by chaining mode_inner_products over axes.
ComplexTensor factorized_correlations(const ComplexTensor& residual,
                                      const InterpolatedDictionary& dict, std::size_t role);

/// All roles of the atom set at once, sharing the value-table prefix contractions.
std::vector<ComplexTensor> factorized_correlations(const ComplexTensor& residual,
                                                   const InterpolatedDictionary& dict,
                                                   AtomSet atoms);

SelectionScoreField selection_scores(const ComplexTensor& residual,
                                     const InterpolatedDictionary& dict,
                                     AtomSet atoms = AtomSet::Taylor);

/// Argmin of the score field over unmasked nodes; ties go to the smallest flat index.
Selection select_atom(const ComplexTensor& residual, const InterpolatedDictionary& dict,
                      const NodeMask& mask = {}, AtomSet atoms = AtomSet::Taylor);

/// Least-squares coefficients of Y over the atoms of all selected nodes,
/// via factorized normal equations.
RefitResult joint_refit(const ComplexTensor& y, const InterpolatedDictionary& dict,
                        std::span<const MultiIndex> nodes, AtomSet atoms = AtomSet::Taylor);

ComplexTensor update_residual(const ComplexTensor& y, const InterpolatedDictionary& dict,
                              std::span<const MultiIndex> nodes,
                              std::span<const Eigen::VectorXcd> coefficients);

// --- dense path --------------------------------------------------------------

std::vector<Eigen::VectorXcd> dense_correlations(const ComplexTensor& residual,
                                                 const DenseDictionary& dict, AtomSet atoms);

SelectionScoreField selection_scores(const ComplexTensor& residual, const DenseDictionary& dict,
                                     AtomSet atoms = AtomSet::Taylor);

Selection select_atom(const ComplexTensor& residual, const DenseDictionary& dict,
                      const NodeMask& mask = {}, AtomSet atoms = AtomSet::Taylor);

RefitResult joint_refit(const ComplexTensor& y, const DenseDictionary& dict,
                        std::span<const MultiIndex> nodes, AtomSet atoms = AtomSet::Taylor);

ComplexTensor update_residual(const ComplexTensor& y, const DenseDictionary& dict,
                              std::span<const MultiIndex> nodes,
                              std::span<const Eigen::VectorXcd> coefficients);

// --- correction and drivers --------------------------------------------------

/// Closed-form minimizer of || alpha * C_n(p) - beta ||_2 under the order-1
/// Taylor pattern with real offsets, restricted to the node's Voronoi cell:
/// alpha = beta_1, offset_l = clamp(Re(beta_{l+1} / beta_1), -step_l/2, step_l/2).
/// A one-element beta (value-only fits) yields the node itself.
Correction correct_parameters(const Eigen::VectorXcd& beta, std::span<const std::size_t> node,
                              const SeparableGrid& grid);

SparseSolution fcomp(const ComplexTensor& y, const InterpolatedDictionary& dict, std::size_t k);
SparseSolution fomp(const ComplexTensor& y, const InterpolatedDictionary& dict, std::size_t k);
SparseSolution comp(const ComplexTensor& y, const DenseDictionary& dict, std::size_t k);
SparseSolution omp(const ComplexTensor& y, const DenseDictionary& dict, std::size_t k);

}  // namespace fcomp
