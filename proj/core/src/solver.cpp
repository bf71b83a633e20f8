#include "fcomp/solver.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace fcomp {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count();
}

std::size_t role_count(AtomSet atoms, std::size_t interp_count) {
  return atoms == AtomSet::ValueOnly ? 1 : interp_count;
}

void check_residual_shape(const ComplexTensor& t, const Shape& atom_shape) {
  if (t.shape() != atom_shape) {
    throw std::invalid_argument("measurement shape does not match dictionary atom shape");
  }
}

void check_distinct(std::span<const MultiIndex> nodes) {
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      if (nodes[a] == nodes[b]) throw std::invalid_argument("selected nodes must be distinct");
    }
  }
}

/// Per-node score ||R||^2 - ||W g_n||^2 with the whitener W of the node Gram.
double node_score(double energy, const Eigen::MatrixXcd& whitener,
                  const std::vector<const Complex*>& fields, std::size_t flat) {
  const Eigen::Index r = whitener.rows();
  double projected = 0.0;
  for (Eigen::Index row = 0; row < r; ++row) {
    Complex acc{};
    for (Eigen::Index col = 0; col <= row; ++col) {
      acc += whitener(row, col) * fields[static_cast<std::size_t>(col)][flat];
    }
    projected += std::norm(acc);
  }
  return std::max(0.0, energy - projected);
}

template <typename NodeGram>
SelectionScoreField score_field(double energy, const Shape& grid_shape,
                                const std::vector<const Complex*>& fields,
                                const Eigen::MatrixXcd& gram, NodeGram&& node_gram) {
  SelectionScoreField out{grid_shape, std::vector<double>(element_count(grid_shape))};
#if FCOMP_PER_NODE_GRAM
  (void)gram;
  for (std::size_t f = 0; f < out.scores.size(); ++f) {
    const HermitianSolver solver(node_gram(f));
    out.scores[f] = node_score(energy, solver.whitener(), fields, f);
  }
#else
  (void)node_gram;
  const HermitianSolver solver(gram);
  for (std::size_t f = 0; f < out.scores.size(); ++f) {
    out.scores[f] = node_score(energy, solver.whitener(), fields, f);
  }
#endif
  return out;
}

Selection argmin_unmasked(SelectionScoreField field, const SeparableGrid& grid, const NodeMask& mask) {
  if (!mask.empty() && mask.size() != field.scores.size()) {
    throw std::invalid_argument("node mask size does not match grid size");
  }
  std::size_t best = field.scores.size();
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < field.scores.size(); ++f) {
    if (!mask.empty() && mask[f]) continue;
    if (best == field.scores.size() || field.scores[f] < best_score) {
      best = f;
      best_score = field.scores[f];
    }
  }
  if (best == field.scores.size()) {
    throw ExhaustedDictionaryError("every grid node is already selected");
  }
  Selection sel;
  sel.node = grid.multi_index(best);
  sel.flat_node = best;
  sel.score = best_score;
  sel.field = std::move(field);
  return sel;
}

RefitResult split_solution(const Eigen::MatrixXcd& normal, const Eigen::VectorXcd& rhs,
                           std::size_t nodes, std::size_t roles) {
  const HermitianSolver solver(normal);
  const Eigen::VectorXcd beta = solver.solve(rhs);
  RefitResult out;
  out.regularized = solver.regularized();
  out.condition = solver.condition();
  out.coefficients.reserve(nodes);
  for (std::size_t a = 0; a < nodes; ++a) {
    out.coefficients.emplace_back(
        beta.segment(static_cast<Eigen::Index>(a * roles), static_cast<Eigen::Index>(roles)));
  }
  return out;
}

void check_coefficients(std::span<const MultiIndex> nodes,
                        std::span<const Eigen::VectorXcd> coefficients, std::size_t max_roles) {
  if (nodes.size() != coefficients.size()) {
    throw std::invalid_argument("one coefficient vector is needed per selected node");
  }
  for (const auto& c : coefficients) {
    if (c.size() == 0 || static_cast<std::size_t>(c.size()) > max_roles) {
      throw std::invalid_argument("coefficient vector length does not match the atom set");
    }
  }
}

/// Shared greedy loop. `select(R, mask)`, `refit(nodes)` and
/// `residual(nodes, coefficients)` bind the path-specific kernels.
template <typename Select, typename Refit, typename Residual>
SparseSolution run_greedy(const ComplexTensor& y, const SeparableGrid& grid, std::size_t k,
                          Select&& select, Refit&& refit, Residual&& residual) {
  if (k == 0) throw std::invalid_argument("number of components K must be at least 1");

  SparseSolution sol;
  sol.residual = y;
  sol.residual_norms.push_back(frobenius_norm(y));

  NodeMask mask(grid.node_count(), false);
  std::vector<MultiIndex> nodes;
  RefitResult fit;

  for (std::size_t iter = 0; iter < k; ++iter) {
    auto t0 = Clock::now();
    Selection sel;
    try {
      sel = select(sol.residual, mask);
    } catch (const ExhaustedDictionaryError&) {
      sol.truncated = true;
      sol.timing.select_ns += elapsed_ns(t0);
      break;
    }
    mask[sel.flat_node] = true;
    nodes.push_back(std::move(sel.node));
    sol.timing.select_ns += elapsed_ns(t0);

    t0 = Clock::now();
    fit = refit(nodes);
    sol.regularized = sol.regularized || fit.regularized;
    sol.residual = residual(nodes, fit.coefficients);
    sol.residual_norms.push_back(frobenius_norm(sol.residual));
    sol.timing.refit_ns += elapsed_ns(t0);
  }

  const auto t0 = Clock::now();
  sol.components.reserve(nodes.size());
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    Correction corr = correct_parameters(fit.coefficients[a], nodes[a], grid);
    Component c;
    c.amplitude = corr.amplitude;
    c.parameters = std::move(corr.parameters);
    c.node = nodes[a];
    c.coefficients = fit.coefficients[a];
    c.degenerate = corr.degenerate;
    sol.components.push_back(std::move(c));
  }
  sol.timing.correct_ns = elapsed_ns(t0);
  return sol;
}

SparseSolution solve_factorized(const ComplexTensor& y, const InterpolatedDictionary& dict,
                                std::size_t k, AtomSet atoms) {
  check_residual_shape(y, dict.atom_shape());
  return run_greedy(
      y, dict.grid(), k,
      [&](const ComplexTensor& r, const NodeMask& mask) { return select_atom(r, dict, mask, atoms); },
      [&](const std::vector<MultiIndex>& nodes) { return joint_refit(y, dict, nodes, atoms); },
      [&](const std::vector<MultiIndex>& nodes, const std::vector<Eigen::VectorXcd>& coeffs) {
        return update_residual(y, dict, nodes, coeffs);
      });
}

SparseSolution solve_dense(const ComplexTensor& y, const DenseDictionary& dict, std::size_t k,
                           AtomSet atoms) {
  check_residual_shape(y, dict.atom_shape());
  if (atoms == AtomSet::Taylor && dict.interp_count() != dict.rank() + 1) {
    throw std::invalid_argument("continuous solvers need a dense dictionary with derivative atoms");
  }
  return run_greedy(
      y, dict.grid(), k,
      [&](const ComplexTensor& r, const NodeMask& mask) { return select_atom(r, dict, mask, atoms); },
      [&](const std::vector<MultiIndex>& nodes) { return joint_refit(y, dict, nodes, atoms); },
      [&](const std::vector<MultiIndex>& nodes, const std::vector<Eigen::VectorXcd>& coeffs) {
        return update_residual(y, dict, nodes, coeffs);
      });
}

}  // namespace

std::string_view to_string(Algorithm algo) noexcept {
  switch (algo) {
    case Algorithm::Omp: return "omp";
    case Algorithm::Fomp: return "fomp";
    case Algorithm::Comp: return "comp";
    case Algorithm::Fcomp: return "fcomp";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept {
  std::string lower;
  for (char ch : name) {
    if (ch == '-' || ch == '_') continue;
    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (lower == "omp") return Algorithm::Omp;
  if (lower == "fomp") return Algorithm::Fomp;
  if (lower == "comp") return Algorithm::Comp;
  if (lower == "fcomp") return Algorithm::Fcomp;
  return std::nullopt;
}

double SelectionScoreField::at(std::span<const std::size_t> n) const {
  if (n.size() != shape.size()) throw std::invalid_argument("node index rank mismatch");
  std::size_t flat = 0;
  for (std::size_t l = 0; l < n.size(); ++l) {
    if (n[l] >= shape[l]) throw std::invalid_argument("node index outside the grid");
    flat = flat * shape[l] + n[l];
  }
  return scores[flat];
}

// --- DenseDictionary -----------------------------------------------------------

DenseDictionary::DenseDictionary(const InterpolatedDictionary& dict, AtomSet atoms)
    : grid_(dict.grid()), atom_shape_(dict.atom_shape()) {
  const std::size_t roles = role_count(atoms, dict.interp_count());
  const auto rows = static_cast<Eigen::Index>(element_count(atom_shape_));
  const std::size_t nodes = grid_.node_count();
  columns_.reserve(roles);
  for (std::size_t i = 0; i < roles; ++i) {
    Eigen::MatrixXcd cols(rows, static_cast<Eigen::Index>(nodes));
    for (std::size_t f = 0; f < nodes; ++f) {
      cols.col(static_cast<Eigen::Index>(f)) = dict.atom(i, grid_.multi_index(f)).as_vector();
    }
    columns_.push_back(std::move(cols));
  }
  gram_ = node_gram(0);
}

Eigen::MatrixXcd DenseDictionary::node_gram(std::size_t flat_node) const {
  const auto r = static_cast<Eigen::Index>(columns_.size());
  const auto f = static_cast<Eigen::Index>(flat_node);
  Eigen::MatrixXcd g(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      g(i, j) = columns_[static_cast<std::size_t>(i)].col(f).dot(
          columns_[static_cast<std::size_t>(j)].col(f));
    }
  }
  return g;
}

// --- factorized path -------------------------------------------------------------

ComplexTensor factorized_correlations(const ComplexTensor& residual,
                                      const InterpolatedDictionary& dict, std::size_t role) {
  if (role >= dict.interp_count()) throw std::invalid_argument("interpolation role out of range");
  check_residual_shape(residual, dict.atom_shape());
  ComplexTensor acc = residual;
  for (std::size_t l = 0; l < dict.rank(); ++l) {
    acc = mode_inner_products(acc, dict.factor_table(role, l), l);
  }
  return acc;
}

std::vector<ComplexTensor> factorized_correlations(const ComplexTensor& residual,
                                                   const InterpolatedDictionary& dict,
                                                   AtomSet atoms) {
  check_residual_shape(residual, dict.atom_shape());
  const std::size_t rank = dict.rank();

  // prefix[l] = residual contracted with value tables on axes 0..l-1.
  std::vector<ComplexTensor> prefix;
  prefix.reserve(rank + 1);
  prefix.push_back(residual);
  for (std::size_t l = 0; l < rank; ++l) {
    prefix.push_back(mode_inner_products(prefix.back(), dict.table(l, Role::Value), l));
  }

  std::vector<ComplexTensor> out;
  out.reserve(role_count(atoms, dict.interp_count()));
  out.push_back(prefix[rank]);
  if (atoms == AtomSet::Taylor) {
    for (std::size_t d = 0; d < rank; ++d) {
      ComplexTensor acc = mode_inner_products(prefix[d], dict.table(d, Role::Derivative), d);
      for (std::size_t l = d + 1; l < rank; ++l) {
        acc = mode_inner_products(acc, dict.table(l, Role::Value), l);
      }
      out.push_back(std::move(acc));
    }
  }
  return out;
}

SelectionScoreField selection_scores(const ComplexTensor& residual,
                                     const InterpolatedDictionary& dict, AtomSet atoms) {
  const std::vector<ComplexTensor> corr = factorized_correlations(residual, dict, atoms);
  std::vector<const Complex*> fields;
  for (const auto& c : corr) fields.push_back(c.data().data());
  const auto r = static_cast<Eigen::Index>(corr.size());
  return score_field(squared_norm(residual), dict.grid().shape(), fields,
                     dict.gram().topLeftCorner(r, r),
                     [&](std::size_t f) -> Eigen::MatrixXcd {
                       return dict.node_gram(dict.grid().multi_index(f)).topLeftCorner(r, r);
                     });
}

Selection select_atom(const ComplexTensor& residual, const InterpolatedDictionary& dict,
                      const NodeMask& mask, AtomSet atoms) {
  return argmin_unmasked(selection_scores(residual, dict, atoms), dict.grid(), mask);
}

RefitResult joint_refit(const ComplexTensor& y, const InterpolatedDictionary& dict,
                        std::span<const MultiIndex> nodes, AtomSet atoms) {
  check_residual_shape(y, dict.atom_shape());
  check_distinct(nodes);
  if (nodes.empty()) return {};
  const std::size_t roles = role_count(atoms, dict.interp_count());
  const auto r = static_cast<Eigen::Index>(roles);
  const auto n = static_cast<Eigen::Index>(nodes.size() * roles);

  Eigen::MatrixXcd normal(n, n);
  Eigen::VectorXcd rhs(n);
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const auto ra = static_cast<Eigen::Index>(a * roles);
    for (std::size_t b = a; b < nodes.size(); ++b) {
      const auto rb = static_cast<Eigen::Index>(b * roles);
      const Eigen::MatrixXcd block = dict.cross_gram(nodes[a], nodes[b]).topLeftCorner(r, r);
      normal.block(ra, rb, r, r) = block;
      if (b != a) normal.block(rb, ra, r, r) = block.adjoint();
    }
    for (std::size_t i = 0; i < roles; ++i) {
      rhs[ra + static_cast<Eigen::Index>(i)] = dict.atom_inner_product(i, nodes[a], y);
    }
  }
  return split_solution(normal, rhs, nodes.size(), roles);
}

ComplexTensor update_residual(const ComplexTensor& y, const InterpolatedDictionary& dict,
                              std::span<const MultiIndex> nodes,
                              std::span<const Eigen::VectorXcd> coefficients) {
  check_residual_shape(y, dict.atom_shape());
  check_coefficients(nodes, coefficients, dict.interp_count());
  ComplexTensor r = y;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (Eigen::Index i = 0; i < coefficients[a].size(); ++i) {
      r.add_scaled(-coefficients[a][i], dict.atom(static_cast<std::size_t>(i), nodes[a]));
    }
  }
  return r;
}

// --- dense path -----------------------------------------------------------------

std::vector<Eigen::VectorXcd> dense_correlations(const ComplexTensor& residual,
                                                 const DenseDictionary& dict, AtomSet atoms) {
  check_residual_shape(residual, dict.atom_shape());
  const std::size_t roles = role_count(atoms, dict.rank() + 1);
  if (roles > dict.interp_count()) {
    throw std::invalid_argument("dense dictionary lacks derivative atoms");
  }
  std::vector<Eigen::VectorXcd> out;
  out.reserve(roles);
  const auto r = residual.as_vector();
  for (std::size_t i = 0; i < roles; ++i) {
    out.emplace_back(dict.columns(i).adjoint() * r);
  }
  return out;
}

SelectionScoreField selection_scores(const ComplexTensor& residual, const DenseDictionary& dict,
                                     AtomSet atoms) {
  const std::vector<Eigen::VectorXcd> corr = dense_correlations(residual, dict, atoms);
  std::vector<const Complex*> fields;
  for (const auto& c : corr) fields.push_back(c.data());
  const auto r = static_cast<Eigen::Index>(corr.size());
  return score_field(squared_norm(residual), dict.grid().shape(), fields,
                     dict.gram().topLeftCorner(r, r), [&](std::size_t f) -> Eigen::MatrixXcd {
                       return dict.node_gram(f).topLeftCorner(r, r);
                     });
}

Selection select_atom(const ComplexTensor& residual, const DenseDictionary& dict,
                      const NodeMask& mask, AtomSet atoms) {
  return argmin_unmasked(selection_scores(residual, dict, atoms), dict.grid(), mask);
}

namespace {

Eigen::MatrixXcd gather_columns(const DenseDictionary& dict, std::span<const MultiIndex> nodes,
                                std::size_t roles) {
  Eigen::MatrixXcd a(static_cast<Eigen::Index>(element_count(dict.atom_shape())),
                     static_cast<Eigen::Index>(nodes.size() * roles));
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto f = static_cast<Eigen::Index>(dict.grid().flat_index(nodes[k]));
    for (std::size_t i = 0; i < roles; ++i) {
      a.col(static_cast<Eigen::Index>(k * roles + i)) = dict.columns(i).col(f);
    }
  }
  return a;
}

}  // namespace

RefitResult joint_refit(const ComplexTensor& y, const DenseDictionary& dict,
                        std::span<const MultiIndex> nodes, AtomSet atoms) {
  check_residual_shape(y, dict.atom_shape());
  check_distinct(nodes);
  if (nodes.empty()) return {};
  const std::size_t roles = role_count(atoms, dict.rank() + 1);
  if (roles > dict.interp_count()) {
    throw std::invalid_argument("dense dictionary lacks derivative atoms");
  }
  const Eigen::MatrixXcd a = gather_columns(dict, nodes, roles);
  const Eigen::MatrixXcd normal = a.adjoint() * a;
  const Eigen::VectorXcd rhs = a.adjoint() * y.as_vector();
  return split_solution(normal, rhs, nodes.size(), roles);
}

ComplexTensor update_residual(const ComplexTensor& y, const DenseDictionary& dict,
                              std::span<const MultiIndex> nodes,
                              std::span<const Eigen::VectorXcd> coefficients) {
  check_residual_shape(y, dict.atom_shape());
  check_coefficients(nodes, coefficients, dict.interp_count());
  ComplexTensor r = y;
  Eigen::Map<Eigen::VectorXcd> rv(r.data().data(), static_cast<Eigen::Index>(r.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto f = static_cast<Eigen::Index>(dict.grid().flat_index(nodes[k]));
    for (Eigen::Index i = 0; i < coefficients[k].size(); ++i) {
      rv -= coefficients[k][i] * dict.columns(static_cast<std::size_t>(i)).col(f);
    }
  }
  return r;
}

// --- correction and drivers -------------------------------------------------------

Correction correct_parameters(const Eigen::VectorXcd& beta, std::span<const std::size_t> node,
                              const SeparableGrid& grid) {
  const std::size_t rank = grid.rank();
  if (beta.size() != 1 && static_cast<std::size_t>(beta.size()) != rank + 1) {
    throw std::invalid_argument("coefficient vector must have 1 or L+1 entries");
  }
  Correction out;
  out.amplitude = beta[0];
  out.parameters = grid.point(node);
  if (beta.size() == 1) return out;

  if (std::abs(beta[0]) < 1e-14 * beta.norm() || beta.norm() == 0.0) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t l = 0; l < rank; ++l) {
    const double half = 0.5 * grid.step(l);
    const double offset = (beta[static_cast<Eigen::Index>(l + 1)] / beta[0]).real();
    out.parameters[l] += std::clamp(offset, -half, half);
  }
  return out;
}

SparseSolution fcomp(const ComplexTensor& y, const InterpolatedDictionary& dict, std::size_t k) {
  return solve_factorized(y, dict, k, AtomSet::Taylor);
}

SparseSolution fomp(const ComplexTensor& y, const InterpolatedDictionary& dict, std::size_t k) {
  return solve_factorized(y, dict, k, AtomSet::ValueOnly);
}

SparseSolution comp(const ComplexTensor& y, const DenseDictionary& dict, std::size_t k) {
  return solve_dense(y, dict, k, AtomSet::Taylor);
}

SparseSolution omp(const ComplexTensor& y, const DenseDictionary& dict, std::size_t k) {
  return solve_dense(y, dict, k, AtomSet::ValueOnly);
}

}  // namespace fcomp
