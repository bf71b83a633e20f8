#include "fcomp/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fcomp {

ParameterDomain::ParameterDomain(std::vector<Interval> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw std::invalid_argument("parameter domain needs at least one axis");
  for (const auto& a : axes_) {
    if (!(a.lo < a.hi)) throw std::invalid_argument("parameter interval must satisfy lo < hi");
  }
}

bool ParameterDomain::contains(std::span<const double> p) const {
  if (p.size() != axes_.size()) return false;
  for (std::size_t l = 0; l < p.size(); ++l) {
    if (!axes_[l].contains(p[l])) return false;
  }
  return true;
}

SeparableGrid::SeparableGrid(std::vector<std::vector<double>> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw std::invalid_argument("grid needs at least one axis");
  for (std::size_t l = 0; l < nodes_.size(); ++l) {
    const auto& axis = nodes_[l];
    if (axis.size() < 2) {
      throw std::invalid_argument("grid axis " + std::to_string(l) + " needs at least two nodes");
    }
    const double step = (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1);
    if (!(step > 0.0)) {
      throw std::invalid_argument("grid axis " + std::to_string(l) + " is not increasing");
    }
    // Relative spacing tolerance plus the rounding of the node values themselves.
    const double magnitude = std::max(std::abs(axis.front()), std::abs(axis.back()));
    const double tol = 1e-12 * step + 8.0 * std::numeric_limits<double>::epsilon() * magnitude;
    for (std::size_t n = 1; n < axis.size(); ++n) {
      const double d = axis[n] - axis[n - 1];
      if (!(d > 0.0) || std::abs(d - step) > tol) {
        throw std::invalid_argument("grid axis " + std::to_string(l) +
                                    " is not uniformly spaced and strictly increasing");
      }
    }
    steps_.push_back(step);
    shape_.push_back(axis.size());
  }
}

SeparableGrid SeparableGrid::uniform(const ParameterDomain& domain,
                                     std::span<const std::size_t> counts) {
  if (counts.size() != domain.rank()) {
    throw std::invalid_argument("grid count list does not match domain rank");
  }
  std::vector<std::vector<double>> nodes(counts.size());
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l] < 2) throw std::invalid_argument("grid axes need at least two nodes");
    const auto& axis = domain.axis(l);
    const double step = axis.width() / static_cast<double>(counts[l]);
    nodes[l].resize(counts[l]);
    for (std::size_t n = 0; n < counts[l]; ++n) {
      nodes[l][n] = axis.lo + (static_cast<double>(n) + 0.5) * step;
    }
  }
  return SeparableGrid(std::move(nodes));
}

std::size_t SeparableGrid::flat_index(std::span<const std::size_t> n) const {
  if (n.size() != rank()) throw std::invalid_argument("node index rank mismatch");
  std::size_t flat = 0;
  for (std::size_t l = 0; l < n.size(); ++l) {
    if (n[l] >= shape_[l]) throw std::invalid_argument("node index outside the grid");
    flat = flat * shape_[l] + n[l];
  }
  return flat;
}

MultiIndex SeparableGrid::multi_index(std::size_t flat) const {
  if (flat >= node_count()) throw std::invalid_argument("flat node index outside the grid");
  MultiIndex n(rank());
  for (std::size_t l = rank(); l-- > 0;) {
    n[l] = flat % shape_[l];
    flat /= shape_[l];
  }
  return n;
}

std::vector<double> SeparableGrid::point(std::span<const std::size_t> n) const {
  if (n.size() != rank()) throw std::invalid_argument("node index rank mismatch");
  std::vector<double> p(rank());
  for (std::size_t l = 0; l < rank(); ++l) {
    if (n[l] >= shape_[l]) throw std::invalid_argument("node index outside the grid");
    p[l] = nodes_[l][n[l]];
  }
  return p;
}

MultiIndex SeparableGrid::nearest_node(std::span<const double> p) const {
  if (p.size() != rank()) throw std::invalid_argument("parameter rank mismatch");
  MultiIndex n(rank());
  for (std::size_t l = 0; l < rank(); ++l) {
    const double k = std::round((p[l] - nodes_[l].front()) / steps_[l]);
    n[l] = static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(shape_[l] - 1)));
  }
  return n;
}

ExponentialSubAtom::ExponentialSubAtom(std::size_t length, double rate)
    : length_(length), rate_(rate) {
  if (length_ == 0) throw std::invalid_argument("sub-atom length must be positive");
}

Eigen::VectorXcd ExponentialSubAtom::value(double p) const {
  const auto centre = static_cast<double>(length_ / 2);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(length_));
  for (std::size_t m = 0; m < length_; ++m) {
    v[static_cast<Eigen::Index>(m)] = std::polar(1.0, -rate_ * p * (static_cast<double>(m) - centre));
  }
  return v;
}

Eigen::VectorXcd ExponentialSubAtom::derivative(double p) const {
  const auto centre = static_cast<double>(length_ / 2);
  Eigen::VectorXcd v = value(p);
  for (std::size_t m = 0; m < length_; ++m) {
    v[static_cast<Eigen::Index>(m)] *= Complex(0.0, -rate_ * (static_cast<double>(m) - centre));
  }
  return v;
}

ComplexTensor exact_atom(std::span<const SubAtomPtr> generators, std::span<const double> p) {
  if (generators.size() != p.size()) {
    throw std::invalid_argument("parameter rank does not match generator count");
  }
  std::vector<Eigen::VectorXcd> factors;
  factors.reserve(p.size());
  for (std::size_t l = 0; l < p.size(); ++l) factors.push_back(generators[l]->value(p[l]));
  return outer_product(factors);
}

InterpolatedDictionary::InterpolatedDictionary(std::vector<SubAtomPtr> generators, SeparableGrid grid)
    : generators_(std::move(generators)), grid_(std::move(grid)) {
  if (generators_.size() != grid_.rank()) {
    throw std::invalid_argument("need one sub-atom generator per grid axis (" +
                                std::to_string(generators_.size()) + " generators, " +
                                std::to_string(grid_.rank()) + " axes)");
  }
  for (std::size_t l = 0; l < generators_.size(); ++l) {
    if (!generators_[l]) throw std::invalid_argument("null sub-atom generator");
    const auto rows = static_cast<Eigen::Index>(generators_[l]->length());
    const auto cols = static_cast<Eigen::Index>(grid_.count(l));
    Eigen::MatrixXcd val(rows, cols);
    Eigen::MatrixXcd der(rows, cols);
    for (Eigen::Index n = 0; n < cols; ++n) {
      const double w = grid_.node(l, static_cast<std::size_t>(n));
      val.col(n) = generators_[l]->value(w);
      der.col(n) = generators_[l]->derivative(w);
    }
    atom_shape_.push_back(static_cast<std::size_t>(rows));
    values_.push_back(std::move(val));
    derivatives_.push_back(std::move(der));
  }
  const MultiIndex first(rank(), 0);
  gram_ = node_gram(first);
}

const Eigen::MatrixXcd& InterpolatedDictionary::table(std::size_t axis, Role role) const {
  return role == Role::Value ? values_.at(axis) : derivatives_.at(axis);
}

void InterpolatedDictionary::check_node(std::span<const std::size_t> n) const {
  if (n.size() != rank()) throw std::invalid_argument("node index rank mismatch");
  for (std::size_t l = 0; l < n.size(); ++l) {
    if (n[l] >= grid_.count(l)) throw std::invalid_argument("node index outside the grid");
  }
}

ComplexTensor InterpolatedDictionary::atom(std::size_t i, std::span<const std::size_t> n) const {
  if (i >= interp_count()) throw std::invalid_argument("interpolation role out of range");
  check_node(n);
  std::vector<Eigen::VectorXcd> factors;
  factors.reserve(rank());
  for (std::size_t l = 0; l < rank(); ++l) {
    factors.emplace_back(factor_table(i, l).col(static_cast<Eigen::Index>(n[l])));
  }
  return outer_product(factors);
}

Complex InterpolatedDictionary::atom_inner_product(std::size_t i, std::span<const std::size_t> n,
                                                   const ComplexTensor& t) const {
  if (i >= interp_count()) throw std::invalid_argument("interpolation role out of range");
  check_node(n);
  if (t.shape() != atom_shape_) throw std::invalid_argument("tensor shape does not match atoms");
  ComplexTensor acc = t;
  for (std::size_t l = 0; l < rank(); ++l) {
    const Eigen::MatrixXcd probe = factor_table(i, l).col(static_cast<Eigen::Index>(n[l]));
    acc = mode_inner_products(acc, probe, l);
  }
  return acc[0];
}

Eigen::MatrixXcd InterpolatedDictionary::node_gram(std::span<const std::size_t> n) const {
  return cross_gram(n, n);
}

Eigen::MatrixXcd InterpolatedDictionary::cross_gram(std::span<const std::size_t> a,
                                                    std::span<const std::size_t> b) const {
  check_node(a);
  check_node(b);
  const std::size_t count = interp_count();
  // Per axis, the 2x2 table of <psi^(r), psi^(s)> for roles r, s in {value, derivative}.
  std::vector<Eigen::Matrix2cd> axis_products(rank());
  for (std::size_t l = 0; l < rank(); ++l) {
    const auto ca = static_cast<Eigen::Index>(a[l]);
    const auto cb = static_cast<Eigen::Index>(b[l]);
    const auto va = values_[l].col(ca);
    const auto da = derivatives_[l].col(ca);
    const auto vb = values_[l].col(cb);
    const auto db = derivatives_[l].col(cb);
    axis_products[l] << va.dot(vb), va.dot(db), da.dot(vb), da.dot(db);
  }
  Eigen::MatrixXcd g(count, count);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      Complex prod = 1.0;
      for (std::size_t l = 0; l < rank(); ++l) {
        const int r = role_of(i, l) == Role::Derivative ? 1 : 0;
        const int s = role_of(j, l) == Role::Derivative ? 1 : 0;
        prod *= axis_products[l](r, s);
      }
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = prod;
    }
  }
  return g;
}

double InterpolatedDictionary::atom_norm(std::size_t i) const {
  if (i >= interp_count()) throw std::invalid_argument("interpolation role out of range");
  return std::sqrt(gram_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real());
}

Eigen::VectorXcd InterpolatedDictionary::coefficient_function(std::span<const std::size_t> n,
                                                              std::span<const double> p) const {
  check_node(n);
  if (p.size() != rank()) throw std::invalid_argument("parameter rank mismatch");
  Eigen::VectorXcd c(static_cast<Eigen::Index>(interp_count()));
  c[0] = 1.0;
  for (std::size_t l = 0; l < rank(); ++l) {
    c[static_cast<Eigen::Index>(l + 1)] = p[l] - grid_.node(l, n[l]);
  }
  return c;
}

ComplexTensor InterpolatedDictionary::interpolate_atom(std::span<const std::size_t> n,
                                                       std::span<const double> p) const {
  const Eigen::VectorXcd c = coefficient_function(n, p);
  ComplexTensor out = atom(0, n);
  for (std::size_t i = 1; i < interp_count(); ++i) {
    const Complex ci = c[static_cast<Eigen::Index>(i)];
    if (ci != Complex{}) out.add_scaled(ci, atom(i, n));
  }
  return out;
}

InterpolatedDictionary build_interpolated_dictionary(std::vector<SubAtomPtr> generators,
                                                     SeparableGrid grid) {
  return InterpolatedDictionary(std::move(generators), std::move(grid));
}

}  // namespace fcomp
