#pragma once

// Dense complex multiway arrays.
//
// Storage is row-major (last index fastest), so the flat position of the
// 0-based multi-index (m_1, ..., m_L) is
//     m_L + sum_{l<L} m_l * prod_{i>l} M_i,
// which is the usual vectorization of a signal reshaped into a tensor. Reshaping
// between a vector and a tensor therefore never copies or permutes data.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fcomp {

using Complex = std::complex<double>;
using Shape = std::vector<std::size_t>;
using MultiIndex = std::vector<std::size_t>;

/// Product of all extents; 1 for an empty shape.
std::size_t element_count(const Shape& shape);

class ComplexTensor {
 public:
  ComplexTensor() = default;

  /// Zero-filled tensor. Every extent must be positive.
  explicit ComplexTensor(Shape shape);

  /// Takes ownership of `data`; its length must equal the product of extents.
  ComplexTensor(Shape shape, std::vector<Complex> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t mode) const { return shape_.at(mode); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }

  std::size_t flat_index(std::span<const std::size_t> index) const;
  std::size_t flat_index(std::initializer_list<std::size_t> index) const {
    return flat_index(std::span<const std::size_t>(index.begin(), index.size()));
  }
  MultiIndex multi_index(std::size_t flat) const;

  Complex& operator[](std::size_t flat) { return data_[flat]; }
  const Complex& operator[](std::size_t flat) const { return data_[flat]; }

  Complex& operator()(std::initializer_list<std::size_t> index) { return data_[flat_index(index)]; }
  const Complex& operator()(std::initializer_list<std::size_t> index) const {
    return data_[flat_index(index)];
  }
  Complex& at(std::span<const std::size_t> index) { return data_[flat_index(index)]; }
  const Complex& at(std::span<const std::size_t> index) const { return data_[flat_index(index)]; }

  /// this += scale * other (shapes must match).
  ComplexTensor& add_scaled(Complex scale, const ComplexTensor& other);
  ComplexTensor& operator+=(const ComplexTensor& other) { return add_scaled(1.0, other); }
  ComplexTensor& operator-=(const ComplexTensor& other) { return add_scaled(-1.0, other); }
  ComplexTensor& operator*=(Complex scale);

  Eigen::Map<const Eigen::VectorXcd> as_vector() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  friend bool operator==(const ComplexTensor&, const ComplexTensor&) = default;

 private:
  Shape shape_;
  std::vector<Complex> data_;
};

ComplexTensor operator+(ComplexTensor lhs, const ComplexTensor& rhs);
ComplexTensor operator-(ComplexTensor lhs, const ComplexTensor& rhs);
ComplexTensor operator*(Complex scale, ComplexTensor t);

/// Reshape a length-M vector into a tensor of the given shape.
ComplexTensor tensor_from_vector(std::span<const Complex> v, Shape shape);

/// Inverse of tensor_from_vector.
std::vector<Complex> vector_from_tensor(const ComplexTensor& t);

/// psi_1 (x) ... (x) psi_L; element (m_1,...,m_L) = prod_l psi_l[m_l].
ComplexTensor outer_product(std::span<const Eigen::VectorXcd> factors);
ComplexTensor outer_product(std::initializer_list<Eigen::VectorXcd> factors);

double frobenius_norm(const ComplexTensor& t);
double squared_norm(const ComplexTensor& t);

/// <a, b> = sum conj(a) * b.
Complex inner_product(const ComplexTensor& a, const ComplexTensor& b);

/// Contracts mode `mode` of `t` against the columns of `probes` (M_mode x N):
///   out(..., n, ...) = sum_m conj(probes(m, n)) * t(..., m, ...).
/// Chaining this over every mode yields <(x)_l p_l[n_l], t> for every node at once.
ComplexTensor mode_inner_products(const ComplexTensor& t, const Eigen::MatrixXcd& probes,
                                  std::size_t mode);

}  // namespace fcomp
