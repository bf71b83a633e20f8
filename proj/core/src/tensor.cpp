#include "fcomp/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fcomp {

namespace {

using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_shape(const Shape& shape) {
  for (std::size_t extent : shape) {
    if (extent == 0) {
      throw std::invalid_argument("tensor extents must be positive");
    }
  }
}

}  // namespace

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

ComplexTensor::ComplexTensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(element_count(shape_), Complex{});
}

ComplexTensor::ComplexTensor(Shape shape, std::vector<Complex> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (element_count(shape_) != data_.size()) {
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                " does not match shape element count " +
                                std::to_string(element_count(shape_)));
  }
}

std::size_t ComplexTensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw std::invalid_argument("multi-index rank does not match tensor rank");
  }
  std::size_t flat = 0;
  for (std::size_t mode = 0; mode < shape_.size(); ++mode) {
    if (index[mode] >= shape_[mode]) {
      throw std::out_of_range("multi-index out of range in mode " + std::to_string(mode));
    }
    flat = flat * shape_[mode] + index[mode];
  }
  return flat;
}

MultiIndex ComplexTensor::multi_index(std::size_t flat) const {
  if (flat >= data_.size()) {
    throw std::out_of_range("flat index out of range");
  }
  MultiIndex index(shape_.size());
  for (std::size_t mode = shape_.size(); mode-- > 0;) {
    index[mode] = flat % shape_[mode];
    flat /= shape_[mode];
  }
  return index;
}

ComplexTensor& ComplexTensor::add_scaled(Complex scale, const ComplexTensor& other) {
  if (other.shape_ != shape_) {
    throw std::invalid_argument("tensor shapes differ");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] += scale * other.data_[i];
  }
  return *this;
}

ComplexTensor& ComplexTensor::operator*=(Complex scale) {
  for (auto& x : data_) x *= scale;
  return *this;
}

ComplexTensor operator+(ComplexTensor lhs, const ComplexTensor& rhs) { return lhs += rhs; }
ComplexTensor operator-(ComplexTensor lhs, const ComplexTensor& rhs) { return lhs -= rhs; }
ComplexTensor operator*(Complex scale, ComplexTensor t) { return t *= scale; }

ComplexTensor tensor_from_vector(std::span<const Complex> v, Shape shape) {
  if (shape.empty()) {
    throw std::invalid_argument("tensor shape must have at least one mode");
  }
  return ComplexTensor(std::move(shape), std::vector<Complex>(v.begin(), v.end()));
}

std::vector<Complex> vector_from_tensor(const ComplexTensor& t) {
  return {t.data().begin(), t.data().end()};
}

ComplexTensor outer_product(std::span<const Eigen::VectorXcd> factors) {
  if (factors.empty()) {
    throw std::invalid_argument("outer product needs at least one factor");
  }
  Shape shape;
  shape.reserve(factors.size());
  for (const auto& f : factors) {
    if (f.size() == 0) throw std::invalid_argument("outer product factor is empty");
    shape.push_back(static_cast<std::size_t>(f.size()));
  }

  // Grow the result one mode at a time: out = out (x) factor.
  std::vector<Complex> data(factors[0].data(), factors[0].data() + factors[0].size());
  for (std::size_t mode = 1; mode < factors.size(); ++mode) {
    const auto& f = factors[mode];
    std::vector<Complex> next(data.size() * static_cast<std::size_t>(f.size()));
    std::size_t k = 0;
    for (const Complex& lead : data) {
      for (Eigen::Index m = 0; m < f.size(); ++m) next[k++] = lead * f[m];
    }
    data = std::move(next);
  }
  return ComplexTensor(std::move(shape), std::move(data));
}

ComplexTensor outer_product(std::initializer_list<Eigen::VectorXcd> factors) {
  return outer_product(std::span<const Eigen::VectorXcd>(factors.begin(), factors.size()));
}

double squared_norm(const ComplexTensor& t) {
  double sum = 0.0;
  for (const Complex& x : t.data()) sum += std::norm(x);
  return sum;
}

double frobenius_norm(const ComplexTensor& t) { return std::sqrt(squared_norm(t)); }

Complex inner_product(const ComplexTensor& a, const ComplexTensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("inner product of tensors with different shapes");
  }
  return a.as_vector().dot(b.as_vector());
}

ComplexTensor mode_inner_products(const ComplexTensor& t, const Eigen::MatrixXcd& probes,
                                  std::size_t mode) {
  if (mode >= t.rank()) {
    throw std::invalid_argument("contraction mode " + std::to_string(mode) +
                                " exceeds tensor rank " + std::to_string(t.rank()));
  }
  const std::size_t rows = t.extent(mode);
  if (static_cast<std::size_t>(probes.rows()) != rows) {
    throw std::invalid_argument("probe matrix has " + std::to_string(probes.rows()) +
                                " rows but mode " + std::to_string(mode) + " has extent " +
                                std::to_string(rows));
  }
  if (probes.cols() == 0) {
    throw std::invalid_argument("probe matrix has no columns");
  }
  const std::size_t cols = static_cast<std::size_t>(probes.cols());

  std::size_t outer = 1;
  for (std::size_t i = 0; i < mode; ++i) outer *= t.extent(i);
  std::size_t inner = 1;
  for (std::size_t i = mode + 1; i < t.rank(); ++i) inner *= t.extent(i);

  Shape out_shape = t.shape();
  out_shape[mode] = cols;
  ComplexTensor out(std::move(out_shape));

  const Eigen::MatrixXcd adjoint = probes.adjoint();
  const auto in_idx = static_cast<Eigen::Index>(inner);
  for (std::size_t o = 0; o < outer; ++o) {
    Eigen::Map<const RowMajorMatrix> slice(t.data().data() + o * rows * inner,
                                           static_cast<Eigen::Index>(rows), in_idx);
    Eigen::Map<RowMajorMatrix> dest(out.data().data() + o * cols * inner,
                                    static_cast<Eigen::Index>(cols), in_idx);
    dest.noalias() = adjoint * slice;
  }
  return out;
}

}  // namespace fcomp
