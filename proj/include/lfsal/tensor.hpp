#ifndef LFSAL_TENSOR_HPP
#define LFSAL_TENSOR_HPP

#include <Eigen/Core>

#include <functional>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lfsal/errors.hpp"

namespace lfsal {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline Index shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

/// Dense row-major N-D array. Storage is an Eigen column vector so whole-tensor
/// arithmetic can be written as Eigen expressions on `values()`.
template <typename Scalar>
class Tensor {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Tensor() = default;
  explicit Tensor(Shape shape, Scalar fill = Scalar(0))
      : shape_(std::move(shape)), data_(Vector::Constant(shape_size(shape_), fill)) {}
  Tensor(Shape shape, Vector data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_size(shape_) != data_.size()) {
      throw DataError("tensor shape " + shape_string(shape_) + " does not match " +
                      std::to_string(data_.size()) + " values");
    }
  }
  Tensor(Shape shape, std::initializer_list<Scalar> values)
      : Tensor(std::move(shape), Vector(Eigen::Map<const Vector>(values.begin(),
                                                               static_cast<Index>(values.size())))) {}

  const Shape& shape() const noexcept { return shape_; }
  Index rank() const noexcept { return static_cast<Index>(shape_.size()); }
  Index dim(Index i) const { return shape_.at(static_cast<std::size_t>(i)); }
  Index size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.size() == 0; }

  Vector& values() noexcept { return data_; }
  const Vector& values() const noexcept { return data_; }
  Scalar* data() noexcept { return data_.data(); }
  const Scalar* data() const noexcept { return data_.data(); }

  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  // Rank-3 [C,H,W] access, the layout every image-like op uses.
  Scalar& operator()(Index c, Index y, Index x) { return data_[(c * shape_[1] + y) * shape_[2] + x]; }
  Scalar operator()(Index c, Index y, Index x) const {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }
  // Rank-4 [O,I,H,W] access for convolution weights.
  Scalar& operator()(Index o, Index i, Index y, Index x) {
    return data_[((o * shape_[1] + i) * shape_[2] + y) * shape_[3] + x];
  }
  Scalar operator()(Index o, Index i, Index y, Index x) const {
    return data_[((o * shape_[1] + i) * shape_[2] + y) * shape_[3] + x];
  }

  /// View as a rows x cols row-major matrix (rows * cols must equal size()).
  Eigen::Map<RowMajorMatrix> matrix(Index rows, Index cols) { return {data_.data(), rows, cols}; }
  Eigen::Map<const RowMajorMatrix> matrix(Index rows, Index cols) const {
    return {data_.data(), rows, cols};
  }

  void fill(Scalar v) { data_.setConstant(v); }
  void set_zero() { data_.setZero(); }
  bool all_finite() const { return data_.allFinite(); }

  template <typename Other>
  Tensor<Other> cast() const {
    return Tensor<Other>(shape_, data_.template cast<Other>());
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  Vector data_;
};

template <typename Scalar>
void require_rank(const Tensor<Scalar>& t, Index rank, const char* what) {
  if (t.rank() != rank) {
    throw ConfigError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " +
                      shape_string(t.shape()));
  }
}

template <typename Scalar>
void require_finite(const Tensor<Scalar>& t, const char* what) {
  if (!t.all_finite()) throw NumericalError(std::string(what) + ": non-finite values");
}

}  // namespace lfsal

#endif  // LFSAL_TENSOR_HPP
