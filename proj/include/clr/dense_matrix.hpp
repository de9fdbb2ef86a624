#ifndef CLR_DENSE_MATRIX_HPP
#define CLR_DENSE_MATRIX_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace clr {

/// Column-major dense matrix of doubles. Values are immutable by convention
/// once handed to a Block or a TiledMatrix; kernels return fresh matrices.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw std::invalid_argument("DenseMatrix: data length != rows*cols");
  }

  static DenseMatrix zeros(std::size_t rows, std::size_t cols) {
    return DenseMatrix(rows, cols);
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[j * rows_ + i];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[j * rows_ + i];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double* col(std::size_t j) { return data_.data() + j * rows_; }
  const double* col(std::size_t j) const { return data_.data() + j * rows_; }

  bool operator==(const DenseMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace clr

#endif  // CLR_DENSE_MATRIX_HPP
