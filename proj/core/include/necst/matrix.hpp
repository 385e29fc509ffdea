#pragma once

#include <cstddef>
#include <vector>

namespace necst {

// Dense row-major matrix of doubles. Rows are contiguous, so per-row
// spans can be handed to kernels directly.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// out = a · b.  a: [m×k], b: [k×n], out: [m×n].
// Parallel over rows of out; each output element is accumulated in a fixed
// k-order by a single thread, so results are identical for any pool size.
void matmul(const Matrix& a, const Matrix& b, Matrix& out);

// out = aᵀ · b.  a: [k×m], b: [k×n], out: [m×n].
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);

// out = a · bᵀ.  a: [m×k], b: [n×k], out: [m×n].
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);

}  // namespace necst
