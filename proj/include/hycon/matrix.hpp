#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hycon {

// Dense row-major matrix of doubles. All numerics in this project are double
// precision; vectors are represented as 1xN matrices unless stated otherwise.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative shape");
  }

  static Matrix zeros(int rows, int cols) { return Matrix(rows, cols, 0.0); }

  static Matrix row_vector(const std::vector<double>& v) {
    Matrix m(1, static_cast<int>(v.size()));
    m.data_ = v;
    return m;
  }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Matrix(0, 0);
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int r = 0; r < m.rows_; ++r) {
      if (static_cast<int>(rows[r].size()) != m.cols_)
        throw std::invalid_argument("Matrix::from_rows: ragged rows");
      std::copy(rows[r].begin(), rows[r].end(), m.row_ptr(r));
    }
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int r, int c) {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  double* row_ptr(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row_ptr(int r) const {
    return data_.data() + static_cast<std::size_t>(r) * cols_;
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  bool all_finite() const {
    for (double x : data_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.row_ptr(k);
      double* orow = out.row_ptr(i);
      for (int j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

inline double row_dot(const Matrix& a, int i, const Matrix& b, int j) {
  if (a.cols() != b.cols()) throw std::invalid_argument("row_dot: width mismatch");
  const double* x = a.row_ptr(i);
  const double* y = b.row_ptr(j);
  double s = 0.0;
  for (int c = 0; c < a.cols(); ++c) s += x[c] * y[c];
  return s;
}

inline double row_norm(const Matrix& a, int i) {
  return std::sqrt(row_dot(a, i, a, i));
}

}  // namespace hycon
