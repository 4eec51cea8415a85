#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace drobf {

using RealVector = std::vector<double>;

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix transpose() const;

  RealVector multiply(std::span<const double> x) const;
  RealVector multiply_transpose(std::span<const double> y) const;

  double frobenius_norm() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

/// Compressed-row copy of a dense matrix, used for repeated products.
class SparseRows {
 public:
  SparseRows() = default;
  explicit SparseRows(const Matrix& dense);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }

  void multiply(std::span<const double> x, std::span<double> out) const;
  void multiply_transpose(std::span<const double> y, std::span<double> out) const;
  /// Dense AᵀA.
  Matrix gram() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_start_;
  std::vector<std::size_t> col_index_;
  std::vector<double> values_;
};

/// Cholesky factorization L·Lᵀ of a symmetric positive definite matrix.
class Cholesky {
 public:
  /// Throws std::domain_error when a pivot is not strictly positive.
  explicit Cholesky(const Matrix& spd);

  std::size_t size() const { return n_; }
  void solve_in_place(std::span<double> rhs) const;
  RealVector solve(std::span<const double> rhs) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> lower_;  // row-major L
  std::vector<double> upper_;  // row-major Lᵀ
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

}  // namespace drobf
