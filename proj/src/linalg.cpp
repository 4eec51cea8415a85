#include "drobf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drobf {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

RealVector Matrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw std::invalid_argument("Matrix::multiply: dimension mismatch");
  RealVector out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* r = data_.data() + i * cols_;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) acc += r[j] * x[j];
    out[i] = acc;
  }
  return out;
}

RealVector Matrix::multiply_transpose(std::span<const double> y) const {
  if (y.size() != rows_) throw std::invalid_argument("Matrix::multiply_transpose: dimension mismatch");
  RealVector out(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    const double* r = data_.data() + i * cols_;
    for (std::size_t j = 0; j < cols_; ++j) out[j] += r[j] * yi;
  }
  return out;
}

double Matrix::frobenius_norm() const { return norm2(data_); }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product: dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

SparseRows::SparseRows(const Matrix& dense) : rows_(dense.rows()), cols_(dense.cols()) {
  row_start_.reserve(rows_ + 1);
  row_start_.push_back(0);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      const double v = dense(i, j);
      if (v != 0.0) {
        col_index_.push_back(j);
        values_.push_back(v);
      }
    }
    row_start_.push_back(values_.size());
  }
}

void SparseRows::multiply(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < rows_; ++i) {
    double acc = 0.0;
    for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) acc += values_[k] * x[col_index_[k]];
    out[i] = acc;
  }
}

void SparseRows::multiply_transpose(std::span<const double> y, std::span<double> out) const {
  for (std::size_t j = 0; j < cols_; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) out[col_index_[k]] += values_[k] * yi;
  }
}

Matrix SparseRows::gram() const {
  Matrix g(cols_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t p = row_start_[i]; p < row_start_[i + 1]; ++p) {
      const std::size_t cp = col_index_[p];
      const double vp = values_[p];
      for (std::size_t q = row_start_[i]; q < row_start_[i + 1]; ++q) g(cp, col_index_[q]) += vp * values_[q];
    }
  return g;
}

Cholesky::Cholesky(const Matrix& spd) : n_(spd.rows()), lower_(spd.rows() * spd.rows(), 0.0) {
  if (spd.rows() != spd.cols()) throw std::invalid_argument("Cholesky: matrix not square");
  for (std::size_t j = 0; j < n_; ++j) {
    double d = spd(j, j);
    const double* lj = lower_.data() + j * n_;
    for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
    if (!(d > 0.0)) throw std::domain_error("Cholesky: matrix not positive definite");
    const double ljj = std::sqrt(d);
    lower_[j * n_ + j] = ljj;
    for (std::size_t i = j + 1; i < n_; ++i) {
      const double* li = lower_.data() + i * n_;
      double s = spd(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      lower_[i * n_ + j] = s / ljj;
    }
  }
  upper_.assign(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j <= i; ++j) upper_[j * n_ + i] = lower_[i * n_ + j];
}

void Cholesky::solve_in_place(std::span<double> rhs) const {
  if (rhs.size() != n_) throw std::invalid_argument("Cholesky::solve: dimension mismatch");
  for (std::size_t i = 0; i < n_; ++i) {
    const double* li = lower_.data() + i * n_;
    double s = rhs[i];
    for (std::size_t k = 0; k < i; ++k) s -= li[k] * rhs[k];
    rhs[i] = s / li[i];
  }
  for (std::size_t ii = n_; ii-- > 0;) {
    const double* ui = upper_.data() + ii * n_;
    double s = rhs[ii];
    for (std::size_t k = ii + 1; k < n_; ++k) s -= ui[k] * rhs[k];
    rhs[ii] = s / ui[ii];
  }
}

RealVector Cholesky::solve(std::span<const double> rhs) const {
  RealVector x(rhs.begin(), rhs.end());
  solve_in_place(x);
  return x;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace drobf
