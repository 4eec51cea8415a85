#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "drobf/linalg.hpp"

namespace drobf {

/// Complex scalar held as an explicit (re, im) pair.
struct Complex {
  double re = 0.0;
  double im = 0.0;

  constexpr Complex() = default;
  constexpr Complex(double r, double i = 0.0) : re(r), im(i) {}

  constexpr Complex conj() const { return {re, -im}; }
  constexpr double norm_sq() const { return re * re + im * im; }
  double abs() const { return std::hypot(re, im); }

  static Complex polar(double magnitude, double phase) {
    return {magnitude * std::cos(phase), magnitude * std::sin(phase)};
  }

  constexpr Complex& operator+=(Complex o) { re += o.re; im += o.im; return *this; }
  constexpr Complex& operator-=(Complex o) { re -= o.re; im -= o.im; return *this; }
  constexpr Complex& operator*=(double s) { re *= s; im *= s; return *this; }
  constexpr bool operator==(const Complex&) const = default;
};

constexpr Complex operator+(Complex a, Complex b) { return {a.re + b.re, a.im + b.im}; }
constexpr Complex operator-(Complex a, Complex b) { return {a.re - b.re, a.im - b.im}; }
constexpr Complex operator-(Complex a) { return {-a.re, -a.im}; }
constexpr Complex operator*(Complex a, Complex b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
constexpr Complex operator*(double s, Complex a) { return {s * a.re, s * a.im}; }
constexpr Complex operator*(Complex a, double s) { return {s * a.re, s * a.im}; }
constexpr Complex operator/(Complex a, double s) { return {a.re / s, a.im / s}; }
inline Complex operator/(Complex a, Complex b) {
  const double d = b.norm_sq();
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}

class ComplexVector {
 public:
  ComplexVector() = default;
  explicit ComplexVector(std::size_t n) : data_(n) {}
  ComplexVector(std::initializer_list<Complex> values) : data_(values) {}
  explicit ComplexVector(std::vector<Complex> values) : data_(std::move(values)) {}

  static ComplexVector unit(std::size_t n, std::size_t k);

  std::size_t size() const { return data_.size(); }
  Complex& operator[](std::size_t i) { return data_[i]; }
  Complex operator[](std::size_t i) const { return data_[i]; }
  const std::vector<Complex>& values() const { return data_; }

  double norm() const;
  double norm_sq() const;
  bool is_finite() const;

  ComplexVector& operator*=(Complex s);
  ComplexVector& operator+=(const ComplexVector& o);
  ComplexVector& operator-=(const ComplexVector& o);

  /// Stacked [Re; Im] real view.
  RealVector to_real() const;
  static ComplexVector from_real(std::span<const double> stacked);

  bool operator==(const ComplexVector&) const = default;

 private:
  std::vector<Complex> data_;
};

ComplexVector operator*(Complex s, ComplexVector v);
ComplexVector operator+(ComplexVector a, const ComplexVector& b);
ComplexVector operator-(ComplexVector a, const ComplexVector& b);

/// aᴴb (conjugate-linear in the first argument).
Complex inner(const ComplexVector& a, const ComplexVector& b);

/// Real symmetric matrix; every write keeps (i, j) and (j, i) identical.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  /// Symmetrizes (M + Mᵀ)/2.
  static SymmetricMatrix from_dense(const Matrix& m);
  static SymmetricMatrix identity(std::size_t n);
  static SymmetricMatrix diagonal(std::span<const double> d);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }

  const std::vector<double>& data() const { return data_; }
  Matrix to_dense() const;

  double trace() const;
  double frobenius_norm() const;

  bool operator==(const SymmetricMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Complex Hermitian matrix. Construction from arbitrary entries applies
/// (M + Mᴴ)/2, so entries(i, j) == conj(entries(j, i)) holds exactly and the
/// diagonal is real.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(std::size_t n) : n_(n), data_(n * n) {}

  static HermitianMatrix from_entries(std::size_t n, std::span<const Complex> row_major);
  static HermitianMatrix identity(std::size_t n);
  static HermitianMatrix diagonal(std::span<const double> d);
  /// a·aᴴ
  static HermitianMatrix outer(const ComplexVector& a);

  std::size_t size() const { return n_; }
  Complex operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  /// Writes (i, j) and its conjugate mirror; a diagonal write keeps only the real part.
  void set(std::size_t i, std::size_t j, Complex v);

  double trace() const;
  double frobenius_norm() const;
  bool is_finite() const;

  /// Real quadratic form wᴴ·H·w.
  double quadratic_form(const ComplexVector& w) const;
  ComplexVector multiply(const ComplexVector& x) const;

  HermitianMatrix& operator+=(const HermitianMatrix& o);
  HermitianMatrix& operator-=(const HermitianMatrix& o);
  HermitianMatrix& operator*=(double s);

  bool operator==(const HermitianMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<Complex> data_;
};

HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b);
HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b);
HermitianMatrix operator*(double s, HermitianMatrix a);

/// [[Re H, −Im H], [Im H, Re H]]; PSD exactly when H is PSD.
SymmetricMatrix embed_real(const HermitianMatrix& h);

/// Isometric vectorization: column-major upper triangle, off-diagonals ×√2.
RealVector svec(const SymmetricMatrix& s);
SymmetricMatrix smat(std::span<const double> v);
constexpr std::size_t svec_dim(std::size_t side) { return side * (side + 1) / 2; }
/// Inverse of svec_dim; throws when dim is not triangular.
std::size_t svec_side(std::size_t dim);

/// Isometric N² real parameterization of a Hermitian matrix: the N diagonal
/// entries, then for each upper pair (i < j) in column-major order the pair
/// (√2·Re H(i,j), √2·Im H(i,j)). ‖vec_herm(H)‖₂ = ‖H‖_F and
/// ⟨vec_herm(A), vec_herm(B)⟩ = trace(AB).
RealVector vec_herm(const HermitianMatrix& h);
HermitianMatrix unvec_herm(std::span<const double> v, std::size_t n);
/// The Hermitian matrix whose vec_herm is the k-th unit vector.
HermitianMatrix herm_basis(std::size_t n, std::size_t k);

/// trace(AB), real for Hermitian A, B.
double herm_inner(const HermitianMatrix& a, const HermitianMatrix& b);

struct SymmetricEigen {
  RealVector values;  // descending
  Matrix vectors;     // orthonormal columns, matching values
  bool converged = false;
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition. Each eigenvector is normalized so that
/// its largest-magnitude component is nonnegative.
SymmetricEigen eig_sym(const SymmetricMatrix& s, int max_sweeps = 60);

/// Householder tridiagonalization followed by implicit QL. Same output
/// conventions as eig_sym; several times faster on the 20 to 30 row blocks
/// the cone projection sees, so that is where it is used.
SymmetricEigen eig_sym_tridiagonal(const SymmetricMatrix& s);

struct HermitianEigen {
  RealVector values;                  // descending
  std::vector<ComplexVector> vectors;  // orthonormal, matching values
  bool converged = false;
};

/// Hermitian eigendecomposition through the real embedding. Each
/// eigenvector's largest-magnitude component is rotated to be real and
/// nonnegative.
HermitianEigen eig_herm(const HermitianMatrix& h);

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clamped to 0).
HermitianMatrix psd_part(const HermitianMatrix& h);

/// Solves H·x = b for Hermitian positive definite H.
ComplexVector solve_hpd(const HermitianMatrix& h, const ComplexVector& b);

}  // namespace drobf
