#include "drobf/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace drobf {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

// ---------------------------------------------------------------- vectors

ComplexVector ComplexVector::unit(std::size_t n, std::size_t k) {
  ComplexVector v(n);
  v[k] = 1.0;
  return v;
}

double ComplexVector::norm_sq() const {
  double s = 0.0;
  for (const auto& z : data_) s += z.norm_sq();
  return s;
}

double ComplexVector::norm() const { return std::sqrt(norm_sq()); }

bool ComplexVector::is_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](Complex z) { return std::isfinite(z.re) && std::isfinite(z.im); });
}

ComplexVector& ComplexVector::operator*=(Complex s) {
  for (auto& z : data_) z = s * z;
  return *this;
}

ComplexVector& ComplexVector::operator+=(const ComplexVector& o) {
  require_same_size(size(), o.size(), "ComplexVector +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComplexVector& ComplexVector::operator-=(const ComplexVector& o) {
  require_same_size(size(), o.size(), "ComplexVector -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

RealVector ComplexVector::to_real() const {
  const std::size_t n = data_.size();
  RealVector r(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = data_[i].re;
    r[n + i] = data_[i].im;
  }
  return r;
}

ComplexVector ComplexVector::from_real(std::span<const double> stacked) {
  if (stacked.size() % 2 != 0) throw std::invalid_argument("ComplexVector::from_real: odd length");
  const std::size_t n = stacked.size() / 2;
  ComplexVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = {stacked[i], stacked[n + i]};
  return v;
}

ComplexVector operator*(Complex s, ComplexVector v) { return v *= s; }
ComplexVector operator+(ComplexVector a, const ComplexVector& b) { return a += b; }
ComplexVector operator-(ComplexVector a, const ComplexVector& b) { return a -= b; }

Complex inner(const ComplexVector& a, const ComplexVector& b) {
  require_same_size(a.size(), b.size(), "inner");
  Complex acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i].conj() * b[i];
  return acc;
}

// ---------------------------------------------------------------- symmetric

SymmetricMatrix SymmetricMatrix::from_dense(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SymmetricMatrix: not square");
  SymmetricMatrix s(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j) s.set(i, j, 0.5 * (m(i, j) + m(j, i)));
  return s;
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t n) {
  SymmetricMatrix s(n);
  for (std::size_t i = 0; i < n; ++i) s.set(i, i, 1.0);
  return s;
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> d) {
  SymmetricMatrix s(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) s.set(i, i, d[i]);
  return s;
}

Matrix SymmetricMatrix::to_dense() const {
  Matrix m(n_, n_);
  m.data() = data_;
  return m;
}

double SymmetricMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += data_[i * n_ + i];
  return t;
}

double SymmetricMatrix::frobenius_norm() const { return norm2(data_); }

// ---------------------------------------------------------------- hermitian

HermitianMatrix HermitianMatrix::from_entries(std::size_t n, std::span<const Complex> row_major) {
  if (row_major.size() != n * n) throw std::invalid_argument("HermitianMatrix: expected n*n entries");
  HermitianMatrix h(n);
  for (std::size_t i = 0; i < n; ++i) {
    h.data_[i * n + i] = {row_major[i * n + i].re, 0.0};
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex v = 0.5 * (row_major[i * n + j] + row_major[j * n + i].conj());
      h.data_[i * n + j] = v;
      h.data_[j * n + i] = v.conj();
    }
  }
  return h;
}

HermitianMatrix HermitianMatrix::identity(std::size_t n) {
  HermitianMatrix h(n);
  for (std::size_t i = 0; i < n; ++i) h.data_[i * n + i] = 1.0;
  return h;
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> d) {
  HermitianMatrix h(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) h.data_[i * d.size() + i] = d[i];
  return h;
}

HermitianMatrix HermitianMatrix::outer(const ComplexVector& a) {
  const std::size_t n = a.size();
  HermitianMatrix h(n);
  for (std::size_t i = 0; i < n; ++i) {
    h.data_[i * n + i] = a[i].norm_sq();
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex v = a[i] * a[j].conj();
      h.data_[i * n + j] = v;
      h.data_[j * n + i] = v.conj();
    }
  }
  return h;
}

void HermitianMatrix::set(std::size_t i, std::size_t j, Complex v) {
  if (i == j) {
    data_[i * n_ + i] = {v.re, 0.0};
    return;
  }
  data_[i * n_ + j] = v;
  data_[j * n_ + i] = v.conj();
}

double HermitianMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += data_[i * n_ + i].re;
  return t;
}

double HermitianMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& z : data_) s += z.norm_sq();
  return std::sqrt(s);
}

bool HermitianMatrix::is_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](Complex z) { return std::isfinite(z.re) && std::isfinite(z.im); });
}

double HermitianMatrix::quadratic_form(const ComplexVector& w) const {
  require_same_size(n_, w.size(), "quadratic_form");
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    acc += data_[i * n_ + i].re * w[i].norm_sq();
    for (std::size_t j = i + 1; j < n_; ++j) acc += 2.0 * (w[i].conj() * data_[i * n_ + j] * w[j]).re;
  }
  return acc;
}

ComplexVector HermitianMatrix::multiply(const ComplexVector& x) const {
  require_same_size(n_, x.size(), "HermitianMatrix::multiply");
  ComplexVector y(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    Complex acc;
    for (std::size_t j = 0; j < n_; ++j) acc += data_[i * n_ + j] * x[j];
    y[i] = acc;
  }
  return y;
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& o) {
  require_same_size(n_, o.n_, "HermitianMatrix +=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

HermitianMatrix& HermitianMatrix::operator-=(const HermitianMatrix& o) {
  require_same_size(n_, o.n_, "HermitianMatrix -=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double s) {
  for (auto& z : data_) z *= s;
  return *this;
}

HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }

// ---------------------------------------------------------------- maps

SymmetricMatrix embed_real(const HermitianMatrix& h) {
  const std::size_t n = h.size();
  SymmetricMatrix t(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const Complex z = h(i, j);
      t.set(i, j, z.re);
      t.set(n + i, n + j, z.re);
      // lower-left block is Im H; upper-right is −Im H = (Im H)ᵀ
      t.set(n + i, j, z.im);
      t.set(n + j, i, -z.im);
    }
  }
  return t;
}

RealVector svec(const SymmetricMatrix& s) {
  const std::size_t m = s.size();
  RealVector v;
  v.reserve(svec_dim(m));
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i <= j; ++i) v.push_back(i == j ? s(i, j) : kSqrt2 * s(i, j));
  return v;
}

std::size_t svec_side(std::size_t dim) {
  const auto side = static_cast<std::size_t>(std::lround((std::sqrt(8.0 * double(dim) + 1.0) - 1.0) / 2.0));
  if (svec_dim(side) != dim) throw std::invalid_argument("svec: length is not triangular");
  return side;
}

SymmetricMatrix smat(std::span<const double> v) {
  const std::size_t m = svec_side(v.size());
  SymmetricMatrix s(m);
  std::size_t k = 0;
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i <= j; ++i, ++k) s.set(i, j, i == j ? v[k] : v[k] / kSqrt2);
  return s;
}

RealVector vec_herm(const HermitianMatrix& h) {
  const std::size_t n = h.size();
  RealVector v;
  v.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) v.push_back(h(i, i).re);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i) {
      v.push_back(kSqrt2 * h(i, j).re);
      v.push_back(kSqrt2 * h(i, j).im);
    }
  return v;
}

HermitianMatrix unvec_herm(std::span<const double> v, std::size_t n) {
  if (v.size() != n * n) throw std::invalid_argument("unvec_herm: expected n*n values");
  HermitianMatrix h(n);
  for (std::size_t i = 0; i < n; ++i) h.set(i, i, v[i]);
  std::size_t k = n;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i, k += 2) h.set(i, j, {v[k] / kSqrt2, v[k + 1] / kSqrt2});
  return h;
}

HermitianMatrix herm_basis(std::size_t n, std::size_t k) {
  RealVector e(n * n, 0.0);
  e.at(k) = 1.0;
  return unvec_herm(e, n);
}

double herm_inner(const HermitianMatrix& a, const HermitianMatrix& b) {
  require_same_size(a.size(), b.size(), "herm_inner");
  const std::size_t n = a.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += a(i, i).re * b(i, i).re;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex x = a(i, j), y = b(i, j);
      acc += 2.0 * (x.re * y.re + x.im * y.im);
    }
  }
  return acc;
}

// ---------------------------------------------------------------- eigen

namespace {

// Sorts eigenpairs descending and flips each eigenvector so its
// largest-magnitude component is nonnegative. vecs is row-major with the
// eigenvectors in columns.
void sort_and_orient(const RealVector& values, const std::vector<double>& vecs, SymmetricEigen& out) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] > values[j]; });

  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = values[src];
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t r = 0; r < n; ++r)
      if (std::abs(vecs[r * n + src]) > best + 1e-14) {
        best = std::abs(vecs[r * n + src]);
        arg = r;
      }
    const double sign = vecs[arg * n + src] < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = sign * vecs[r * n + src];
  }
}

}  // namespace

SymmetricEigen eig_sym(const SymmetricMatrix& s, int max_sweeps) {
  const std::size_t n = s.size();
  std::vector<double> a = s.data();
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  for (double x : a)
    if (!std::isfinite(x)) throw std::invalid_argument("eig_sym: non-finite input");

  const double scale = s.frobenius_norm();
  const double eps = std::numeric_limits<double>::epsilon();
  SymmetricEigen out;

  auto off_norm_sq = [&] {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    return off;
  };

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_norm_sq() <= (eps * scale) * (eps * scale) * 0.25 || scale == 0.0) {
      out.converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        // below roundoff of both diagonal entries: drop instead of rotating
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
          a[p * n + q] = 0.0;
          a[q * n + p] = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;

        a[p * n + p] = app - t * apq;
        a[q * n + q] = aqq + t * apq;
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a[r * n + p];
          const double arq = a[r * n + q];
          const double np = c * arp - sn * arq;
          const double nq = sn * arp + c * arq;
          a[r * n + p] = np;
          a[p * n + r] = np;
          a[r * n + q] = nq;
          a[q * n + r] = nq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v[r * n + p];
          const double vrq = v[r * n + q];
          v[r * n + p] = c * vrp - sn * vrq;
          v[r * n + q] = sn * vrp + c * vrq;
        }
      }
    }
  }
  out.sweeps = sweep;
  RealVector diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a[i * n + i];
  sort_and_orient(diag, v, out);
  return out;
}

SymmetricEigen eig_sym_tridiagonal(const SymmetricMatrix& s) {
  const std::size_t n = s.size();
  for (double x : s.data())
    if (!std::isfinite(x)) throw std::invalid_argument("eig_sym_tridiagonal: non-finite input");
  SymmetricEigen out;
  if (n == 0) {
    out.converged = true;
    return out;
  }

  std::vector<double> v = s.data();
  RealVector d(n), e(n);
  auto V = [&](std::size_t i, std::size_t j) -> double& { return v[i * n + j]; };

  // Householder reduction to tridiagonal form, accumulating the transform in V.
  for (std::size_t j = 0; j < n; ++j) d[j] = V(n - 1, j);
  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0, h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
        V(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = f > 0.0 ? -std::sqrt(h) : std::sqrt(h);
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        V(j, i) = f;
        g = e[j] + V(j, j) * f;
        for (std::size_t k = j + 1; k < i; ++k) {
          g += V(k, j) * d[k];
          e[k] += V(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k < i; ++k) V(k, j) -= f * e[k] + g * d[k];
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
      }
    }
    d[i] = h;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    V(n - 1, i) = V(i, i);
    V(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = V(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += V(k, i + 1) * V(k, j);
        for (std::size_t k = 0; k <= i; ++k) V(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = V(n - 1, j);
    V(n - 1, j) = 0.0;
  }
  V(n - 1, n - 1) = 1.0;
  e[0] = 0.0;

  // Implicit QL iterations on the tridiagonal matrix.
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  double f = 0.0, tst1 = 0.0;
  constexpr int kMaxIters = 60;
  out.converged = true;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n - 1 && std::abs(e[m]) > eps * tst1) ++m;
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > kMaxIters) {
          out.converged = false;
          break;
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double sn = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = sn;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = sn * r;
          sn = e[ii] / r;
          c = p / r;
          p = c * d[ii] - sn * g;
          d[ii + 1] = h + sn * (c * g + sn * d[ii]);
          for (std::size_t k = 0; k < n; ++k) {
            h = V(k, ii + 1);
            V(k, ii + 1) = sn * V(k, ii) + c * h;
            V(k, ii) = c * V(k, ii) - sn * h;
          }
        }
        p = -sn * s2 * c3 * el1 * e[l] / dl1;
        e[l] = sn * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }

  sort_and_orient(d, v, out);
  return out;
}

HermitianEigen eig_herm(const HermitianMatrix& h) {
  const std::size_t n = h.size();
  const SymmetricEigen e = eig_sym(embed_real(h));
  HermitianEigen out;
  out.converged = e.converged;

  // Each eigenvalue of H appears twice in the embedding, with eigenvectors
  // [u; v] and [−v; u] that both map to the same complex direction up to a
  // phase. Gram–Schmidt against accepted vectors discards the partner.
  for (std::size_t k = 0; k < 2 * n && out.vectors.size() < n; ++k) {
    ComplexVector z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = {e.vectors(i, k), e.vectors(n + i, k)};
    for (const auto& q : out.vectors) {
      const Complex c = inner(q, z);
      for (std::size_t i = 0; i < n; ++i) z[i] -= c * q[i];
    }
    const double nz = z.norm();
    if (nz < 0.5) continue;
    z *= Complex(1.0 / nz);

    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (z[i].abs() > z[arg].abs() + 1e-14) arg = i;
    const double mag = z[arg].abs();
    if (mag > 0.0) z *= z[arg].conj() / mag;
    z[arg].im = 0.0;

    out.values.push_back(e.values[k]);
    out.vectors.push_back(std::move(z));
  }
  return out;
}

HermitianMatrix psd_part(const HermitianMatrix& h) {
  const HermitianEigen e = eig_herm(h);
  if (e.values.back() >= 0.0) return h;
  HermitianMatrix out(h.size());
  for (std::size_t k = 0; k < e.values.size() && e.values[k] > 0.0; ++k)
    out += e.values[k] * HermitianMatrix::outer(e.vectors[k]);
  return out;
}

ComplexVector solve_hpd(const HermitianMatrix& h, const ComplexVector& b) {
  require_same_size(h.size(), b.size(), "solve_hpd");
  const Cholesky chol(embed_real(h).to_dense());
  RealVector rhs = b.to_real();
  chol.solve_in_place(rhs);
  return ComplexVector::from_real(rhs);
}

}  // namespace drobf
