#pragma once

#include <cmath>
#include <random>
#include <stdexcept>

#include "drobf/hermitian.hpp"

namespace testing {

using namespace drobf;

inline std::mt19937_64& rng() {
  static thread_local std::mt19937_64 g(20240611);
  return g;
}

inline double gauss() {
  static thread_local std::normal_distribution<double> d;
  return d(rng());
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline ComplexVector random_vector(std::size_t n) {
  ComplexVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = {gauss(), gauss()};
  return v;
}

inline RealVector random_real(std::size_t n, double scale = 1.0) {
  RealVector v(n);
  for (auto& x : v) x = scale * gauss();
  return v;
}

inline HermitianMatrix random_hermitian(std::size_t n) {
  std::vector<Complex> e(n * n);
  for (auto& z : e) z = {gauss(), gauss()};
  return HermitianMatrix::from_entries(n, e);
}

inline SymmetricMatrix random_symmetric(std::size_t n) {
  SymmetricMatrix s(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) s.set(i, j, gauss());
  return s;
}

/// Sum of `rank` random outer products.
inline HermitianMatrix random_psd(std::size_t n, std::size_t rank) {
  HermitianMatrix h(n);
  for (std::size_t k = 0; k < rank; ++k) h += HermitianMatrix::outer(random_vector(n));
  return h;
}

inline double max_abs_diff(const HermitianMatrix& a, const HermitianMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, (a(i, j) - b(i, j)).abs());
  return m;
}

/// Plain triple-loop trace(AB), independent of the library's herm_inner.
inline double trace_product(const HermitianMatrix& a, const HermitianMatrix& b) {
  double re = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < a.size(); ++k) re += (a(i, k) * b(k, i)).re;
  return re;
}

}  // namespace testing
