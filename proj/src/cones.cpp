#include "drobf/cones.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "drobf/hermitian.hpp"

namespace drobf {

std::string to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::Zero: return "zero";
    case ConeKind::Nonneg: return "nonneg";
    case ConeKind::SecondOrder: return "soc";
    case ConeKind::Psd: return "psd";
  }
  return "unknown";
}

ConeSpec::ConeSpec(std::initializer_list<ConeBlock> blocks) {
  for (const auto& b : blocks) add(b);
}

ConeSpec& ConeSpec::add(ConeBlock block) {
  if (block.dim == 0) throw std::invalid_argument("ConeSpec: block dimension must be positive");
  if (block.kind == ConeKind::Psd && block.dim != block.side * (block.side + 1) / 2)
    throw std::invalid_argument("ConeSpec: psd svec dimension inconsistent with side");
  blocks_.push_back(block);
  total_ += block.dim;
  return *this;
}

void project_nonneg(std::span<double> v) {
  for (double& x : v) x = std::max(x, 0.0);
}

void project_second_order(std::span<double> v) {
  const double t = v[0];
  double nu = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) nu += v[i] * v[i];
  nu = std::sqrt(nu);
  if (nu <= t) return;
  if (nu <= -t) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  const double alpha = 0.5 * (t + nu);
  v[0] = alpha;
  const double f = alpha / nu;
  for (std::size_t i = 1; i < v.size(); ++i) v[i] *= f;
}

void project_psd(std::span<double> v) {
  const SymmetricMatrix s = smat(v);
  const std::size_t m = s.size();
  const SymmetricEigen e = eig_sym_tridiagonal(s);
  if (!e.converged) throw std::runtime_error("project_psd: eigendecomposition did not converge");
  if (e.values.back() >= 0.0) return;

  // Reconstruct from the positive eigenpairs only.
  Matrix out(m, m);
  for (std::size_t k = 0; k < m && e.values[k] > 0.0; ++k) {
    const double lam = e.values[k];
    for (std::size_t i = 0; i < m; ++i) {
      const double vi = lam * e.vectors(i, k);
      if (vi == 0.0) continue;
      for (std::size_t j = i; j < m; ++j) out(i, j) += vi * e.vectors(j, k);
    }
  }
  constexpr double kSqrt2 = 1.4142135623730951;
  std::size_t idx = 0;
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i <= j; ++i, ++idx) v[idx] = i == j ? out(i, j) : kSqrt2 * out(i, j);
}

namespace {

void check_dim(std::size_t got, const ConeSpec& cone) {
  if (got != cone.total_dim()) throw std::invalid_argument("cone projection: dimension mismatch");
}

void project_block(std::span<double> v, const ConeBlock& b, bool dual) {
  switch (b.kind) {
    case ConeKind::Zero:
      if (!dual) std::fill(v.begin(), v.end(), 0.0);
      break;
    case ConeKind::Nonneg: project_nonneg(v); break;
    case ConeKind::SecondOrder: project_second_order(v); break;
    case ConeKind::Psd: project_psd(v); break;
  }
}

void project_all(std::span<double> v, const ConeSpec& cone, bool dual) {
  check_dim(v.size(), cone);
  std::size_t off = 0;
  for (const auto& b : cone.blocks()) {
    project_block(v.subspan(off, b.dim), b, dual);
    off += b.dim;
  }
}

}  // namespace

void project_in_place(std::span<double> v, const ConeSpec& cone) { project_all(v, cone, false); }
void project_dual_in_place(std::span<double> v, const ConeSpec& cone) { project_all(v, cone, true); }

RealVector project(std::span<const double> v, const ConeSpec& cone) {
  RealVector out(v.begin(), v.end());
  project_in_place(out, cone);
  return out;
}

RealVector project_dual(std::span<const double> v, const ConeSpec& cone) {
  RealVector out(v.begin(), v.end());
  project_dual_in_place(out, cone);
  return out;
}

double distance(std::span<const double> v, const ConeSpec& cone) {
  RealVector p = project(v, cone);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= v[i];
  return norm2(p);
}

double distance_dual(std::span<const double> v, const ConeSpec& cone) {
  RealVector p = project_dual(v, cone);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= v[i];
  return norm2(p);
}

}  // namespace drobf
