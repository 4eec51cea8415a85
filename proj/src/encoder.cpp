#include "drobf/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drobf {

namespace {

double min_eigenvalue(const HermitianMatrix& h) {
  const SymmetricEigen e = eig_sym(embed_real(h));
  return e.values.back();
}

/// Bordered (N+1) Hermitian matrix [[top, border], [borderᴴ, corner]].
HermitianMatrix bordered(const HermitianMatrix& top, const ComplexVector& border, double corner) {
  const std::size_t n = top.size();
  HermitianMatrix m(n + 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m.set(i, j, top(i, j));
  for (std::size_t i = 0; i < n; ++i) m.set(i, n, border[i]);
  m.set(n, n, corner);
  return m;
}

/// Writes −svec(embed_real(contribution)) into column `col` of the rows
/// starting at `row0`: the slack of a PSD row block is the matrix itself.
void put_psd_column(Matrix& A, std::size_t row0, std::size_t col, const HermitianMatrix& contribution) {
  const RealVector v = svec(embed_real(contribution));
  for (std::size_t k = 0; k < v.size(); ++k) A(row0 + k, col) = -v[k];
}

EncodedProgram build(const BeamformerProblem& p_in, const HermitianMatrix* Wk, bool quad) {
  p_in.validate();
  BeamformerProblem p = p_in;
  p.Sigma = repair_covariance(p.Sigma);

  const std::size_t n = p.size();
  const std::size_t nn = n * n;
  DroLayout L{n, quad};

  if (quad) {
    if (!p.quad_support) throw std::invalid_argument("build_quadratic_support: problem has no quadratic support");
    const auto& qs = *p.quad_support;
    if (qs.Q.size() != n || qs.q.size() != n)
      throw std::invalid_argument("build_quadratic_support: support data has wrong dimension");
    if (!(slater_value(qs) < 0.0))
      throw std::invalid_argument("build_quadratic_support: support set has no strictly interior point");
  }

  ConeSpec cone;
  cone.add(ConeBlock::second_order(1 + nn));
  cone.add(ConeBlock::second_order(1 + nn));
  cone.add(ConeBlock::nonneg(1));
  if (quad) cone.add(ConeBlock::nonneg(1));
  cone.add(ConeBlock::psd(2 * (n + 1)));
  cone.add(ConeBlock::psd(2 * n));
  cone.add(ConeBlock::psd(2 * n));

  const std::size_t rows = cone.total_dim();
  const std::size_t cols = L.size();
  EncodedProgram enc;
  enc.layout = L;
  ConicProgram& prog = enc.program;
  prog.cone = cone;
  prog.A = Matrix(rows, cols);
  prog.b.assign(rows, 0.0);
  prog.c.assign(cols, 0.0);
  Matrix& A = prog.A;

  std::size_t row = 0;
  // (a) (t1, vecH(X)) ∈ SOC
  A(row, L.t1()) = -1.0;
  for (std::size_t k = 0; k < nn; ++k) A(row + 1 + k, L.X() + k) = -1.0;
  row += 1 + nn;
  // (b) (t2, vecH(W + X + Y)) ∈ SOC
  A(row, L.t2()) = -1.0;
  for (std::size_t k = 0; k < nn; ++k) {
    A(row + 1 + k, L.W() + k) = -1.0;
    A(row + 1 + k, L.X() + k) = -1.0;
    A(row + 1 + k, L.Y() + k) = -1.0;
  }
  row += 1 + nn;
  // (c) x + Re(a0ᴴx) + tr(Z·B) − 1 ≥ 0, B = Σ + a0a0ᴴ
  {
    const RealVector vb = vec_herm(p.Sigma + HermitianMatrix::outer(p.a0));
    A(row, L.x_scalar()) = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      A(row, L.x_re() + i) = -p.a0[i].re;
      A(row, L.x_im() + i) = -p.a0[i].im;
    }
    for (std::size_t k = 0; k < nn; ++k) A(row, L.Z() + k) = -vb[k];
    prog.b[row] = -1.0;
    row += 1;
  }
  if (quad) {
    // −λ ≥ 0
    A(row, L.lambda()) = 1.0;
    row += 1;
  }
  // (d) [[W − Z, −x/2], [−xᴴ/2, −x]] − λ·[[Q, q], [qᴴ, q0]] ⪰ 0
  {
    const ComplexVector zero_border(n);
    for (std::size_t k = 0; k < nn; ++k) {
      const HermitianMatrix e = herm_basis(n, k);
      put_psd_column(A, row, L.W() + k, bordered(e, zero_border, 0.0));
      put_psd_column(A, row, L.Z() + k, bordered(-1.0 * e, zero_border, 0.0));
    }
    const HermitianMatrix zero_top(n);
    for (std::size_t i = 0; i < n; ++i) {
      ComplexVector br(n), bi(n);
      br[i] = {-0.5, 0.0};
      bi[i] = {0.0, -0.5};
      put_psd_column(A, row, L.x_re() + i, bordered(zero_top, br, 0.0));
      put_psd_column(A, row, L.x_im() + i, bordered(zero_top, bi, 0.0));
    }
    put_psd_column(A, row, L.x_scalar(), bordered(zero_top, zero_border, -1.0));
    if (quad) {
      const auto& qs = *p.quad_support;
      put_psd_column(A, row, L.lambda(), -1.0 * bordered(qs.Q, qs.q, qs.q0));
    }
    row += svec_dim(2 * (n + 1));
  }
  // (e) W ⪰ 0, Y ⪰ 0
  for (const std::size_t base : {L.W(), L.Y()}) {
    for (std::size_t k = 0; k < nn; ++k) put_psd_column(A, row, base + k, herm_basis(n, k));
    row += svec_dim(2 * n);
  }

  // objective
  prog.c[L.t1()] = p.rho1;
  prog.c[L.t2()] = p.rho2;
  const RealVector vs = vec_herm(p.S0);
  for (std::size_t k = 0; k < nn; ++k) prog.c[L.X() + k] = -vs[k];
  if (Wk) {
    const double nk = Wk->frobenius_norm();
    if (!(nk > 0.0)) throw std::invalid_argument("build_penalized: previous iterate W_k is zero");
    const RealVector vi = vec_herm(HermitianMatrix::identity(n));
    const RealVector vw = vec_herm(*Wk);
    for (std::size_t k = 0; k < nn; ++k) prog.c[L.W() + k] += p.alpha * (vi[k] - vw[k] / nk);
  }
  enc.objective_scale = std::max(1.0, p.rho2);
  for (double& v : prog.c) v /= enc.objective_scale;

  prog.labels = {{"t1", L.t1(), 1},          {"t2", L.t2(), 1},          {"X", L.X(), nn},
                 {"Y", L.Y(), nn},           {"W", L.W(), nn},           {"Z", L.Z(), nn},
                 {"x_re", L.x_re(), n},      {"x_im", L.x_im(), n},      {"x_scalar", L.x_scalar(), 1}};
  if (quad) prog.labels.push_back({"lambda", L.lambda(), 1});
  prog.validate();
  return enc;
}

}  // namespace

void BeamformerProblem::validate() const {
  const std::size_t n = a0.size();
  if (n == 0) throw std::invalid_argument("BeamformerProblem: empty steering mean");
  if (S0.size() != n || Sigma.size() != n) throw std::invalid_argument("BeamformerProblem: dimension mismatch");
  if (!a0.is_finite() || !S0.is_finite() || !Sigma.is_finite())
    throw std::invalid_argument("BeamformerProblem: non-finite data");
  if (!(rho1 > 0.0) || !(rho2 > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("BeamformerProblem: rho1, rho2 and alpha must be positive");
  const HermitianMatrix repaired = repair_covariance(Sigma);
  if (min_eigenvalue(repaired) < -1e-10 * (1.0 + repaired.frobenius_norm()))
    throw std::invalid_argument("BeamformerProblem: Sigma is not positive semidefinite");
}

HermitianMatrix repair_covariance(const HermitianMatrix& sigma, double eps) {
  if (min_eigenvalue(sigma) > 0.0) return sigma;
  const std::size_t n = sigma.size();
  return sigma + (eps * sigma.trace() / double(n)) * HermitianMatrix::identity(n);
}

double ConstraintResiduals::max() const {
  return std::max({norm_x, norm_sum, moment, lmi, psd_w, psd_y, lambda_sign});
}

EncodedProgram build_relaxation(const BeamformerProblem& p) { return build(p, nullptr, false); }

EncodedProgram build_penalized(const BeamformerProblem& p, const HermitianMatrix& Wk) {
  if (Wk.size() != p.size()) throw std::invalid_argument("build_penalized: W_k has wrong dimension");
  return build(p, &Wk, false);
}

EncodedProgram build_quadratic_support(const BeamformerProblem& p) { return build(p, nullptr, true); }

EncodedProgram build_quadratic_support_penalized(const BeamformerProblem& p, const HermitianMatrix& Wk) {
  if (Wk.size() != p.size()) throw std::invalid_argument("build_penalized: W_k has wrong dimension");
  return build(p, &Wk, true);
}

double rank_penalty(const HermitianMatrix& W, const HermitianMatrix& Wk, double alpha) {
  const double nk = Wk.frobenius_norm();
  if (!(nk > 0.0)) throw std::invalid_argument("rank_penalty: W_k is zero");
  return alpha * (W.trace() - herm_inner(W, Wk) / nk);
}

double model_objective(const BeamformerProblem& p, const DroVariables& v) {
  return p.rho1 * v.t1 + p.rho2 * v.t2 - herm_inner(p.S0, v.X);
}

double dual_bound(const BeamformerProblem& p, const HermitianMatrix& V, const HermitianMatrix& X,
                  const HermitianMatrix& Y) {
  return p.rho1 * X.frobenius_norm() + p.rho2 * (V + X + Y).frobenius_norm() - herm_inner(p.S0, X);
}

DroVariables decode(std::span<const double> u, const DroLayout& L) {
  if (u.size() != L.size()) throw std::invalid_argument("decode: decision vector length does not match layout");
  const std::size_t n = L.n;
  const std::size_t nn = n * n;
  DroVariables v;
  v.t1 = u[L.t1()];
  v.t2 = u[L.t2()];
  v.X = unvec_herm(u.subspan(L.X(), nn), n);
  v.Y = unvec_herm(u.subspan(L.Y(), nn), n);
  v.W = unvec_herm(u.subspan(L.W(), nn), n);
  v.Z = unvec_herm(u.subspan(L.Z(), nn), n);
  v.x_vec = ComplexVector(n);
  for (std::size_t i = 0; i < n; ++i) v.x_vec[i] = {u[L.x_re() + i], u[L.x_im() + i]};
  v.x_scalar = u[L.x_scalar()];
  v.lambda = L.quad_support ? u[L.lambda()] : 0.0;
  return v;
}

RealVector encode(const DroVariables& v, const DroLayout& L) {
  const std::size_t n = L.n;
  RealVector u(L.size(), 0.0);
  u[L.t1()] = v.t1;
  u[L.t2()] = v.t2;
  auto put = [&](std::size_t off, const HermitianMatrix& h) {
    if (h.size() != n) throw std::invalid_argument("encode: matrix has wrong dimension");
    const RealVector x = vec_herm(h);
    std::copy(x.begin(), x.end(), u.begin() + static_cast<std::ptrdiff_t>(off));
  };
  put(L.X(), v.X);
  put(L.Y(), v.Y);
  put(L.W(), v.W);
  put(L.Z(), v.Z);
  if (v.x_vec.size() != n) throw std::invalid_argument("encode: x_vec has wrong dimension");
  for (std::size_t i = 0; i < n; ++i) {
    u[L.x_re() + i] = v.x_vec[i].re;
    u[L.x_im() + i] = v.x_vec[i].im;
  }
  u[L.x_scalar()] = v.x_scalar;
  if (L.quad_support) u[L.lambda()] = v.lambda;
  return u;
}

ConstraintResiduals constraint_residuals(const BeamformerProblem& p, const DroVariables& v) {
  ConstraintResiduals r;
  const HermitianMatrix sigma = repair_covariance(p.Sigma);
  r.norm_x = std::max(0.0, v.X.frobenius_norm() - v.t1);
  r.norm_sum = std::max(0.0, (v.W + v.X + v.Y).frobenius_norm() - v.t2);
  const double lhs = v.x_scalar + inner(p.a0, v.x_vec).re + herm_inner(v.Z, sigma + HermitianMatrix::outer(p.a0));
  r.moment = std::max(0.0, 1.0 - lhs);
  ComplexVector border = v.x_vec;
  border *= Complex(-0.5);
  HermitianMatrix lmi = bordered(v.W - v.Z, border, -v.x_scalar);
  if (p.quad_support && v.lambda != 0.0) {
    const auto& qs = *p.quad_support;
    lmi -= v.lambda * bordered(qs.Q, qs.q, qs.q0);
  }
  r.lmi = std::max(0.0, -min_eigenvalue(lmi));
  r.psd_w = std::max(0.0, -min_eigenvalue(v.W));
  r.psd_y = std::max(0.0, -min_eigenvalue(v.Y));
  r.lambda_sign = std::max(0.0, v.lambda);
  return r;
}

double slater_value(const QuadraticSupport& qs) {
  const std::size_t n = qs.Q.size();
  if (min_eigenvalue(qs.Q) > 0.0) {
    // minimizer ā = −Q⁻¹q, value q0 − qᴴQ⁻¹q
    const ComplexVector qinv = solve_hpd(qs.Q, qs.q);
    return qs.q0 - inner(qs.q, qinv).re;
  }
  if (!qs.witness) throw std::invalid_argument("slater_value: Q is not positive definite and no witness was given");
  const ComplexVector& a = *qs.witness;
  if (a.size() != n) throw std::invalid_argument("slater_value: witness has wrong dimension");
  return qs.Q.quadratic_form(a) + 2.0 * inner(qs.q, a).re + qs.q0;
}

}  // namespace drobf
