#pragma once

#include <cstddef>
#include <optional>

#include "drobf/conic_solver.hpp"
#include "drobf/hermitian.hpp"

namespace drobf {

/// Support set {a : aᴴQa + 2Re(qᴴa) + q0 ≤ 0} for the steering vector.
struct QuadraticSupport {
  HermitianMatrix Q;
  ComplexVector q;
  double q0 = 0.0;
  /// Strictly interior point; required when Q is not positive definite.
  std::optional<ComplexVector> witness;
};

/// Data of the worst-case SINR problem: INC mean S0 with ball radius rho1,
/// INC support radius rho2, steering mean a0 and covariance Sigma, and the
/// rank penalty weight alpha.
struct BeamformerProblem {
  HermitianMatrix S0;
  ComplexVector a0;
  HermitianMatrix Sigma;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double alpha = 0.0;
  std::optional<QuadraticSupport> quad_support;

  std::size_t size() const { return a0.size(); }
  /// Throws std::invalid_argument on bad dimensions, non-positive radii or weight.
  void validate() const;
};

/// Σ + ε·trace(Σ)/N·I when the smallest eigenvalue of Σ is not positive.
HermitianMatrix repair_covariance(const HermitianMatrix& sigma, double eps = 1e-8);

/// Decision vector layout (offsets into u):
///   [t1, t2, vecH(X), vecH(Y), vecH(W), vecH(Z), re(x), im(x), x_scalar, (lambda)]
/// with vecH = vec_herm, the isometric N² parameterization.
struct DroLayout {
  std::size_t n = 0;
  bool quad_support = false;

  std::size_t t1() const { return 0; }
  std::size_t t2() const { return 1; }
  std::size_t X() const { return 2; }
  std::size_t Y() const { return 2 + n * n; }
  std::size_t W() const { return 2 + 2 * n * n; }
  std::size_t Z() const { return 2 + 3 * n * n; }
  std::size_t x_re() const { return 2 + 4 * n * n; }
  std::size_t x_im() const { return x_re() + n; }
  std::size_t x_scalar() const { return x_im() + n; }
  std::size_t lambda() const { return x_scalar() + 1; }
  std::size_t size() const { return x_scalar() + 1 + (quad_support ? 1 : 0); }
};

/// A lowered program plus what is needed to read it back. The program's
/// objective equals the model objective divided by `objective_scale`.
struct EncodedProgram {
  ConicProgram program;
  DroLayout layout;
  double objective_scale = 1.0;
};

struct DroVariables {
  HermitianMatrix W, X, Y, Z;
  ComplexVector x_vec;
  double x_scalar = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double lambda = 0.0;
};

/// Violations of the model constraints at a decoded point, each ≥ 0.
struct ConstraintResiduals {
  double norm_x = 0.0;        // (a) ‖X‖_F − t1
  double norm_sum = 0.0;      // (b) ‖W+X+Y‖_F − t2
  double moment = 0.0;        // (c) 1 − [x + Re(a0ᴴx) + tr(Z(Σ + a0a0ᴴ))]
  double lmi = 0.0;           // (d) −λmin of the bordered matrix
  double psd_w = 0.0;         // (e) −λmin(W)
  double psd_y = 0.0;         // (e) −λmin(Y)
  double lambda_sign = 0.0;   // quadratic support only: max(λ, 0)

  double max() const;
};

/// Relaxation: minimize ρ1·t1 + ρ2·t2 − tr(S0·X) subject to
///   (a) t1 ≥ ‖X‖_F, (b) t2 ≥ ‖W+X+Y‖_F,
///   (c) x + Re(a0ᴴx) + tr(Z(Σ + a0a0ᴴ)) ≥ 1,
///   (d) [[W − Z, −x/2], [−xᴴ/2, −x]] ⪰ 0,  (e) W ⪰ 0, Y ⪰ 0.
/// Cones, in row order: soc(1+N²), soc(1+N²), nonneg(1), psd(2N+2), psd(2N), psd(2N).
EncodedProgram build_relaxation(const BeamformerProblem& p);

/// Relaxation plus α·(tr W − tr(W·Wk)/‖Wk‖_F) in the objective.
EncodedProgram build_penalized(const BeamformerProblem& p, const HermitianMatrix& Wk);

/// Replaces (d) by (d) − λ·[[Q, q], [qᴴ, q0]] ⪰ 0 with λ ≤ 0 (one extra
/// nonneg row after (c)). Requires p.quad_support and a strict interior
/// point of the support set.
EncodedProgram build_quadratic_support(const BeamformerProblem& p);

/// Penalized variant on the quadratic-support program.
EncodedProgram build_quadratic_support_penalized(const BeamformerProblem& p, const HermitianMatrix& Wk);

/// α·(tr W − tr(W·Wk)/‖Wk‖_F). Throws on Wk = 0.
double rank_penalty(const HermitianMatrix& W, const HermitianMatrix& Wk, double alpha);

/// ρ1·t1 + ρ2·t2 − tr(S0·X) at a decoded point.
double model_objective(const BeamformerProblem& p, const DroVariables& v);

/// ρ1‖X‖_F + ρ2‖V + X + Y‖_F − tr(S0·X), the worst-case interference power
/// bound for V = wwᴴ (or its relaxation W).
double dual_bound(const BeamformerProblem& p, const HermitianMatrix& V, const HermitianMatrix& X,
                  const HermitianMatrix& Y);

DroVariables decode(std::span<const double> u, const DroLayout& layout);
RealVector encode(const DroVariables& v, const DroLayout& layout);
ConstraintResiduals constraint_residuals(const BeamformerProblem& p, const DroVariables& v);

/// Smallest value of aᴴQa + 2Re(qᴴa) + q0 witnessed by the support data:
/// the exact minimum when Q ≻ 0, otherwise the value at the supplied witness.
double slater_value(const QuadraticSupport& qs);

}  // namespace drobf
