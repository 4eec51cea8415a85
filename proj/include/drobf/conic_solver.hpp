#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "drobf/cones.hpp"
#include "drobf/linalg.hpp"

namespace drobf {

/// Named slice of the decision vector, for diagnostics.
struct VariableLabel {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
};

/// minimize cᵀu  subject to  A·u + s = b,  s ∈ cone.
struct ConicProgram {
  RealVector c;
  Matrix A;
  RealVector b;
  ConeSpec cone;
  std::vector<VariableLabel> labels;

  std::size_t num_vars() const { return c.size(); }
  std::size_t num_rows() const { return b.size(); }

  /// Throws std::invalid_argument on inconsistent dimensions or non-finite data.
  void validate() const;
};

enum class SolverStatus { Optimal, MaxIters, PrimalInfeasible, DualInfeasible, NumericalFailure };

std::string to_string(SolverStatus status);

struct SolverSettings {
  double tol_feas = 1e-7;
  double tol_gap = 1e-7;
  int max_iters = 50000;
  double over_relaxation = 1.5;
  bool equilibrate = true;
  /// Proximal weight on u and (initial) augmented-Lagrangian penalty on the
  /// slack; the cached system is σI + ρAᵀA.
  double sigma = 1e-6;
  double rho = 0.1;
  /// Every adapt_interval iterations ρ is rescaled by the square root of the
  /// ratio of relative primal to relative dual residual; the factorization
  /// is redone only when that changes ρ by more than adapt_threshold.
  bool adaptive_rho = true;
  int adapt_interval = 100;
  double adapt_threshold = 5.0;
  int check_interval = 25;
  int infeasibility_interval = 100;
  int ruiz_max_sweeps = 25;
  double ruiz_tol = 1e-3;

  void validate() const;
};

struct WarmStart {
  RealVector u;
  RealVector y;
  RealVector s;
};

/// Residual conventions (all in the caller's unscaled coordinates):
///   primal_residual = ‖A·u + s − b‖₂
///   dual_residual   = ‖Aᵀ·y + c‖₂
///   gap             = cᵀu + bᵀy = yᵀ(b − A·u), nonnegative up to the
///                     primal residual since s ∈ K and y ∈ K*.
/// The dual objective is −bᵀy.
struct SolverSolution {
  RealVector u;
  RealVector y;
  RealVector s;
  SolverStatus status = SolverStatus::MaxIters;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  /// Normalized infeasibility certificate (y-space for PrimalInfeasible,
  /// u-space for DualInfeasible) and its residual; empty otherwise.
  RealVector certificate;
  double certificate_residual = 0.0;

  bool optimal() const { return status == SolverStatus::Optimal; }
};

struct Equilibration {
  RealVector row;  // D
  RealVector col;  // E
  int sweeps = 0;
};

/// Ruiz scaling of A into D·A·E. Rows of a cone block other than Zero and
/// Nonneg share one factor so that D maps the cone onto itself.
Equilibration ruiz_equilibrate(const Matrix& A, const ConeSpec& cone, int max_sweeps, double tol);

/// ADMM operator splitting: alternate a projection onto {(u, s): A·u + s = b}
/// through a cached Cholesky factor of σI + ρAᵀA with the cone projection,
/// then update the multiplier. Deterministic for identical inputs.
SolverSolution solve(const ConicProgram& prog, const SolverSettings& settings = {},
                     const std::optional<WarmStart>& warm = std::nullopt);

/// Plain-text dump, 17 significant digits:
///   conic-program 1
///   n <n>
///   m <m>
///   cones <count>
///   <kind> <dim>        one line per block; kind ∈ {zero, nonneg, soc, psd}, psd gives the side
///   c                   then n lines
///   b                   then m lines
///   A                   then m lines of n space-separated values (row-major)
void write_problem(std::ostream& out, const ConicProgram& prog);
ConicProgram read_problem(std::istream& in);
void write_problem_file(const std::string& path, const ConicProgram& prog);
ConicProgram read_problem_file(const std::string& path);

}  // namespace drobf
