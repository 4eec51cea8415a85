#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drobf/conic_solver.hpp"
#include "drobf/encoder.hpp"
#include "drobf/hermitian.hpp"

namespace drobf {

/// trace(W) − ‖W‖_F for PSD W; zero exactly when rank(W) ≤ 1. Eigenvalues
/// down to −1e−8·max(1, λmax) are clamped to zero; below that the call throws.
double rank_one_gap(const HermitianMatrix& W);

/// λ₂/λ₁ ≤ tau with λ₁ > 0.
bool is_rank_one(const HermitianMatrix& W, double tau = 1e-4);

/// λ₂/λ₁ of W (0 for N = 1); throws when λ₁ ≤ 0.
double rank_ratio(const HermitianMatrix& W);

/// √λ₁·v₁, the dominant rank-one factor of W. Throws on W = 0.
ComplexVector extract_w(const HermitianMatrix& W);

/// |tr Wk − tr(Wk·Wprev)/‖Wprev‖_F|, the stopping statistic of the penalized loop.
double penalized_step_gap(const HermitianMatrix& Wk, const HermitianMatrix& Wprev);

struct DriverSettings {
  SolverSettings solver;
  double rank_tau = 1e-4;
  double gap_tol = 1e-6;
  int max_penalized_iters = 50;
  bool warm_start = true;
  /// Use the quadratic support set of the problem instead of the whole space.
  bool quad_support = false;
  /// Called with every program before it is solved (iteration 0 is the relaxation).
  std::function<void(const ConicProgram&, int iteration)> program_sink;
};

struct DriverResult {
  ComplexVector w;
  int iterations = 0;  // penalized solves
  bool converged = false;
  double final_gap = 0.0;
  std::vector<double> objective_history;  // ρ1t1 + ρ2t2 − tr(S0X), relaxation first
  std::vector<double> gap_history;        // stopping statistic per penalized solve
  double rank_ratio = 0.0;
  DroVariables variables;                 // decoded solution the beamformer came from
  std::vector<HermitianMatrix> W_history;
  int solver_iterations = 0;
};

class DriverError : public std::runtime_error {
 public:
  DriverError(int iteration, SolverStatus status)
      : std::runtime_error("rank-one driver: solve " + std::to_string(iteration) + " ended with status " +
                           to_string(status)),
        iteration_(iteration),
        status_(status) {}

  int iteration() const { return iteration_; }
  SolverStatus status() const { return status_; }

 private:
  int iteration_;
  SolverStatus status_;
};

/// Solve the relaxation; if W is numerically rank one (eigenvalue ratio
/// ≤ rank_tau and trace/Frobenius gap ≤ gap_tol) return its factor.
/// Otherwise re-solve the penalized program around the previous W,
/// warm-started, until the stopping statistic is ≤ gap_tol or the cap is
/// reached. On the cap the iterate with the smallest statistic is returned
/// with converged = false.
DriverResult run_driver(const BeamformerProblem& p, const DriverSettings& settings = {});

}  // namespace drobf
