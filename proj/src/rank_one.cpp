#include "drobf/rank_one.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drobf {

namespace {

RealVector clamped_eigenvalues(const HermitianMatrix& W) {
  const HermitianEigen e = eig_herm(W);
  if (!e.converged) throw std::runtime_error("rank-one test: eigendecomposition did not converge");
  RealVector lam = e.values;
  const double floor = -1e-8 * std::max(1.0, lam.front());
  for (double& l : lam) {
    if (l < floor) throw std::invalid_argument("rank-one test: matrix is not positive semidefinite");
    l = std::max(l, 0.0);
  }
  return lam;
}

}  // namespace

double rank_one_gap(const HermitianMatrix& W) {
  const RealVector lam = clamped_eigenvalues(W);
  double tr = 0.0, fro = 0.0;
  for (double l : lam) {
    tr += l;
    fro += l * l;
  }
  return std::max(0.0, tr - std::sqrt(fro));
}

double rank_ratio(const HermitianMatrix& W) {
  const RealVector lam = clamped_eigenvalues(W);
  if (!(lam.front() > 0.0)) throw std::invalid_argument("rank_ratio: matrix is zero");
  return lam.size() > 1 ? lam[1] / lam[0] : 0.0;
}

bool is_rank_one(const HermitianMatrix& W, double tau) {
  const RealVector lam = clamped_eigenvalues(W);
  if (!(lam.front() > 0.0)) return false;
  return lam.size() == 1 || lam[1] / lam[0] <= tau;
}

ComplexVector extract_w(const HermitianMatrix& W) {
  const HermitianEigen e = eig_herm(W);
  if (!(e.values.front() > 0.0)) throw std::invalid_argument("extract_w: matrix has no positive eigenvalue");
  ComplexVector w = e.vectors.front();
  w *= Complex(std::sqrt(e.values.front()));
  return w;
}

double penalized_step_gap(const HermitianMatrix& Wk, const HermitianMatrix& Wprev) {
  const double np = Wprev.frobenius_norm();
  if (!(np > 0.0)) throw std::invalid_argument("penalized_step_gap: previous iterate is zero");
  return std::abs(Wk.trace() - herm_inner(Wk, Wprev) / np);
}

DriverResult run_driver(const BeamformerProblem& p, const DriverSettings& settings) {
  DriverResult res;

  auto solve_one = [&](const EncodedProgram& enc, int k, const std::optional<WarmStart>& warm) {
    if (settings.program_sink) settings.program_sink(enc.program, k);
    SolverSolution sol = solve(enc.program, settings.solver, warm);
    res.solver_iterations += sol.iterations;
    if (!sol.optimal()) throw DriverError(k, sol.status);
    return sol;
  };

  const EncodedProgram relax =
      settings.quad_support ? build_quadratic_support(p) : build_relaxation(p);
  SolverSolution sol = solve_one(relax, 0, std::nullopt);
  DroVariables vars = decode(sol.u, relax.layout);
  vars.W = psd_part(vars.W);
  if (!(vars.W.frobenius_norm() > 0.0)) throw std::runtime_error("rank-one driver: relaxation returned W = 0");
  res.objective_history.push_back(model_objective(p, vars));
  res.W_history.push_back(vars.W);

  const double gap0 = rank_one_gap(vars.W);
  if (is_rank_one(vars.W, settings.rank_tau) && gap0 <= settings.gap_tol) {
    res.converged = true;
    res.final_gap = gap0;
    res.rank_ratio = rank_ratio(vars.W);
    res.w = extract_w(vars.W);
    res.variables = std::move(vars);
    return res;
  }

  HermitianMatrix W_prev = vars.W;
  DroVariables best_vars = vars;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= settings.max_penalized_iters; ++k) {
    const EncodedProgram pen = settings.quad_support ? build_quadratic_support_penalized(p, W_prev)
                                                     : build_penalized(p, W_prev);
    std::optional<WarmStart> warm;
    if (settings.warm_start) warm = WarmStart{sol.u, sol.y, sol.s};
    sol = solve_one(pen, k, warm);
    vars = decode(sol.u, pen.layout);
    vars.W = psd_part(vars.W);
    if (!(vars.W.frobenius_norm() > 0.0)) throw std::runtime_error("rank-one driver: penalized solve returned W = 0");

    const double stat = penalized_step_gap(vars.W, W_prev);
    res.iterations = k;
    res.objective_history.push_back(model_objective(p, vars));
    res.gap_history.push_back(stat);
    res.W_history.push_back(vars.W);
    if (stat < best_gap) {
      best_gap = stat;
      best_vars = vars;
    }
    if (stat <= settings.gap_tol) {
      res.converged = true;
      break;
    }
    W_prev = vars.W;
  }

  res.final_gap = best_gap;
  res.rank_ratio = rank_ratio(best_vars.W);
  res.w = extract_w(best_vars.W);
  res.variables = std::move(best_vars);
  return res;
}

}  // namespace drobf
