#include "drobf/conic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace drobf {

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::Optimal: return "optimal";
    case SolverStatus::MaxIters: return "max_iters";
    case SolverStatus::PrimalInfeasible: return "primal_infeasible";
    case SolverStatus::DualInfeasible: return "dual_infeasible";
    case SolverStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

void ConicProgram::validate() const {
  const std::size_t n = c.size();
  const std::size_t m = b.size();
  if (n == 0 || m == 0) throw std::invalid_argument("ConicProgram: empty program");
  if (A.rows() != m || A.cols() != n) throw std::invalid_argument("ConicProgram: A has wrong shape");
  if (cone.total_dim() != m) throw std::invalid_argument("ConicProgram: cone dimension differs from rows of A");
  auto finite = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(c) || !finite(b) || !finite(A.data())) throw std::invalid_argument("ConicProgram: non-finite data");
  for (const auto& l : labels)
    if (l.offset + l.length > n) throw std::invalid_argument("ConicProgram: label outside decision vector");
}

void SolverSettings::validate() const {
  if (!(tol_feas > 0.0) || !(tol_gap > 0.0)) throw std::invalid_argument("SolverSettings: tolerances must be positive");
  if (max_iters < 1) throw std::invalid_argument("SolverSettings: max_iters must be >= 1");
  if (!(over_relaxation > 0.0 && over_relaxation < 2.0))
    throw std::invalid_argument("SolverSettings: over_relaxation must lie in (0, 2)");
  if (!(sigma > 0.0) || !(rho > 0.0)) throw std::invalid_argument("SolverSettings: sigma and rho must be positive");
  if (check_interval < 1 || infeasibility_interval < 1 || adapt_interval < 1)
    throw std::invalid_argument("SolverSettings: check intervals must be >= 1");
  if (!(adapt_threshold > 1.0)) throw std::invalid_argument("SolverSettings: adapt_threshold must exceed 1");
}

// ---------------------------------------------------------------- scaling

Equilibration ruiz_equilibrate(const Matrix& A, const ConeSpec& cone, int max_sweeps, double tol) {
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();
  Equilibration eq{RealVector(m, 1.0), RealVector(n, 1.0), 0};
  RealVector rnorm(m), cnorm(n);
  constexpr double kMinScale = 1e-4;
  constexpr double kMaxScale = 1e4;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    std::fill(rnorm.begin(), rnorm.end(), 0.0);
    std::fill(cnorm.begin(), cnorm.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const auto row = A.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        const double v = std::abs(eq.row[i] * row[j] * eq.col[j]);
        rnorm[i] = std::max(rnorm[i], v);
        cnorm[j] = std::max(cnorm[j], v);
      }
    }
    std::size_t off = 0;
    for (const auto& blk : cone.blocks()) {
      if (blk.kind == ConeKind::SecondOrder || blk.kind == ConeKind::Psd) {
        double mx = 0.0;
        for (std::size_t i = off; i < off + blk.dim; ++i) mx = std::max(mx, rnorm[i]);
        std::fill(rnorm.begin() + off, rnorm.begin() + off + blk.dim, mx);
      }
      off += blk.dim;
    }

    double dev = 0.0;
    for (double r : rnorm)
      if (r > 0.0) dev = std::max(dev, std::abs(1.0 - r));
    for (double c : cnorm)
      if (c > 0.0) dev = std::max(dev, std::abs(1.0 - c));
    if (dev < tol) break;

    for (std::size_t i = 0; i < m; ++i)
      if (rnorm[i] > 0.0) eq.row[i] = std::clamp(eq.row[i] / std::sqrt(rnorm[i]), kMinScale, kMaxScale);
    for (std::size_t j = 0; j < n; ++j)
      if (cnorm[j] > 0.0) eq.col[j] = std::clamp(eq.col[j] / std::sqrt(cnorm[j]), kMinScale, kMaxScale);
    eq.sweeps = sweep + 1;
  }
  return eq;
}

// ---------------------------------------------------------------- ADMM

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct Unscaled {
  RealVector u, s, y;
};

}  // namespace

SolverSolution solve(const ConicProgram& prog, const SolverSettings& settings, const std::optional<WarmStart>& warm) {
  prog.validate();
  settings.validate();
  const std::size_t n = prog.num_vars();
  const std::size_t m = prog.num_rows();

  Equilibration eq = settings.equilibrate
                         ? ruiz_equilibrate(prog.A, prog.cone, settings.ruiz_max_sweeps, settings.ruiz_tol)
                         : Equilibration{RealVector(m, 1.0), RealVector(n, 1.0), 0};
  const RealVector& D = eq.row;
  const RealVector& E = eq.col;

  Matrix As(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) As(i, j) = D[i] * prog.A(i, j) * E[j];
  const SparseRows Asp(As);
  const SparseRows Aorig(prog.A);
  RealVector bs(m), cs(n);
  for (std::size_t i = 0; i < m; ++i) bs[i] = D[i] * prog.b[i];
  for (std::size_t j = 0; j < n; ++j) cs[j] = E[j] * prog.c[j];

  const double sigma = settings.sigma;
  double rho = settings.rho;
  const double alpha = settings.over_relaxation;

  const Matrix gram = Asp.gram();
  auto factor = [&] {
    Matrix K = gram;
    for (double& v : K.data()) v *= rho;
    for (std::size_t j = 0; j < n; ++j) K(j, j) += sigma;
    return Cholesky(K);
  };
  Cholesky chol = factor();

  RealVector x(n, 0.0), s(m, 0.0), y(m, 0.0);
  if (warm) {
    if (warm->u.size() != n || warm->s.size() != m || warm->y.size() != m)
      throw std::invalid_argument("solve: warm start has wrong dimensions");
    for (std::size_t j = 0; j < n; ++j) x[j] = warm->u[j] / E[j];
    for (std::size_t i = 0; i < m; ++i) {
      s[i] = D[i] * warm->s[i];
      y[i] = warm->y[i] / D[i];
    }
  }

  RealVector rhs(n), xt(n), st(m), tmp_m(m), tmp_n(n), srel(m), x_prev(n), y_prev(m);

  const double norm_b = norm2(prog.b);
  const double norm_c = norm2(prog.c);

  auto unscale = [&]() {
    Unscaled out{RealVector(n), RealVector(m), RealVector(m)};
    for (std::size_t j = 0; j < n; ++j) out.u[j] = E[j] * x[j];
    for (std::size_t i = 0; i < m; ++i) {
      out.s[i] = s[i] / D[i];
      out.y[i] = D[i] * y[i];
    }
    return out;
  };

  SolverSolution sol;
  auto fill_residuals = [&](const Unscaled& us) {
    RealVector r(m);
    Aorig.multiply(us.u, r);
    for (std::size_t i = 0; i < m; ++i) r[i] += us.s[i] - prog.b[i];
    RealVector d(n);
    Aorig.multiply_transpose(us.y, d);
    for (std::size_t j = 0; j < n; ++j) d[j] += prog.c[j];
    sol.primal_residual = norm2(r);
    sol.dual_residual = norm2(d);
    sol.primal_objective = dot(prog.c, us.u);
    sol.dual_objective = -dot(prog.b, us.y);
    sol.gap = sol.primal_objective - sol.dual_objective;
  };
  auto converged = [&]() {
    return sol.primal_residual <= settings.tol_feas * (1.0 + norm_b) &&
           sol.dual_residual <= settings.tol_feas * (1.0 + norm_c) &&
           std::abs(sol.gap) <=
               settings.tol_gap * (1.0 + std::abs(sol.primal_objective) + std::abs(sol.dual_objective));
  };
  auto finish = [&](SolverStatus status, int iters) {
    Unscaled us = unscale();
    fill_residuals(us);
    sol.u = std::move(us.u);
    sol.s = std::move(us.s);
    sol.y = std::move(us.y);
    sol.status = status;
    sol.iterations = iters;
    return sol;
  };

  for (int k = 1; k <= settings.max_iters; ++k) {
    x_prev = x;
    y_prev = y;

    // (σI + ρAᵀA)·x̃ = σx − c + Aᵀ(ρ(b − s) − y)
    for (std::size_t i = 0; i < m; ++i) tmp_m[i] = rho * (bs[i] - s[i]) - y[i];
    Asp.multiply_transpose(tmp_m, tmp_n);
    for (std::size_t j = 0; j < n; ++j) xt[j] = sigma * x[j] - cs[j] + tmp_n[j];
    chol.solve_in_place(xt);
    // s̃ = b − A·x̃
    Asp.multiply(xt, st);
    for (std::size_t i = 0; i < m; ++i) st[i] = bs[i] - st[i];

    for (std::size_t j = 0; j < n; ++j) x[j] = alpha * xt[j] + (1.0 - alpha) * x[j];
    for (std::size_t i = 0; i < m; ++i) {
      srel[i] = alpha * st[i] + (1.0 - alpha) * s[i];
      s[i] = srel[i] - y[i] / rho;
    }
    project_in_place(s, prog.cone);
    for (std::size_t i = 0; i < m; ++i) y[i] -= rho * (srel[i] - s[i]);

    if (!all_finite(x) || !all_finite(y) || !all_finite(s)) return finish(SolverStatus::NumericalFailure, k);

    if (k % settings.check_interval == 0 || k == settings.max_iters) {
      fill_residuals(unscale());
      if (converged()) return finish(SolverStatus::Optimal, k);
    }

    if (settings.adaptive_rho && k % settings.adapt_interval == 0) {
      // relative residuals of the scaled problem
      Asp.multiply(x, tmp_m);
      const double ax = norm2(tmp_m);
      for (std::size_t i = 0; i < m; ++i) tmp_m[i] += s[i] - bs[i];
      const double pr = norm2(tmp_m) / std::max({ax, norm2(s), norm2(bs), 1e-300});
      Asp.multiply_transpose(y, tmp_n);
      const double aty = norm2(tmp_n);
      for (std::size_t j = 0; j < n; ++j) tmp_n[j] += cs[j];
      const double dr = norm2(tmp_n) / std::max({aty, norm2(cs), 1e-300});
      if (pr > 0.0 && dr > 0.0) {
        const double proposed = std::clamp(rho * std::sqrt(pr / dr), 1e-6, 1e6);
        if (proposed > rho * settings.adapt_threshold || proposed < rho / settings.adapt_threshold) {
          rho = proposed;
          chol = factor();
        }
      }
    }

    if (k % settings.infeasibility_interval == 0) {
      // primal: δy ∈ K*, Aᵀδy ≈ 0, bᵀδy < 0
      RealVector dy(m);
      for (std::size_t i = 0; i < m; ++i) dy[i] = D[i] * (y[i] - y_prev[i]);
      const double ndy = norm2(dy);
      if (ndy > settings.tol_feas) {
        for (double& v : dy) v /= ndy;
        RealVector aty(n);
        Aorig.multiply_transpose(dy, aty);
        const double res = norm2(aty) + distance_dual(dy, prog.cone);
        if (dot(prog.b, dy) < -settings.tol_feas && res <= settings.tol_feas) {
          sol.certificate = dy;
          sol.certificate_residual = res;
          return finish(SolverStatus::PrimalInfeasible, k);
        }
      }
      // dual: −A·δu ∈ K, cᵀδu < 0
      RealVector du(n);
      for (std::size_t j = 0; j < n; ++j) du[j] = E[j] * (x[j] - x_prev[j]);
      const double ndu = norm2(du);
      if (ndu > settings.tol_feas) {
        for (double& v : du) v /= ndu;
        RealVector adu(m);
        Aorig.multiply(du, adu);
        for (double& v : adu) v = -v;
        const double res = distance(adu, prog.cone);
        if (dot(prog.c, du) < -settings.tol_feas && res <= settings.tol_feas) {
          sol.certificate = du;
          sol.certificate_residual = res;
          return finish(SolverStatus::DualInfeasible, k);
        }
      }
    }
  }
  return finish(SolverStatus::MaxIters, settings.max_iters);
}

// ---------------------------------------------------------------- dump

void write_problem(std::ostream& out, const ConicProgram& prog) {
  prog.validate();
  out << std::setprecision(17);
  out << "conic-program 1\n";
  out << "n " << prog.num_vars() << "\n";
  out << "m " << prog.num_rows() << "\n";
  out << "cones " << prog.cone.blocks().size() << "\n";
  for (const auto& blk : prog.cone.blocks())
    out << to_string(blk.kind) << ' ' << (blk.kind == ConeKind::Psd ? blk.side : blk.dim) << "\n";
  out << "c\n";
  for (double v : prog.c) out << v << "\n";
  out << "b\n";
  for (double v : prog.b) out << v << "\n";
  out << "A\n";
  for (std::size_t i = 0; i < prog.num_rows(); ++i) {
    const auto row = prog.A.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << row[j];
    out << "\n";
  }
}

namespace {

void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) throw std::runtime_error("read_problem: expected '" + word + "'");
}

template <typename T>
T read_value(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw std::runtime_error(std::string("read_problem: could not read ") + what);
  return v;
}

}  // namespace

ConicProgram read_problem(std::istream& in) {
  expect(in, "conic-program");
  if (read_value<int>(in, "version") != 1) throw std::runtime_error("read_problem: unsupported version");
  expect(in, "n");
  const auto n = read_value<std::size_t>(in, "n");
  expect(in, "m");
  const auto m = read_value<std::size_t>(in, "m");
  expect(in, "cones");
  const auto count = read_value<std::size_t>(in, "cone count");
  ConicProgram prog;
  for (std::size_t k = 0; k < count; ++k) {
    const auto kind = read_value<std::string>(in, "cone kind");
    const auto d = read_value<std::size_t>(in, "cone dimension");
    if (kind == "zero") prog.cone.add(ConeBlock::zero(d));
    else if (kind == "nonneg") prog.cone.add(ConeBlock::nonneg(d));
    else if (kind == "soc") prog.cone.add(ConeBlock::second_order(d));
    else if (kind == "psd") prog.cone.add(ConeBlock::psd(d));
    else throw std::runtime_error("read_problem: unknown cone kind '" + kind + "'");
  }
  expect(in, "c");
  prog.c.resize(n);
  for (auto& v : prog.c) v = read_value<double>(in, "c");
  expect(in, "b");
  prog.b.resize(m);
  for (auto& v : prog.b) v = read_value<double>(in, "b");
  expect(in, "A");
  prog.A = Matrix(m, n);
  for (auto& v : prog.A.data()) v = read_value<double>(in, "A");
  prog.validate();
  return prog;
}

void write_problem_file(const std::string& path, const ConicProgram& prog) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_problem_file: cannot open " + path);
  write_problem(out, prog);
  if (!out) throw std::runtime_error("write_problem_file: write failed for " + path);
}

ConicProgram read_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_problem_file: cannot open " + path);
  return read_problem(in);
}

}  // namespace drobf
