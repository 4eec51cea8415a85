#include <doctest.h>

#include <cmath>
#include <sstream>

#include "constructed.hpp"
#include "drobf/conic_solver.hpp"
#include "drobf/hermitian.hpp"
#include "support.hpp"

using namespace drobf;
using namespace testing;

namespace {

ConicProgram single(double c, double a, double b, ConeBlock blk) {
  ConicProgram p;
  p.c = {c};
  p.A = Matrix(1, 1, a);
  p.b = {b};
  p.cone.add(blk);
  return p;
}

void check_kkt(const ConicProgram& p, const SolverSolution& s, const SolverSettings& st) {
  REQUIRE(s.optimal());
  CHECK(s.primal_residual <= st.tol_feas * (1.0 + norm2(p.b)));
  CHECK(s.dual_residual <= st.tol_feas * (1.0 + norm2(p.c)));
  CHECK(std::abs(s.gap) <= st.tol_gap * (1.0 + std::abs(s.primal_objective) + std::abs(s.dual_objective)));
  CHECK(distance(s.s, p.cone) <= 1e-9 * (1.0 + norm2(s.s)));
  CHECK(distance_dual(s.y, p.cone) <= 1e-9 * (1.0 + norm2(s.y)));
  // residuals as reported are what they claim to be
  RealVector r = p.A.multiply(s.u);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += s.s[i] - p.b[i];
  CHECK(norm2(r) == doctest::Approx(s.primal_residual).epsilon(1e-6));
  CHECK(s.gap == doctest::Approx(dot(p.c, s.u) + dot(p.b, s.y)).epsilon(1e-9));
}

}  // namespace

TEST_CASE("textbook programs") {
  SolverSettings st;
  SUBCASE("LP: min u subject to u >= 1") {
    // u ≥ 1  ⇔  s = −1 + ... ; written as −u + s = −1, s ≥ 0
    const auto p = single(1.0, -1.0, -1.0, ConeBlock::nonneg(1));
    const auto s = solve(p, st);
    check_kkt(p, s, st);
    CHECK(s.u[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s.primal_objective == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("SOC: min t subject to (t, 3, 4) in the cone") {
    ConicProgram p;
    p.c = {1.0};
    p.A = Matrix(3, 1);
    p.A(0, 0) = -1.0;
    p.b = {0.0, 3.0, 4.0};
    p.cone.add(ConeBlock::second_order(3));
    const auto s = solve(p, st);
    check_kkt(p, s, st);
    CHECK(s.u[0] == doctest::Approx(5.0).epsilon(1e-6));
  }
  SUBCASE("SDP: min trace X subject to X - I PSD") {
    ConicProgram p;
    // u = svec(X); slack svec(X − I) = −(−u) − svec(I) → A = −I, b = −svec(I)
    p.c = svec(SymmetricMatrix::identity(2));
    p.A = Matrix(3, 3);
    for (std::size_t i = 0; i < 3; ++i) p.A(i, i) = -1.0;
    p.b = svec(SymmetricMatrix::identity(2));
    for (double& v : p.b) v = -v;
    p.cone.add(ConeBlock::psd(2));
    const auto s = solve(p, st);
    check_kkt(p, s, st);
    CHECK(s.primal_objective == doctest::Approx(2.0).epsilon(1e-6));
    const auto X = smat(s.u);
    CHECK(std::abs(X(0, 0) - 1.0) < 1e-6);
    CHECK(std::abs(X(1, 1) - 1.0) < 1e-6);
    CHECK(std::abs(X(0, 1)) < 1e-6);
  }
  SUBCASE("equality rows through a zero block") {
    // min u1 + u2 subject to u1 − u2 = 1, u ≥ 0
    ConicProgram p;
    p.c = {1.0, 1.0};
    p.A = Matrix(3, 2);
    p.A(0, 0) = 1.0;
    p.A(0, 1) = -1.0;
    p.A(1, 0) = -1.0;
    p.A(2, 1) = -1.0;
    p.b = {1.0, 0.0, 0.0};
    p.cone.add(ConeBlock::zero(1)).add(ConeBlock::nonneg(2));
    const auto s = solve(p, st);
    check_kkt(p, s, st);
    CHECK(s.u[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(s.u[1]) < 1e-6);
    CHECK(std::abs(s.s[0]) == 0.0);
  }
}

TEST_CASE("constructed primal-dual programs") {
  SolverSettings st;
  st.tol_feas = st.tol_gap = 1e-9;
  for (int i = 0; i < 10; ++i) {
    CAPTURE(i);
    const auto cp = constructed_suite(i);
    CHECK(cp.program.num_vars() <= 200);
    // the oracle itself satisfies the KKT system
    CHECK(std::abs(dot(cp.y_star, cp.s_star)) < 1e-10);
    CHECK(std::abs(cp.optimal_value + dot(cp.program.b, cp.y_star)) < 1e-9);
    const auto s = solve(cp.program, st);
    check_kkt(cp.program, s, st);
    CHECK(std::abs(s.primal_objective - cp.optimal_value) <= 1e-5);
    CHECK(s.primal_residual <= 1e-6);
    CHECK(s.dual_residual <= 1e-6);
    CHECK(std::abs(s.gap) <= 1e-6);
    // weak duality holds up to the tolerance on optimal exits
    CHECK(s.gap >= -st.tol_gap * (1.0 + std::abs(s.primal_objective) + std::abs(s.dual_objective)));
  }
}

TEST_CASE("infeasibility certificates") {
  SUBCASE("primal infeasible: u >= 1 and u <= 0") {
    ConicProgram p;
    p.c = {1.0};
    p.A = Matrix(2, 1);
    p.A(0, 0) = -1.0;
    p.A(1, 0) = 1.0;
    p.b = {-1.0, 0.0};
    p.cone.add(ConeBlock::nonneg(2));
    const auto s = solve(p);
    REQUIRE(s.status == SolverStatus::PrimalInfeasible);
    REQUIRE(s.certificate.size() == 2);
    CHECK(s.certificate_residual <= SolverSettings{}.tol_feas);
    CHECK(dot(p.b, s.certificate) < 0.0);
    CHECK(norm2(p.A.multiply_transpose(s.certificate)) <= 1e-6);
    CHECK(distance_dual(s.certificate, p.cone) <= 1e-6);
  }
  SUBCASE("dual infeasible: min -u subject to u >= 0") {
    const auto p = single(-1.0, -1.0, 0.0, ConeBlock::nonneg(1));
    const auto s = solve(p);
    REQUIRE(s.status == SolverStatus::DualInfeasible);
    REQUIRE(s.certificate.size() == 1);
    CHECK(s.certificate_residual <= SolverSettings{}.tol_feas);
    CHECK(dot(p.c, s.certificate) < 0.0);
  }
}

TEST_CASE("status reporting") {
  SUBCASE("iteration cap") {
    const auto cp = constructed_suite(3);
    SolverSettings st;
    st.max_iters = 10;
    const auto s = solve(cp.program, st);
    CHECK(s.status == SolverStatus::MaxIters);
    CHECK(s.iterations == 10);
    CHECK(to_string(s.status) == "max_iters");
  }
  SUBCASE("overflowing iterates become a numerical failure") {
    // the first x-update divides a huge cost by a tiny proximal weight
    const auto p = single(1e300, -1e-200, 0.0, ConeBlock::nonneg(1));
    SolverSettings st;
    st.equilibrate = false;
    st.sigma = 1e-10;
    const auto s = solve(p, st);
    CHECK(s.status == SolverStatus::NumericalFailure);
  }
  SUBCASE("settings validation") {
    SolverSettings st;
    st.over_relaxation = 2.0;
    CHECK_THROWS_AS(st.validate(), std::invalid_argument);
    st = {};
    st.tol_feas = 0.0;
    CHECK_THROWS_AS(st.validate(), std::invalid_argument);
    st = {};
    st.max_iters = 0;
    CHECK_THROWS_AS(solve(constructed_suite(0).program, st), std::invalid_argument);
  }
  SUBCASE("malformed programs") {
    auto p = constructed_suite(0).program;
    p.b.pop_back();
    CHECK_THROWS_AS(solve(p), std::invalid_argument);
    p = constructed_suite(0).program;
    p.c[0] = std::nan("");
    CHECK_THROWS_AS(solve(p), std::invalid_argument);
  }
}

TEST_CASE("determinism") {
  const auto cp = constructed_suite(7);
  const auto a = solve(cp.program);
  const auto b = solve(cp.program);
  CHECK(a.iterations == b.iterations);
  CHECK(a.u == b.u);
  CHECK(a.y == b.y);
  CHECK(a.s == b.s);
}

TEST_CASE("scaling invariance of the solution") {
  SolverSettings st;
  st.tol_feas = st.tol_gap = 1e-10;
  const auto cp = constructed_suite(4);
  const auto& p = cp.program;
  const std::size_t m = p.num_rows(), n = p.num_vars();

  // Positive row factors, one per block for SOC/PSD blocks so the cone is preserved.
  RealVector row(m), col(n);
  std::size_t off = 0;
  for (const auto& blk : p.cone.blocks()) {
    const double shared = uniform(0.2, 5.0);
    for (std::size_t i = off; i < off + blk.dim; ++i)
      row[i] = (blk.kind == ConeKind::Nonneg || blk.kind == ConeKind::Zero) ? uniform(0.2, 5.0) : shared;
    off += blk.dim;
  }
  for (double& c : col) c = uniform(0.2, 5.0);

  ConicProgram q = p;
  for (std::size_t i = 0; i < m; ++i) {
    q.b[i] *= row[i];
    for (std::size_t j = 0; j < n; ++j) q.A(i, j) = row[i] * p.A(i, j) * col[j];
  }
  for (std::size_t j = 0; j < n; ++j) q.c[j] *= col[j];

  const auto a = solve(p, st);
  const auto b = solve(q, st);
  REQUIRE(a.optimal());
  REQUIRE(b.optimal());
  CHECK(b.primal_objective == doctest::Approx(a.primal_objective).epsilon(1e-6));
  CHECK(b.primal_objective == doctest::Approx(cp.optimal_value).epsilon(1e-6));
  // The optimal face need not be a single point, so map the scaled solution
  // back (u = E·u') and check it is feasible and optimal for the original.
  RealVector back(n);
  for (std::size_t j = 0; j < n; ++j) back[j] = col[j] * b.u[j];
  RealVector slack = p.A.multiply(back);
  for (std::size_t i = 0; i < m; ++i) slack[i] = p.b[i] - slack[i];
  CHECK(distance(slack, p.cone) <= 1e-6 * (1.0 + norm2(p.b)));
  CHECK(dot(p.c, back) == doctest::Approx(cp.optimal_value).epsilon(1e-6));
}

TEST_CASE("fixed and adaptive penalty agree") {
  SolverSettings fixed;
  fixed.adaptive_rho = false;
  fixed.tol_feas = fixed.tol_gap = 1e-9;
  SolverSettings adaptive = fixed;
  adaptive.adaptive_rho = true;
  adaptive.rho = 100.0;  // a poor start that adaptation has to correct
  for (int i : {1, 6}) {
    CAPTURE(i);
    const auto cp = constructed_suite(i);
    const auto a = solve(cp.program, fixed);
    const auto b = solve(cp.program, adaptive);
    REQUIRE(a.optimal());
    REQUIRE(b.optimal());
    CHECK(std::abs(a.primal_objective - b.primal_objective) <= 1e-6);
  }
  SolverSettings bad;
  bad.adapt_threshold = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("warm start") {
  const auto cp = constructed_suite(9);
  const auto cold = solve(cp.program);
  REQUIRE(cold.optimal());
  const auto warm = solve(cp.program, {}, WarmStart{cold.u, cold.y, cold.s});
  CHECK(warm.optimal());
  CHECK(warm.iterations <= 50);
  CHECK(warm.iterations < cold.iterations);
  CHECK_THROWS_AS(solve(cp.program, {}, WarmStart{RealVector(1), cold.y, cold.s}), std::invalid_argument);
}

TEST_CASE("ruiz equilibration") {
  const auto cp = constructed_suite(5);
  ConicProgram p = cp.program;
  // badly scaled rows and columns
  for (std::size_t i = 0; i < p.num_rows(); ++i)
    for (std::size_t j = 0; j < p.num_vars(); ++j) p.A(i, j) *= std::pow(10.0, double(i % 5) - double(j % 4));
  const auto eq = ruiz_equilibrate(p.A, p.cone, 25, 1e-3);
  CHECK(eq.sweeps >= 1);
  CHECK(eq.sweeps <= 25);
  // rows of SOC and PSD blocks share a factor, so only the free rows are
  // expected to reach unit norm
  double rmin = 1e300, rmax = 0.0;
  const std::size_t free_rows = p.cone.blocks()[0].dim;
  for (std::size_t i = 0; i < p.num_rows(); ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < p.num_vars(); ++j) r = std::max(r, std::abs(eq.row[i] * p.A(i, j) * eq.col[j]));
    if (i < free_rows) rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  CHECK(rmax <= 1.0 + 1e-2);
  CHECK(rmin >= 0.05);
  // one shared factor inside every SOC and PSD block
  std::size_t off = 0;
  for (const auto& blk : p.cone.blocks()) {
    if (blk.kind == ConeKind::SecondOrder || blk.kind == ConeKind::Psd)
      for (std::size_t i = off; i < off + blk.dim; ++i) CHECK(eq.row[i] == eq.row[off]);
    off += blk.dim;
  }
}

TEST_CASE("problem dump round trip") {
  const auto cp = constructed_suite(2);
  std::stringstream ss;
  write_problem(ss, cp.program);
  const auto text = ss.str();
  CHECK(text.rfind("conic-program 1\nn ", 0) == 0);
  const auto back = read_problem(ss);
  CHECK(back.c == cp.program.c);
  CHECK(back.b == cp.program.b);
  CHECK(back.A.data() == cp.program.A.data());
  CHECK(back.cone == cp.program.cone);

  std::stringstream bad("conic-program 1\nn 1\nm 1\ncones 1\ncircle 1\n");
  CHECK_THROWS_AS(read_problem(bad), std::runtime_error);
  CHECK_THROWS_AS(read_problem_file("/nonexistent/dir/file.txt"), std::runtime_error);
}
