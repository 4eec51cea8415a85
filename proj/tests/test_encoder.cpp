#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "drobf/encoder.hpp"
#include "support.hpp"

using namespace drobf;
using namespace testing;

namespace {

BeamformerProblem small_instance() {
  BeamformerProblem p;
  p.S0 = HermitianMatrix::identity(2);
  p.a0 = ComplexVector{{1.0, 0.0}, {0.0, 0.0}};
  p.Sigma = 0.1 * HermitianMatrix::identity(2);
  p.rho1 = 0.1;
  p.rho2 = 10.0;
  p.alpha = 1.0;
  return p;
}

BeamformerProblem random_instance(std::size_t n) {
  BeamformerProblem p;
  p.S0 = random_psd(n, n) + HermitianMatrix::identity(n);
  p.a0 = random_vector(n);
  p.Sigma = 0.05 * random_psd(n, n);
  p.rho1 = uniform(0.01, 1.0);
  p.rho2 = uniform(1.0, 100.0);
  p.alpha = uniform(0.5, 5.0);
  return p;
}

DroVariables random_variables(std::size_t n, bool with_lambda) {
  DroVariables v;
  v.W = random_psd(n, 2);
  v.X = random_hermitian(n);
  v.Y = random_psd(n, 1);
  v.Z = random_hermitian(n);
  v.x_vec = random_vector(n);
  v.x_scalar = gauss();
  v.t1 = gauss();
  v.t2 = gauss();
  v.lambda = with_lambda ? -std::abs(gauss()) : 0.0;
  return v;
}

double model_value(const EncodedProgram& enc, const SolverSolution& s) {
  return enc.objective_scale * s.primal_objective;
}

SolverSolution solve_tight(const EncodedProgram& enc) {
  SolverSettings st;
  st.tol_feas = st.tol_gap = 1e-9;
  return solve(enc.program, st);
}

nlohmann::json to_json(const HermitianMatrix& h) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = 0; j < h.size(); ++j) out.push_back({h(i, j).re, h(i, j).im});
  return out;
}

nlohmann::json to_json(const ComplexVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back({v[i].re, v[i].im});
  return out;
}

// Optimal value from the independent cvxpy formulation in dro_oracle.py.
double oracle_value(const BeamformerProblem& p) {
  nlohmann::json in{{"S0", to_json(p.S0)}, {"a0", to_json(p.a0)}, {"Sigma", to_json(p.Sigma)},
                    {"rho1", p.rho1}, {"rho2", p.rho2}};
  if (p.quad_support) {
    in["Q"] = to_json(p.quad_support->Q);
    in["q"] = to_json(p.quad_support->q);
    in["q0"] = p.quad_support->q0;
  }
  const auto path = std::filesystem::temp_directory_path() / "drobf_oracle_input.json";
  std::ofstream(path) << in.dump();
  const std::string cmd = std::string(DROBF_PYTHON) + " " + DROBF_SOURCE_DIR + "/tests/dro_oracle.py < " + path.string();
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string text;
  char buf[512];
  while (fgets(buf, sizeof buf, pipe)) text += buf;
  const int rc = pclose(pipe);
  std::filesystem::remove(path);
  INFO("oracle output: " << text);
  REQUIRE(rc == 0);
  const auto out = nlohmann::json::parse(text);
  return out.at("value").get<double>();
}

}  // namespace

TEST_CASE("layout and cone dimensions") {
  SUBCASE("N = 1") {
    auto p = small_instance();
    p.S0 = HermitianMatrix::identity(1);
    p.a0 = ComplexVector{{1.0, 0.0}};
    p.Sigma = 0.1 * HermitianMatrix::identity(1);
    const auto enc = build_relaxation(p);
    CHECK(enc.program.num_vars() == 9);
    const auto& blocks = enc.program.cone.blocks();
    REQUIRE(blocks.size() == 6);
    CHECK(blocks[0].kind == ConeKind::SecondOrder);
    CHECK(blocks[0].dim == 2);
    CHECK(blocks[1].kind == ConeKind::SecondOrder);
    CHECK(blocks[1].dim == 2);
    CHECK(blocks[2].kind == ConeKind::Nonneg);
    CHECK(blocks[2].dim == 1);
    CHECK(blocks[3].side == 4);
    CHECK(blocks[4].side == 2);
    CHECK(blocks[5].side == 2);
  }
  SUBCASE("N = 10") {
    const auto p = random_instance(10);
    const auto enc = build_relaxation(p);
    CHECK(enc.program.num_vars() == 423);
    CHECK(enc.layout.size() == 423);
    CHECK(build_penalized(p, HermitianMatrix::identity(10)).program.num_vars() == 423);
  }
  SUBCASE("layout offsets tile the vector") {
    const DroLayout L{3, true};
    CHECK(L.X() == 2);
    CHECK(L.Y() == 11);
    CHECK(L.W() == 20);
    CHECK(L.Z() == 29);
    CHECK(L.x_re() == 38);
    CHECK(L.x_im() == 41);
    CHECK(L.x_scalar() == 44);
    CHECK(L.lambda() == 45);
    CHECK(L.size() == 46);
  }
  SUBCASE("objective is normalized by the support radius") {
    auto p = small_instance();
    p.rho2 = 1e5;
    CHECK(build_relaxation(p).objective_scale == 1e5);
    p.rho2 = 0.5;
    CHECK(build_relaxation(p).objective_scale == 1.0);
  }
}

TEST_CASE("invalid problem data") {
  auto p = small_instance();
  p.rho1 = 0.0;
  CHECK_THROWS_AS(build_relaxation(p), std::invalid_argument);
  p = small_instance();
  p.alpha = -1.0;
  CHECK_THROWS_AS(build_relaxation(p), std::invalid_argument);
  p = small_instance();
  p.Sigma = HermitianMatrix::identity(3);
  CHECK_THROWS_AS(build_relaxation(p), std::invalid_argument);
  p = small_instance();
  p.Sigma = -1.0 * HermitianMatrix::identity(2);
  CHECK_THROWS_AS(build_relaxation(p), std::invalid_argument);
  p = small_instance();
  CHECK_THROWS_AS(build_penalized(p, HermitianMatrix(2)), std::invalid_argument);
  CHECK_THROWS_AS(build_quadratic_support(p), std::invalid_argument);
  // a support set with no interior point
  p.quad_support = QuadraticSupport{HermitianMatrix::identity(2), ComplexVector(2), 0.0, std::nullopt};
  CHECK_THROWS_AS(build_quadratic_support(p), std::invalid_argument);
  // Q not positive definite and no witness
  p.quad_support = QuadraticSupport{HermitianMatrix(2), ComplexVector(2), -1.0, std::nullopt};
  CHECK_THROWS_AS(build_quadratic_support(p), std::invalid_argument);
}

TEST_CASE("rank penalty") {
  SUBCASE("vanishes on the rank-one point itself") {
    for (int t = 0; t < 20; ++t) {
      const auto W = HermitianMatrix::outer(random_vector(5));
      CHECK(std::abs(rank_penalty(W, W, 3.0)) <= 1e-12 * W.trace());
    }
  }
  SUBCASE("identity against a unit direction") {
    const std::size_t n = 6;
    const auto e1 = HermitianMatrix::outer(ComplexVector::unit(n, 0));
    CHECK(rank_penalty(HermitianMatrix::identity(n), e1, 2.5) == doctest::Approx(2.5 * double(n - 1)));
  }
  SUBCASE("nonnegative on random PSD pairs") {
    for (int t = 0; t < 100; ++t) {
      const std::size_t n = 2 + std::size_t(t % 7);
      const auto W = random_psd(n, 1 + std::size_t(t % 3));
      const auto Wk = random_psd(n, 1 + std::size_t(t % 4));
      // independent evaluation: tr W − tr(W Wk)/‖Wk‖
      const double direct = W.trace() - trace_product(W, Wk) / Wk.frobenius_norm();
      CHECK(rank_penalty(W, Wk, 1.0) == doctest::Approx(direct).epsilon(1e-12));
      CHECK(direct >= -1e-12 * W.trace());
    }
  }
  SUBCASE("zero direction") { CHECK_THROWS_AS(rank_penalty(HermitianMatrix::identity(2), HermitianMatrix(2), 1.0), std::invalid_argument); }
}

TEST_CASE("program objective matches the model objective on any point") {
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + std::size_t(t % 5);
    const auto p = random_instance(n);
    const auto v = random_variables(n, false);
    const auto enc = build_relaxation(p);
    const RealVector u = encode(v, enc.layout);
    const double expect = p.rho1 * v.t1 + p.rho2 * v.t2 - trace_product(p.S0, v.X);
    CHECK(enc.objective_scale * dot(enc.program.c, u) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(model_objective(p, v) == doctest::Approx(expect).epsilon(1e-10));

    const auto Wk = random_psd(n, 1);
    const auto pen = build_penalized(p, Wk);
    CHECK(pen.objective_scale * dot(pen.program.c, u) ==
          doctest::Approx(expect + rank_penalty(v.W, Wk, p.alpha)).epsilon(1e-10));
  }
}

TEST_CASE("slack rows reproduce the model constraints") {
  // At an encoded point, the slack b − A·u of each block is the corresponding
  // model quantity, so the cone distances must match the decoded residuals.
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + std::size_t(t % 4);
    auto p = random_instance(n);
    const bool quad = t % 2 == 1;
    if (quad) p.quad_support = QuadraticSupport{HermitianMatrix::identity(n), -1.0 * p.a0, p.a0.norm_sq() - 1.0, std::nullopt};
    const auto v = random_variables(n, quad);
    const auto enc = quad ? build_quadratic_support(p) : build_relaxation(p);
    const RealVector u = encode(v, enc.layout);
    RealVector slack = enc.program.A.multiply(u);
    for (std::size_t i = 0; i < slack.size(); ++i) slack[i] = enc.program.b[i] - slack[i];

    // (a): (t1, vecH(X))
    CHECK(slack[0] == doctest::Approx(v.t1));
    const RealVector vx = vec_herm(v.X);
    for (std::size_t k = 0; k < n * n; ++k) CHECK(slack[1 + k] == doctest::Approx(vx[k]));
    // (b): (t2, vecH(W + X + Y))
    const std::size_t b0 = 1 + n * n;
    const RealVector vs = vec_herm(v.W + v.X + v.Y);
    CHECK(slack[b0] == doctest::Approx(v.t2));
    for (std::size_t k = 0; k < n * n; ++k) CHECK(slack[b0 + 1 + k] == doctest::Approx(vs[k]));
    // (c): moment row, evaluated independently
    const HermitianMatrix second = repair_covariance(p.Sigma) + HermitianMatrix::outer(p.a0);
    double lin = v.x_scalar + trace_product(v.Z, second);
    for (std::size_t i = 0; i < n; ++i) lin += (p.a0[i].conj() * v.x_vec[i]).re;
    CHECK(slack[2 * b0] == doctest::Approx(lin - 1.0).epsilon(1e-10));
    if (quad) CHECK(slack[2 * b0 + 1] == doctest::Approx(-v.lambda));

    const auto r = constraint_residuals(p, v);
    CHECK(r.psd_w <= 1e-10);
    CHECK(r.psd_y <= 1e-10);
    CHECK(r.moment == doctest::Approx(std::max(0.0, 1.0 - lin)).epsilon(1e-10));
    CHECK(r.norm_x == doctest::Approx(std::max(0.0, v.X.frobenius_norm() - v.t1)));
  }
}

TEST_CASE("encode and decode round trip") {
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + std::size_t(t % 6);
    const bool quad = t % 3 == 0;
    const DroLayout L{n, quad};
    const auto v = random_variables(n, quad);
    const auto back = decode(encode(v, L), L);
    CHECK(max_abs_diff(back.W, v.W) < 1e-14);
    CHECK(max_abs_diff(back.X, v.X) < 1e-14);
    CHECK(max_abs_diff(back.Y, v.Y) < 1e-14);
    CHECK(max_abs_diff(back.Z, v.Z) < 1e-14);
    for (std::size_t i = 0; i < n; ++i) CHECK((back.x_vec[i] - v.x_vec[i]).abs() < 1e-14);
    CHECK(back.x_scalar == v.x_scalar);
    CHECK(back.t1 == v.t1);
    CHECK(back.t2 == v.t2);
    CHECK(back.lambda == v.lambda);
  }
  CHECK_THROWS_AS(decode(RealVector(8), DroLayout{1, false}), std::invalid_argument);
}

TEST_CASE("Hermitian vectorization is isometric") {
  for (int t = 0; t < 100; ++t) {
    const auto h = random_hermitian(1 + std::size_t(t % 8));
    double fro = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
      for (std::size_t j = 0; j < h.size(); ++j) fro += h(i, j).norm_sq();
    CHECK(std::abs(norm2(vec_herm(h)) - std::sqrt(fro)) <= 1e-12 * (1.0 + std::sqrt(fro)));
  }
}

TEST_CASE("small instance against an independent solver") {
  const auto p = small_instance();
  const auto enc = build_relaxation(p);
  const auto s = solve_tight(enc);
  REQUIRE(s.optimal());
  const double ours = model_value(enc, s);
  const double reference = oracle_value(p);
  CHECK(std::abs(ours - reference) <= 1e-4 * (1.0 + std::abs(reference)));

  SUBCASE("solution transfers solver tolerance to the model") {
    const auto v = decode(s.u, enc.layout);
    const auto r = constraint_residuals(p, v);
    CHECK(r.max() <= 1e-6);
    CHECK(v.t1 >= v.X.frobenius_norm() - 1e-6);
    CHECK(v.t2 >= (v.W + v.X + v.Y).frobenius_norm() - 1e-6);
    CHECK(eig_herm(v.W).values.back() >= -1e-6);
    CHECK(model_objective(p, v) == doctest::Approx(ours).epsilon(1e-9));
  }
}

TEST_CASE("random N = 3 instance against an independent solver") {
  auto p = random_instance(3);
  p.rho2 = 2.0 * p.S0.frobenius_norm();
  const auto enc = build_relaxation(p);
  const auto s = solve_tight(enc);
  REQUIRE(s.optimal());
  const double reference = oracle_value(p);
  CHECK(std::abs(model_value(enc, s) - reference) <= 1e-4 * (1.0 + std::abs(reference)));
}

TEST_CASE("a support radius below the top eigenvalue of S0 is unbounded") {
  // X = t·vvᴴ along the top eigenvector gains t·λmax(S0) and costs (ρ1 + ρ2)·t
  auto p = small_instance();
  p.S0 = 5.0 * HermitianMatrix::identity(2);
  p.rho1 = 0.1;
  p.rho2 = 1.0;
  const auto s = solve(build_relaxation(p).program);
  CHECK(s.status == SolverStatus::DualInfeasible);
}

TEST_CASE("optimal value is nondecreasing in the mean-ball radius") {
  auto p = small_instance();
  double previous = -1e300;
  for (const double r1 : {0.01, 0.1, 1.0}) {
    p.rho1 = r1;
    const auto enc = build_relaxation(p);
    const auto s = solve_tight(enc);
    REQUIRE(s.optimal());
    const double v = model_value(enc, s);
    CHECK(v >= previous - 1e-6);
    previous = v;
  }
}

TEST_CASE("quadratic support") {
  const auto base = small_instance();
  const auto relax = build_relaxation(base);
  const auto rs = solve_tight(relax);
  REQUIRE(rs.optimal());
  const double relax_value = model_value(relax, rs);

  SUBCASE("a vacuous support reproduces the relaxation") {
    auto p = base;
    p.quad_support = QuadraticSupport{HermitianMatrix(2), ComplexVector(2), -1.0, ComplexVector(2)};
    const auto enc = build_quadratic_support(p);
    CHECK(enc.layout.size() == relax.layout.size() + 1);
    const auto s = solve_tight(enc);
    REQUIRE(s.optimal());
    CHECK(std::abs(model_value(enc, s) - relax_value) <= 1e-5);
    CHECK(decode(s.u, enc.layout).lambda <= 1e-9);
  }
  SUBCASE("lambda = 0 leaves the bordered block unchanged") {
    auto p = base;
    p.quad_support = QuadraticSupport{HermitianMatrix::identity(2), -1.0 * p.a0, p.a0.norm_sq() - 0.25, std::nullopt};
    const auto v = random_variables(2, false);
    const auto a = build_relaxation(p);
    const auto b = build_quadratic_support(p);
    RealVector ua = encode(v, a.layout), ub = encode(v, b.layout);
    RealVector sa = a.program.A.multiply(ua), sb = b.program.A.multiply(ub);
    // relaxation rows, then the extra λ row in the quadratic-support program
    const std::size_t split = 2 * (1 + 4) + 1;
    for (std::size_t i = 0; i < split; ++i) CHECK(sa[i] == sb[i]);
    for (std::size_t i = split; i < sa.size(); ++i) CHECK(sa[i] == sb[i + 1]);
  }
  SUBCASE("a ball around the mean gives no larger a worst case") {
    auto p = base;
    p.quad_support = QuadraticSupport{HermitianMatrix::identity(2), -1.0 * p.a0, p.a0.norm_sq() - 0.25, std::nullopt};
    const auto enc = build_quadratic_support(p);
    const auto s = solve_tight(enc);
    REQUIRE(s.optimal());
    const double ours = model_value(enc, s);
    CHECK(std::abs(ours - oracle_value(p)) <= 1e-4 * (1.0 + std::abs(ours)));
    CHECK(ours <= relax_value + 1e-5);
    const auto v = decode(s.u, enc.layout);
    CHECK(constraint_residuals(p, v).max() <= 1e-6);
  }
}

TEST_CASE("covariance repair") {
  const auto singular = HermitianMatrix::outer(ComplexVector{{1.0, 0.0}, {1.0, 0.0}});
  const auto fixed = repair_covariance(singular);
  CHECK(eig_herm(fixed).values.back() > 0.0);
  CHECK(max_abs_diff(fixed, singular) == doctest::Approx(1e-8 * singular.trace() / 2.0));
  const auto pd = HermitianMatrix::identity(3);
  CHECK(repair_covariance(pd) == pd);
}
