#include "drobf/array_sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace drobf {

double Scenario::signal_power() const { return noise_power * std::pow(10.0, snr_db / 10.0); }

double Scenario::interferer_power(const Interferer& i) const { return noise_power * std::pow(10.0, i.inr_db / 10.0); }

void Scenario::validate() const {
  auto angle_ok = [](double a) { return a > -90.0 && a < 90.0; };
  if (sensors < 2) throw std::invalid_argument("Scenario: need at least 2 sensors");
  if (snapshots < 1) throw std::invalid_argument("Scenario: need at least 1 snapshot");
  if (moment_samples < 2) throw std::invalid_argument("Scenario: need at least 2 moment samples");
  if (!(phase_std >= 0.0)) throw std::invalid_argument("Scenario: phase_std must be nonnegative");
  if (!(noise_power > 0.0)) throw std::invalid_argument("Scenario: noise_power must be positive");
  if (!angle_ok(theta_actual_deg) || !angle_ok(theta_presumed_deg) || !angle_ok(sector_lo_deg) ||
      !angle_ok(sector_hi_deg))
    throw std::invalid_argument("Scenario: angles must lie in (-90, 90)");
  if (sector_lo_deg > sector_hi_deg) throw std::invalid_argument("Scenario: empty sector");
  for (const auto& i : interference)
    if (!angle_ok(i.angle_deg)) throw std::invalid_argument("Scenario: interferer angle must lie in (-90, 90)");
}

// splitmix64 finalizer
static std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t run, std::uint64_t stream) {
  return splitmix(splitmix(splitmix(seed) ^ run) ^ (stream * 0xd1b54a32d192ed03ULL));
}

Rng Rng::substream(std::uint64_t seed, std::uint64_t run, std::uint64_t stream) {
  return Rng(mix_seed(seed, run, stream));
}

Complex Rng::complex_gaussian(double variance) {
  const double sd = std::sqrt(variance / 2.0);
  const double re = gaussian(sd);
  const double im = gaussian(sd);
  return {re, im};
}

ComplexVector steering(double theta_deg, std::size_t n) {
  const double phase = std::numbers::pi * std::sin(theta_deg * std::numbers::pi / 180.0);
  ComplexVector d(n);
  for (std::size_t k = 0; k < n; ++k) d[k] = Complex::polar(1.0, phase * double(k));
  return d;
}

ComplexVector distort_phase(const ComplexVector& a, double std, Rng& rng) {
  ComplexVector out = a;
  if (std == 0.0) return out;
  double phi = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    phi += rng.gaussian(std);
    out[k] = a[k] * Complex::polar(1.0, phi);
  }
  return out;
}

HermitianMatrix true_inc(const Scenario& s) {
  const std::size_t n = s.sensors;
  HermitianMatrix r = s.noise_power * HermitianMatrix::identity(n);
  for (const auto& i : s.interference) r += s.interferer_power(i) * HermitianMatrix::outer(steering(i.angle_deg, n));
  return r;
}

std::vector<ComplexVector> snapshots(const Scenario& s, const ComplexVector& a_true, std::size_t count, Rng& rng) {
  const std::size_t n = s.sensors;
  if (a_true.size() != n) throw std::invalid_argument("snapshots: steering vector has wrong length");
  std::vector<ComplexVector> interf;
  std::vector<double> powers;
  for (const auto& i : s.interference) {
    interf.push_back(steering(i.angle_deg, n));
    powers.push_back(s.interferer_power(i));
  }
  const double ps = s.signal_power();
  std::vector<ComplexVector> cols;
  cols.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    ComplexVector y(n);
    const Complex st = rng.complex_gaussian(ps);
    for (std::size_t k = 0; k < n; ++k) y[k] = st * a_true[k];
    for (std::size_t j = 0; j < interf.size(); ++j) {
      const Complex it = rng.complex_gaussian(powers[j]);
      for (std::size_t k = 0; k < n; ++k) y[k] += it * interf[j][k];
    }
    for (std::size_t k = 0; k < n; ++k) y[k] += rng.complex_gaussian(s.noise_power);
    cols.push_back(std::move(y));
  }
  return cols;
}

HermitianMatrix sample_cov(const std::vector<ComplexVector>& columns) {
  if (columns.empty()) throw std::invalid_argument("sample_cov: no snapshots");
  const std::size_t n = columns.front().size();
  HermitianMatrix r(n);
  for (const auto& y : columns) r += HermitianMatrix::outer(y);
  r *= 1.0 / double(columns.size());
  return r;
}

SteeringMoments moments(const Scenario& s, Rng& rng) {
  const std::size_t n = s.sensors;
  const std::size_t L = s.moment_samples;
  std::vector<ComplexVector> d;
  d.reserve(L);
  for (std::size_t l = 0; l < L; ++l) d.push_back(steering(rng.uniform(s.sector_lo_deg, s.sector_hi_deg), n));
  SteeringMoments m{ComplexVector(n), HermitianMatrix(n)};
  for (const auto& v : d) m.a0 += v;
  m.a0 *= Complex(1.0 / double(L));
  for (const auto& v : d) m.Sigma += HermitianMatrix::outer(v - m.a0);
  m.Sigma *= 1.0 / double(L);
  return m;
}

ScenarioRealization realize(const Scenario& s, std::uint64_t seed, std::uint64_t run) {
  s.validate();
  ScenarioRealization r;
  const std::size_t n = s.sensors;
  r.a_presumed = steering(s.theta_presumed_deg, n);
  Rng dist = s.distortion_seed ? Rng::substream(*s.distortion_seed, 0, Rng::kDistortion)
                               : Rng::substream(seed, run, Rng::kDistortion);
  r.a_true = distort_phase(steering(s.theta_actual_deg, n), s.phase_std, dist);
  r.R_true = true_inc(s);
  Rng snap = Rng::substream(seed, run, Rng::kSnapshots);
  r.R_hat = sample_cov(snapshots(s, r.a_true, s.snapshots, snap));
  Rng mom = Rng::substream(seed, run, Rng::kMoments);
  SteeringMoments m = moments(s, mom);
  r.a0 = std::move(m.a0);
  r.Sigma = std::move(m.Sigma);
  return r;
}

double output_sinr(const ComplexVector& w, const ComplexVector& a_true, const HermitianMatrix& R,
                   double signal_power) {
  if (!(w.norm_sq() > 0.0)) throw std::invalid_argument("output_sinr: zero beamformer");
  return signal_power * inner(w, a_true).norm_sq() / R.quadratic_form(w);
}

double output_sinr_db(const ComplexVector& w, const ComplexVector& a_true, const HermitianMatrix& R,
                      double signal_power) {
  return 10.0 * std::log10(output_sinr(w, a_true, R, signal_power));
}

double optimal_sinr(const ComplexVector& a_true, const HermitianMatrix& R, double signal_power) {
  return signal_power * inner(a_true, solve_hpd(R, a_true)).re;
}

ComplexVector diag_loading(const HermitianMatrix& R_hat, const ComplexVector& a, double gamma) {
  const std::size_t n = R_hat.size();
  const HermitianMatrix loaded = R_hat + gamma * HermitianMatrix::identity(n);
  ComplexVector v = solve_hpd(loaded, a);
  const double denom = inner(a, v).re;
  v *= Complex(1.0 / denom);
  return v;
}

ComplexVector mvdr_smi(const HermitianMatrix& R_hat, const ComplexVector& a) {
  try {
    return diag_loading(R_hat, a, 0.0);
  } catch (const std::domain_error&) {
    const double ridge = 1e-8 * R_hat.trace() / double(R_hat.size());
    return diag_loading(R_hat, a, ridge);
  }
}

}  // namespace drobf
