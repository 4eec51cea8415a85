#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "drobf/hermitian.hpp"

namespace drobf {

struct Interferer {
  double angle_deg = 0.0;
  double inr_db = 0.0;
};

/// Uniform linear array scenario with half-wavelength spacing.
struct Scenario {
  std::size_t sensors = 10;
  std::vector<Interferer> interference{{-5.0, 30.0}, {15.0, 30.0}};
  double theta_actual_deg = 5.0;
  double theta_presumed_deg = 1.0;
  double sector_lo_deg = 0.0;
  double sector_hi_deg = 10.0;
  double snr_db = 10.0;
  std::size_t snapshots = 100;
  /// Standard deviation of each accumulated phase increment (radians).
  double phase_std = 0.02;
  /// Number of sector angles drawn to estimate the steering moments.
  std::size_t moment_samples = 100;
  double noise_power = 1.0;
  /// When set, every run reuses the distortion drawn from this seed.
  std::optional<std::uint64_t> distortion_seed;

  double signal_power() const;
  double interferer_power(const Interferer& i) const;
  void validate() const;
};

/// Seeded generator with independent substreams per (seed, run, stream).
class Rng {
 public:
  enum Stream : std::uint64_t { kDistortion = 1, kSnapshots = 2, kMoments = 3, kTest = 99 };

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  static Rng substream(std::uint64_t seed, std::uint64_t run, std::uint64_t stream);

  double gaussian(double stddev = 1.0) { return stddev * normal_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
  /// Circularly symmetric complex Gaussian with E|z|² = variance.
  Complex complex_gaussian(double variance);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

/// Mixes (seed, run, stream) into one 64-bit seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t run, std::uint64_t stream);

/// Element n (0-based) is exp(jπ·n·sin θ).
ComplexVector steering(double theta_deg, std::size_t n);

/// Multiplies element n by exp(jφ_n) with φ_n the running sum of n+1
/// independent N(0, std²) increments; the first element is distorted too.
ComplexVector distort_phase(const ComplexVector& a, double std, Rng& rng);

/// Σ_k σ_k²·d(θ_k)d(θ_k)ᴴ + σ_n²·I.
HermitianMatrix true_inc(const Scenario& s);

/// T columns y(t) = s(t)·a + Σ_k i_k(t)·d(θ_k) + n(t).
std::vector<ComplexVector> snapshots(const Scenario& s, const ComplexVector& a_true, std::size_t count, Rng& rng);

/// (1/T)·Σ y(t)y(t)ᴴ.
HermitianMatrix sample_cov(const std::vector<ComplexVector>& columns);

struct SteeringMoments {
  ComplexVector a0;
  HermitianMatrix Sigma;
};

/// Sample mean and (1/L) covariance of d(θ_l), θ_l uniform over the sector.
SteeringMoments moments(const Scenario& s, Rng& rng);

struct ScenarioRealization {
  ComplexVector a_true;
  ComplexVector a_presumed;
  HermitianMatrix R_true;
  HermitianMatrix R_hat;
  ComplexVector a0;
  HermitianMatrix Sigma;
};

/// One Monte-Carlo realization; identical (scenario, seed, run) gives
/// bitwise-identical output.
ScenarioRealization realize(const Scenario& s, std::uint64_t seed, std::uint64_t run);

double output_sinr(const ComplexVector& w, const ComplexVector& a_true, const HermitianMatrix& R,
                   double signal_power);
/// 10·log10 of output_sinr.
double output_sinr_db(const ComplexVector& w, const ComplexVector& a_true, const HermitianMatrix& R,
                      double signal_power);

/// σ_s²·aᴴR⁻¹a, the largest achievable SINR.
double optimal_sinr(const ComplexVector& a_true, const HermitianMatrix& R, double signal_power);

/// (R + γI)⁻¹a / (aᴴ(R + γI)⁻¹a).
ComplexVector diag_loading(const HermitianMatrix& R_hat, const ComplexVector& a, double gamma);
/// diag_loading with γ = 0, falling back to a 1e-8·trace(R)/N ridge when R is singular.
ComplexVector mvdr_smi(const HermitianMatrix& R_hat, const ComplexVector& a);

}  // namespace drobf
