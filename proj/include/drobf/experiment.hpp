#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "drobf/array_sim.hpp"
#include "drobf/rank_one.hpp"

namespace drobf {

enum class Method { Proposed, ProposedQuadSupport, MvdrSmi, DiagLoading, Optimal };

std::string to_string(Method m);
/// Accepts the names produced by to_string; throws std::invalid_argument otherwise.
Method parse_method(const std::string& name);

enum class SweepKind { Snr, Snapshots };

std::string to_string(SweepKind k);
SweepKind parse_sweep_kind(const std::string& name);

struct SnrSweep {
  double lo = -10.0;
  double hi = 20.0;
  double step = 5.0;

  std::vector<double> points() const;
};

struct ExperimentConfig {
  Scenario scenario;
  SweepKind kind = SweepKind::Snr;
  SnrSweep snr_sweep;
  std::vector<std::size_t> snapshot_sweep{20, 40, 60, 100, 140, 200};
  std::size_t runs = 200;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::Proposed, Method::MvdrSmi, Method::DiagLoading, Method::Optimal};

  /// ρ1 = rho1_factor·‖S0‖_F with S0 the sample covariance.
  double rho1_factor = 1e-3;
  double rho2 = 1e5;
  double alpha = 1e5;
  /// Diagonal loading level in units of the noise power.
  double loading_factor = 10.0;

  DriverSettings driver;

  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  std::string output = "results.csv";
  /// When set, every conic program handed to the solver is written here.
  std::string dump_dir;
  /// When false the wall_ms column is written as 0 so repeated runs produce identical bytes.
  bool record_timing = true;

  void validate() const;
  /// Sweep values in order: SNR in dB or snapshot counts.
  std::vector<double> sweep_values() const;
  /// The scenario at one sweep value.
  Scenario scenario_at(double sweep_value) const;
};

/// Starts from the defaults and overrides every key present in `j`.
/// Unknown keys are rejected so that typos do not silently fall back to defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

struct ResultRow {
  std::string experiment;
  double sweep_value = 0.0;
  Method method = Method::Optimal;
  std::uint64_t seed = 0;
  double sinr_db = 0.0;
  bool converged = false;
  int iterations = 0;
  double wall_ms = 0.0;
  /// Not written to CSV; explains a failed row.
  std::string error;
};

struct Aggregate {
  double sweep_value = 0.0;
  Method method = Method::Optimal;
  std::size_t count = 0;      // rows with finite SINR
  std::size_t converged = 0;
  double mean_db = 0.0;
  double std_db = 0.0;        // sample standard deviation, 0 for a single row
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // sorted by (sweep_value, method, seed)
  std::vector<Aggregate> aggregates;
};

/// The seed recorded for run `run`; it also keys that run's random streams,
/// so every method at one (sweep value, run) sees the same realization.
std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run);

/// Support set of the proposed-quadsupport method: the ball ‖a − a0‖² ≤ r²
/// where r is the largest distance from a0 to a look-sector steering vector
/// (sector sampled on a 401-point grid). a0 itself is the Slater witness.
QuadraticSupport sector_ball_support(const Scenario& s, const ComplexVector& a0);

/// Evaluates one method on one realization. Never throws for solver trouble:
/// failures come back as converged = false with the reason in `error`.
ResultRow evaluate_method(const ExperimentConfig& cfg, Method m, const Scenario& s,
                          const ScenarioRealization& r, double sweep_value, std::uint64_t seed);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

void sort_rows(std::vector<ResultRow>& rows);
std::vector<Aggregate> aggregate(const std::vector<ResultRow>& rows);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(std::istream& in);

void write_summary(std::ostream& out, const std::vector<Aggregate>& aggregates);

}  // namespace drobf
