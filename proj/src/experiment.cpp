#include "drobf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace drobf {

using nlohmann::json;

std::string to_string(Method m) {
  switch (m) {
    case Method::Proposed: return "proposed";
    case Method::ProposedQuadSupport: return "proposed-quadsupport";
    case Method::MvdrSmi: return "mvdr-smi";
    case Method::DiagLoading: return "diag-loading";
    case Method::Optimal: return "optimal";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::Proposed, Method::ProposedQuadSupport, Method::MvdrSmi, Method::DiagLoading,
                   Method::Optimal})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::string to_string(SweepKind k) { return k == SweepKind::Snr ? "snr" : "snapshots"; }

SweepKind parse_sweep_kind(const std::string& name) {
  if (name == "snr") return SweepKind::Snr;
  if (name == "snapshots") return SweepKind::Snapshots;
  throw std::invalid_argument("unknown experiment '" + name + "' (expected snr or snapshots)");
}

std::vector<double> SnrSweep::points() const {
  if (!(step > 0.0)) throw std::invalid_argument("SNR sweep step must be positive");
  if (hi < lo) throw std::invalid_argument("SNR sweep upper end is below the lower end");
  std::vector<double> out;
  // index-based so that accumulated rounding cannot drop or add the last point
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) out.push_back(lo + step * double(i));
  return out;
}

void ExperimentConfig::validate() const {
  scenario.validate();
  if (runs < 1) throw std::invalid_argument("config: runs must be >= 1");
  if (methods.empty()) throw std::invalid_argument("config: methods must not be empty");
  if (kind == SweepKind::Snr) {
    (void)snr_sweep.points();
  } else {
    if (snapshot_sweep.empty()) throw std::invalid_argument("config: snapshot sweep is empty");
    for (auto t : snapshot_sweep)
      if (t < 1) throw std::invalid_argument("config: snapshot counts must be >= 1");
  }
  if (!(rho1_factor > 0.0) || !(rho2 > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("config: rho1_factor, rho2 and alpha must be positive");
  if (!(loading_factor >= 0.0)) throw std::invalid_argument("config: loading_factor must be nonnegative");
  driver.solver.validate();
  if (driver.max_penalized_iters < 0) throw std::invalid_argument("config: max_penalized_iters must be >= 0");
  if (!(driver.rank_tau > 0.0) || !(driver.gap_tol > 0.0))
    throw std::invalid_argument("config: rank_tau and gap_tol must be positive");
}

std::vector<double> ExperimentConfig::sweep_values() const {
  if (kind == SweepKind::Snr) return snr_sweep.points();
  std::vector<double> out;
  for (auto t : snapshot_sweep) out.push_back(double(t));
  return out;
}

Scenario ExperimentConfig::scenario_at(double v) const {
  Scenario s = scenario;
  if (kind == SweepKind::Snr) s.snr_db = v;
  else s.snapshots = static_cast<std::size_t>(v);
  return s;
}

// ---------------------------------------------------------------- JSON

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_scenario(const json& j, Scenario& s) {
  reject_unknown(j,
                 {"sensors", "interference", "theta_actual_deg", "theta_presumed_deg", "sector_deg", "snr_db",
                  "snapshots", "phase_std", "moment_samples", "noise_power", "distortion_seed"},
                 "scenario");
  read(j, "sensors", s.sensors);
  if (j.contains("interference")) {
    s.interference.clear();
    for (const auto& e : j.at("interference")) {
      reject_unknown(e, {"angle_deg", "inr_db"}, "interference entry");
      s.interference.push_back({e.at("angle_deg").get<double>(), e.at("inr_db").get<double>()});
    }
  }
  read(j, "theta_actual_deg", s.theta_actual_deg);
  read(j, "theta_presumed_deg", s.theta_presumed_deg);
  if (j.contains("sector_deg")) {
    const auto sec = j.at("sector_deg").get<std::vector<double>>();
    if (sec.size() != 2) throw std::invalid_argument("config: sector_deg needs two entries");
    s.sector_lo_deg = sec[0];
    s.sector_hi_deg = sec[1];
  }
  read(j, "snr_db", s.snr_db);
  read(j, "snapshots", s.snapshots);
  read(j, "phase_std", s.phase_std);
  read(j, "moment_samples", s.moment_samples);
  read(j, "noise_power", s.noise_power);
  if (j.contains("distortion_seed")) {
    if (j.at("distortion_seed").is_null()) s.distortion_seed.reset();
    else s.distortion_seed = j.at("distortion_seed").get<std::uint64_t>();
  }
}

void read_solver(const json& j, SolverSettings& s) {
  reject_unknown(j,
                 {"tol_feas", "tol_gap", "max_iters", "over_relaxation", "equilibrate", "sigma", "rho",
                  "check_interval", "infeasibility_interval", "adaptive_rho", "adapt_interval", "adapt_threshold"},
                 "solver");
  read(j, "tol_feas", s.tol_feas);
  read(j, "tol_gap", s.tol_gap);
  read(j, "max_iters", s.max_iters);
  read(j, "over_relaxation", s.over_relaxation);
  read(j, "equilibrate", s.equilibrate);
  read(j, "sigma", s.sigma);
  read(j, "rho", s.rho);
  read(j, "check_interval", s.check_interval);
  read(j, "infeasibility_interval", s.infeasibility_interval);
  read(j, "adaptive_rho", s.adaptive_rho);
  read(j, "adapt_interval", s.adapt_interval);
  read(j, "adapt_threshold", s.adapt_threshold);
}

void read_driver(const json& j, DriverSettings& d) {
  reject_unknown(j, {"rank_tau", "gap_tol", "max_penalized_iters", "warm_start"}, "driver");
  read(j, "rank_tau", d.rank_tau);
  read(j, "gap_tol", d.gap_tol);
  read(j, "max_penalized_iters", d.max_penalized_iters);
  read(j, "warm_start", d.warm_start);
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  reject_unknown(j,
                 {"experiment", "scenario", "snr_sweep", "snapshot_sweep", "runs", "seed", "methods", "rho1_factor",
                  "rho2", "alpha", "loading_factor", "solver", "driver", "threads", "output", "dump_problems",
                  "record_timing"},
                 "config");
  try {
    if (j.contains("experiment")) cfg.kind = parse_sweep_kind(j.at("experiment").get<std::string>());
    if (j.contains("scenario")) read_scenario(j.at("scenario"), cfg.scenario);
    if (j.contains("snr_sweep")) {
      const auto& s = j.at("snr_sweep");
      reject_unknown(s, {"lo", "hi", "step"}, "snr_sweep");
      read(s, "lo", cfg.snr_sweep.lo);
      read(s, "hi", cfg.snr_sweep.hi);
      read(s, "step", cfg.snr_sweep.step);
    }
    read(j, "snapshot_sweep", cfg.snapshot_sweep);
    read(j, "runs", cfg.runs);
    read(j, "seed", cfg.seed);
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j.at("methods")) cfg.methods.push_back(parse_method(m.get<std::string>()));
    }
    read(j, "rho1_factor", cfg.rho1_factor);
    read(j, "rho2", cfg.rho2);
    read(j, "alpha", cfg.alpha);
    read(j, "loading_factor", cfg.loading_factor);
    if (j.contains("solver")) read_solver(j.at("solver"), cfg.driver.solver);
    if (j.contains("driver")) read_driver(j.at("driver"), cfg.driver);
    read(j, "threads", cfg.threads);
    read(j, "output", cfg.output);
    read(j, "dump_problems", cfg.dump_dir);
    read(j, "record_timing", cfg.record_timing);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  const Scenario& s = cfg.scenario;
  json interference = json::array();
  for (const auto& i : s.interference) interference.push_back({{"angle_deg", i.angle_deg}, {"inr_db", i.inr_db}});
  json methods = json::array();
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  const SolverSettings& so = cfg.driver.solver;
  return {
      {"experiment", to_string(cfg.kind)},
      {"scenario",
       {{"sensors", s.sensors},
        {"interference", interference},
        {"theta_actual_deg", s.theta_actual_deg},
        {"theta_presumed_deg", s.theta_presumed_deg},
        {"sector_deg", {s.sector_lo_deg, s.sector_hi_deg}},
        {"snr_db", s.snr_db},
        {"snapshots", s.snapshots},
        {"phase_std", s.phase_std},
        {"moment_samples", s.moment_samples},
        {"noise_power", s.noise_power},
        {"distortion_seed", s.distortion_seed ? json(*s.distortion_seed) : json(nullptr)}}},
      {"snr_sweep", {{"lo", cfg.snr_sweep.lo}, {"hi", cfg.snr_sweep.hi}, {"step", cfg.snr_sweep.step}}},
      {"snapshot_sweep", cfg.snapshot_sweep},
      {"runs", cfg.runs},
      {"seed", cfg.seed},
      {"methods", methods},
      {"rho1_factor", cfg.rho1_factor},
      {"rho2", cfg.rho2},
      {"alpha", cfg.alpha},
      {"loading_factor", cfg.loading_factor},
      {"solver",
       {{"tol_feas", so.tol_feas},
        {"tol_gap", so.tol_gap},
        {"max_iters", so.max_iters},
        {"over_relaxation", so.over_relaxation},
        {"equilibrate", so.equilibrate},
        {"sigma", so.sigma},
        {"rho", so.rho},
        {"check_interval", so.check_interval},
        {"infeasibility_interval", so.infeasibility_interval},
        {"adaptive_rho", so.adaptive_rho},
        {"adapt_interval", so.adapt_interval},
        {"adapt_threshold", so.adapt_threshold}}},
      {"driver",
       {{"rank_tau", cfg.driver.rank_tau},
        {"gap_tol", cfg.driver.gap_tol},
        {"max_penalized_iters", cfg.driver.max_penalized_iters},
        {"warm_start", cfg.driver.warm_start}}},
      {"threads", cfg.threads},
      {"output", cfg.output},
      {"dump_problems", cfg.dump_dir},
      {"record_timing", cfg.record_timing},
  };
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: " + path + ": " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------- runs

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run) { return base_seed + run; }

QuadraticSupport sector_ball_support(const Scenario& s, const ComplexVector& a0) {
  constexpr int kGrid = 400;
  double r2 = 0.0;
  for (int g = 0; g <= kGrid; ++g) {
    const double theta = s.sector_lo_deg + (s.sector_hi_deg - s.sector_lo_deg) * double(g) / kGrid;
    r2 = std::max(r2, (steering(theta, s.sensors) - a0).norm_sq());
  }
  QuadraticSupport qs;
  qs.Q = HermitianMatrix::identity(s.sensors);
  qs.q = a0;
  qs.q *= Complex(-1.0);
  qs.q0 = a0.norm_sq() - r2;
  qs.witness = a0;
  return qs;
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ResultRow evaluate_method(const ExperimentConfig& cfg, Method m, const Scenario& s, const ScenarioRealization& r,
                          double sweep_value, std::uint64_t seed) {
  ResultRow row;
  row.experiment = to_string(cfg.kind);
  row.sweep_value = sweep_value;
  row.method = m;
  row.seed = seed;
  const double sp = s.signal_power();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (m) {
      case Method::Proposed:
      case Method::ProposedQuadSupport: {
        BeamformerProblem p{r.R_hat, r.a0, r.Sigma, cfg.rho1_factor * r.R_hat.frobenius_norm(), cfg.rho2,
                            cfg.alpha, std::nullopt};
        DriverSettings ds = cfg.driver;
        if (m == Method::ProposedQuadSupport) {
          p.quad_support = sector_ball_support(s, r.a0);
          ds.quad_support = true;
        }
        if (!cfg.dump_dir.empty()) {
          const std::string stem = cfg.dump_dir + "/" + row.experiment + "_" + [&] {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", sweep_value);
            return std::string(buf);
          }() + "_" + to_string(m) + "_" + std::to_string(seed);
          ds.program_sink = [stem](const ConicProgram& prog, int k) {
            write_problem_file(stem + "_it" + std::to_string(k) + ".txt", prog);
          };
        }
        const DriverResult res = run_driver(p, ds);
        row.sinr_db = output_sinr_db(res.w, r.a_true, r.R_true, sp);
        row.converged = res.converged;
        row.iterations = res.iterations;
        if (!res.converged) row.error = "penalized iteration cap reached";
        break;
      }
      case Method::MvdrSmi:
        row.sinr_db = output_sinr_db(mvdr_smi(r.R_hat, r.a_presumed), r.a_true, r.R_true, sp);
        row.converged = true;
        break;
      case Method::DiagLoading:
        row.sinr_db = output_sinr_db(diag_loading(r.R_hat, r.a_presumed, cfg.loading_factor * s.noise_power),
                                     r.a_true, r.R_true, sp);
        row.converged = true;
        break;
      case Method::Optimal:
        row.sinr_db = output_sinr_db(solve_hpd(r.R_true, r.a_true), r.a_true, r.R_true, sp);
        row.converged = true;
        break;
    }
  } catch (const std::exception& e) {
    row.sinr_db = std::numeric_limits<double>::quiet_NaN();
    row.converged = false;
    row.error = e.what();
  }
  row.wall_ms = cfg.record_timing ? elapsed_ms(t0) : 0.0;
  return row;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.dump_dir.empty()) std::filesystem::create_directories(cfg.dump_dir);

  const std::vector<double> values = cfg.sweep_values();
  const std::size_t jobs = values.size() * cfg.runs;
  std::vector<std::vector<ResultRow>> per_job(jobs);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t point = job / cfg.runs;
      const std::size_t run = job % cfg.runs;
      const Scenario s = cfg.scenario_at(values[point]);
      const std::uint64_t seed = run_seed(cfg.seed, run);
      // one realization shared by every method of this (point, run)
      const ScenarioRealization r = realize(s, seed, 0);
      for (Method m : cfg.methods) per_job[job].push_back(evaluate_method(cfg, m, s, r, values[point], seed));
    }
  };

  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  ExperimentResult out;
  for (auto& rows : per_job)
    for (auto& row : rows) out.rows.push_back(std::move(row));
  sort_rows(out.rows);
  out.aggregates = aggregate(out.rows);
  return out;
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
    if (a.method != b.method) return to_string(a.method) < to_string(b.method);
    return a.seed < b.seed;
  });
}

std::vector<Aggregate> aggregate(const std::vector<ResultRow>& rows) {
  std::vector<ResultRow> sorted = rows;
  sort_rows(sorted);
  std::vector<Aggregate> out;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    Aggregate a;
    a.sweep_value = sorted[i].sweep_value;
    a.method = sorted[i].method;
    double sum = 0.0;
    while (j < sorted.size() && sorted[j].sweep_value == a.sweep_value && sorted[j].method == a.method) {
      if (std::isfinite(sorted[j].sinr_db)) {
        ++a.count;
        sum += sorted[j].sinr_db;
      }
      if (sorted[j].converged) ++a.converged;
      ++j;
    }
    a.mean_db = a.count ? sum / double(a.count) : std::numeric_limits<double>::quiet_NaN();
    if (a.count > 1) {
      double ss = 0.0;
      for (std::size_t k = i; k < j; ++k)
        if (std::isfinite(sorted[k].sinr_db)) ss += (sorted[k].sinr_db - a.mean_db) * (sorted[k].sinr_db - a.mean_db);
      a.std_db = std::sqrt(ss / double(a.count - 1));
    }
    out.push_back(a);
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------- CSV

namespace {

std::string format_number(double v, const char* spec) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Sweep values are short labels; measured columns keep six decimals so a
// parsed file reproduces means to well under 1e-5 dB.
std::string label(double v) { return format_number(v, "%.6g"); }
std::string measured(double v) { return format_number(v, "%.6f"); }

constexpr const char* kHeader = "experiment,sweep_value,method,seed,sinr_db,converged,iterations,wall_ms";

}  // namespace

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("write_csv: no rows");
  std::vector<ResultRow> sorted = rows;
  sort_rows(sorted);
  out << kHeader << '\n';
  for (const auto& r : sorted) {
    out << r.experiment << ',' << label(r.sweep_value) << ',' << to_string(r.method) << ',' << r.seed << ','
        << measured(r.sinr_db) << ',' << (r.converged ? 1 : 0) << ',' << r.iterations << ',' << measured(r.wall_ms)
        << '\n';
  }
}

void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  write_csv(out, rows);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw std::runtime_error("read_csv: missing or wrong header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw std::runtime_error("read_csv: expected 8 fields in '" + line + "'");
    ResultRow r;
    r.experiment = f[0];
    r.sweep_value = std::stod(f[1]);
    r.method = parse_method(f[2]);
    r.seed = std::stoull(f[3]);
    r.sinr_db = std::stod(f[4]);
    r.converged = f[5] == "1";
    r.iterations = std::stoi(f[6]);
    r.wall_ms = std::stod(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_summary(std::ostream& out, const std::vector<Aggregate>& aggregates) {
  out << "sweep_value,method,count,converged,mean_sinr_db,std_sinr_db\n";
  for (const auto& a : aggregates)
    out << label(a.sweep_value) << ',' << to_string(a.method) << ',' << a.count << ',' << a.converged << ','
        << format_number(a.mean_db, "%.4f") << ',' << format_number(a.std_db, "%.4f") << '\n';
}

}  // namespace drobf
