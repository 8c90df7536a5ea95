#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "levsample/datagen.hpp"
#include "levsample/fast_leverage.hpp"
#include "levsample/sampling.hpp"
#include "levsample/stats.hpp"

namespace levsample {

/// One estimator in an experiment grid.
struct SchemeSpec {
  Scheme scheme = Scheme::Unif;
  double alpha = 0.0;
  bool weighted = true;
  ScoreSource source = ScoreSource::Exact;
  /// Sketch sizes for approximate scores; 0 means r1 = 2p and r2 = ceil(10 ln n).
  Index r1 = 0;
  Index r2 = 0;
};

/// An experiment grid: every scheme is run at every r in r_grid.
///
/// JSON form (all keys but design, schemes and r_grid are optional):
///   {
///     "design": {"family": "T", "df": 1, "n": 1000, "p": 50, "seed": 7},
///     "sigma2": 9, "beta0": [...],
///     "schemes": ["UNIF", "LEV", {"name": "SLEV", "alpha": 0.9}, "LEVUNW",
///                 {"name": "LEV", "source": "bfast", "r1": 100, "r2": 70}],
///     "r_grid": [30, "5p", "10p"],
///     "mode": "unconditional", "reps": 1000, "master_seed": 1,
///     "output_dir": "out", "threads": 1
///   }
/// Entries of r_grid are counts or "<k>p" multiples of the column count.
struct ExperimentConfig {
  DesignSpec design;
  double sigma2 = 9.0;
  std::optional<Vector> beta0;
  std::vector<SchemeSpec> schemes;
  std::vector<Index> r_grid;
  StudyMode mode = StudyMode::Unconditional;
  Index reps = 1000;
  Seed master_seed = 1;
  std::filesystem::path output_dir = "levsample-out";
  std::optional<unsigned> threads;
  /// True when the config file set design.seed; otherwise the design seed
  /// follows master_seed, including when the master seed is overridden.
  bool design_seed_pinned = false;

  /// Replaces master_seed and, unless pinned, the design seed.
  void set_master_seed(Seed seed);
  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Stable JSON text; key order is fixed so equal configs give equal text.
  std::string canonical_json() const;
  /// 16 hex digits of FNV-1a over canonical_json().
  std::string digest() const;
};

/// Parses and validates; syntax errors report line and column.
ExperimentConfig parse_experiment_config(std::string_view text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct PhaseTiming {
  std::string phase;
  double seconds = 0.0;
};

struct RunRecord {
  std::string config_digest;
  std::vector<BiasVarianceReport> reports;  // one per (scheme, r)
  std::vector<PhaseTiming> timings;
  std::string version;
  std::string timestamp;
};

/// The regression problem an experiment studies: the generated design,
/// beta0 (default_beta unless given), and a response drawn from the master seed.
RegressionProblem build_problem(const ExperimentConfig& config);

/// Runs the grid. Every cell at the same r shares the seed
/// derive_seed(master_seed, {r_index}), so schemes are compared on common
/// random numbers. Output is independent of `threads`.
RunRecord run_experiment(const ExperimentConfig& config, unsigned threads);

/// Header: scheme,alpha,mode,weighted,r,reps,bias_sq,variance_trace,mse,
///         analytic_variance_trace,rank_deficient_count
void write_report_csv(std::ostream& out, const std::vector<BiasVarianceReport>& reports);
/// Per-coordinate rows: scheme,alpha,mode,weighted,r,coord,mean,reference,bias,variance,wls_reference
void write_report_coords_csv(std::ostream& out, const std::vector<BiasVarianceReport>& reports);
std::string run_record_json(const RunRecord& record, const ExperimentConfig& config);

/// Writes report.csv, report_coords.csv and run_record.json into `dir`.
void write_run_outputs(const RunRecord& record, const ExperimentConfig& config,
                       const std::filesystem::path& dir);

/// Header: scheme,alpha,r,seed,trial,rank,rank_deficient,beta_0..beta_{p-1}
void write_estimates_header(std::ostream& out, Index p);
void write_estimate_row(std::ostream& out, std::string_view scheme, double alpha, Index r,
                        Seed seed, Index trial, const SubsampleEstimate& est);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string timestamp_utc();

/// Header: n,p,method,r1,r2,median_seconds
void write_timing_csv(std::ostream& out, const std::vector<TimingRow>& rows);

}  // namespace levsample
