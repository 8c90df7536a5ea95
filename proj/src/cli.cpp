#include "levsample/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "levsample/datagen.hpp"
#include "levsample/experiment.hpp"
#include "levsample/fast_leverage.hpp"
#include "levsample/linalg.hpp"
#include "levsample/matrix_io.hpp"
#include "levsample/parallel.hpp"
#include "levsample/rng.hpp"
#include "levsample/sampling.hpp"

namespace levsample {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

std::ofstream open_file(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

fs::path design_path(const fs::path& input) {
  return fs::is_directory(input) ? input / "design.csv" : input;
}

Json summary_json(const LeverageSummary& s) {
  return Json{{"min", s.min},       {"median", s.median},
              {"max", s.max},       {"mean", s.mean},
              {"std_dev", s.std_dev}, {"max_over_min", s.max_over_min},
              {"max_over_mean", s.max_over_mean}, {"max_over_median", s.max_over_median}};
}

Json design_json(const DesignSpec& d) {
  return Json{{"family", to_string(d.family)}, {"n", d.n}, {"p", d.p},
              {"df", d.df},                    {"keep", d.keep}, {"seed", d.seed}};
}

std::vector<std::pair<Index, Index>> parse_sizes(const std::string& text) {
  std::vector<std::pair<Index, Index>> sizes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find_first_of("xX");
    try {
      if (x == std::string::npos) throw std::invalid_argument(item);
      std::size_t used_n = 0;
      std::size_t used_p = 0;
      const long long n = std::stoll(item.substr(0, x), &used_n);
      const long long p = std::stoll(item.substr(x + 1), &used_p);
      if (used_n != x || used_p != item.size() - x - 1 || n < 1 || p < 1 || n < p) {
        throw std::invalid_argument(item);
      }
      sizes.emplace_back(static_cast<Index>(n), static_cast<Index>(p));
    } catch (const std::exception&) {
      throw ConfigError("--sizes: bad entry '" + item + "' (expected NxP with N >= P >= 1)");
    }
  }
  if (sizes.empty()) throw ConfigError("--sizes: no sizes given");
  return sizes;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

struct GenDataArgs {
  std::string config;
  std::string family;
  Index n = 0;
  Index p = 0;
  int df = 3;
  Index keep = 50;
  double sigma2 = 1.0;
  Seed seed = 1;
  std::string out = "levsample-data";
};

int cmd_gen_data(const GenDataArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  if (!a.config.empty()) {
    cfg = load_experiment_config(a.config);
  } else {
    if (a.family.empty()) throw ConfigError("gen-data: --family or --config is required");
    cfg.sigma2 = a.sigma2;
  }
  if (!a.family.empty()) {
    try {
      cfg.design.family = design_family_from_string(a.family);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--family: ") + e.what());
    }
  }
  if (sub.count("--n") > 0) cfg.design.n = a.n;
  if (sub.count("--p") > 0) cfg.design.p = a.p;
  if (sub.count("--df") > 0) cfg.design.df = a.df;
  if (sub.count("--keep") > 0) cfg.design.keep = a.keep;
  if (sub.count("--sigma2") > 0) cfg.sigma2 = a.sigma2;
  if (sub.count("--seed") > 0 || a.config.empty()) cfg.set_master_seed(a.seed);
  if (cfg.design.p == 0) cfg.design.p = family_fixed_p(cfg.design.family);
  if (cfg.design.n < 1) throw ConfigError("gen-data: --n must be >= 1");
  if (cfg.design.p < 1) throw ConfigError("gen-data: --p is required for this family");
  if (!(cfg.sigma2 >= 0.0)) throw ConfigError("gen-data: --sigma2 must be >= 0");

  const RegressionProblem problem = build_problem(cfg);
  const fs::path dir = a.out;
  ensure_dir(dir);
  write_matrix_csv(dir / "design.csv", problem.X);
  write_vector_csv(dir / "response.csv", problem.y);
  write_vector_csv(dir / "beta0.csv", *problem.beta0);
  write_vector_csv(dir / "sigma2.csv", Vector::Constant(1, cfg.sigma2));

  Json manifest;
  manifest["version"] = std::string(kVersion);
  manifest["design"] = design_json(cfg.design);
  manifest["sigma2"] = cfg.sigma2;
  manifest["master_seed"] = cfg.master_seed;
  manifest["files"] = Json{{"design", "design.csv"},
                           {"response", "response.csv"},
                           {"beta0", "beta0.csv"},
                           {"sigma2", "sigma2.csv"}};
  open_file(dir / "manifest.json") << manifest.dump(2) << '\n';
  err << "gen-data: wrote " << problem.n() << "x" << problem.p() << " "
      << to_string(cfg.design.family) << " design to " << dir.string() << '\n';
  out << (dir / "manifest.json").string() << '\n';
  return kExitOk;
}

struct LeverageArgs {
  std::string input;
  std::string method = "exact";
  Index r1 = 0;
  Index r2 = 0;
  Seed seed = 1;
  std::string out;
};

int cmd_leverage(const LeverageArgs& a, std::ostream& out, std::ostream& err) {
  const DenseMatrix X = read_matrix(design_path(a.input));
  require_finite(X, "leverage input");
  const Index n = X.rows();
  const Index p = X.cols();
  if (n < p) throw ConfigError("leverage: input needs n >= p");

  Json summary;
  summary["method"] = a.method;
  summary["n"] = n;
  summary["p"] = p;
  LeverageScores scores;
  if (a.method == "exact") {
    scores = leverage_scores_exact(X);
  } else if (a.method == "bfast" || a.method == "gfast") {
    ApproxLeverageConfig cfg;
    cfg.kind = a.method == "bfast" ? ProjectionKind::Binary : ProjectionKind::Gaussian;
    cfg.r1 = a.r1 != 0 ? a.r1 : std::min<Index>(n, 2 * p);
    cfg.r2 = a.r2 != 0 ? a.r2
                       : static_cast<Index>(std::ceil(10.0 * std::log(static_cast<double>(n))));
    cfg.seed = a.seed;
    try {
      cfg.validate(n, p);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("leverage: ") + e.what());
    }
    const ApproxLeverageScores approx = approx_leverage(X, cfg);
    scores = approx.as_leverage_scores();
    const ExactComparison cmp = compare_to_exact(X, approx);
    summary["r1"] = cfg.r1;
    summary["r2"] = cfg.r2;
    summary["seed"] = cfg.seed;
    summary["attempts"] = approx.attempts;
    summary["correlation_with_exact"] = cmp.correlation;
    summary["max_relative_error"] = cmp.max_relative_error;
  } else {
    throw ConfigError("--method: expected exact, bfast or gfast");
  }
  summary["rank"] = scores.rank;
  summary["score_sum"] = scores.values.sum();
  summary["summary"] = summary_json(leverage_summary(scores, p));

  if (a.out.empty()) {
    write_scores_csv(out, scores.values);
    err << summary.dump(2) << '\n';
  } else {
    const fs::path dir = a.out;
    ensure_dir(dir);
    {
      auto f = open_file(dir / "scores.csv");
      write_scores_csv(f, scores.values);
    }
    open_file(dir / "summary.json") << summary.dump(2) << '\n';
    out << summary.dump(2) << '\n';
  }
  return kExitOk;
}

struct SolveArgs {
  std::string input;
  std::string x;
  std::string y;
  std::string scheme = "OLS";
  Index r = 0;
  double alpha = 0.9;
  Index trials = 1;
  std::string source = "exact";
  Index r1 = 0;
  Index r2 = 0;
  Seed seed = 1;
  std::string out;
};

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  RegressionProblem problem;
  if (!a.input.empty()) {
    const fs::path dir = a.input;
    problem.X = read_matrix(dir / "design.csv");
    problem.y = read_vector_csv(dir / "response.csv");
  } else if (!a.x.empty() && !a.y.empty()) {
    problem.X = read_matrix(a.x);
    problem.y = read_vector_csv(a.y);
  } else {
    throw ConfigError("solve: give --input <dir> or both --x and --y");
  }
  try {
    problem.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("solve: ") + e.what());
  }
  const Index n = problem.n();
  const Index p = problem.p();

  std::ofstream file;
  if (!a.out.empty()) {
    if (const fs::path parent = fs::path(a.out).parent_path(); !parent.empty()) ensure_dir(parent);
    file = open_file(a.out);
  }
  std::ostream& sink = a.out.empty() ? out : file;

  if (a.scheme == "OLS") {
    const OLSFit fit = solve_ols(problem.X, problem.y);
    sink << "coord,beta\n";
    for (Index k = 0; k < p; ++k) sink << k << ',' << format_double(fit.beta_hat(k)) << '\n';
    err << "solve: OLS rank " << fit.numerical_rank << '\n';
    return kExitOk;
  }

  Scheme scheme = Scheme::Unif;
  bool weighted = true;
  if (a.scheme == "LEVUNW") {
    scheme = Scheme::Lev;
    weighted = false;
  } else if (a.scheme == "UNIF" || a.scheme == "LEV" || a.scheme == "SLEV") {
    scheme = scheme_from_string(a.scheme);
  } else {
    throw ConfigError("--scheme: expected OLS, UNIF, LEV, SLEV or LEVUNW");
  }
  if (a.r < 1) throw ConfigError("solve: --r must be >= 1");
  if (a.trials < 1) throw ConfigError("solve: --trials must be >= 1");
  ScoreSource source = ScoreSource::Exact;
  try {
    source = score_source_from_string(a.source);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("--source: ") + e.what());
  }

  SamplingDistribution dist = uniform_distribution(n);
  if (scheme != Scheme::Unif) {
    LeverageScores scores;
    if (source == ScoreSource::Exact) {
      scores = leverage_scores_exact(problem.X);
    } else {
      ApproxLeverageConfig cfg;
      cfg.kind = source == ScoreSource::BFast ? ProjectionKind::Binary : ProjectionKind::Gaussian;
      cfg.r1 = a.r1 != 0 ? a.r1 : std::min<Index>(n, 2 * p);
      cfg.r2 = a.r2 != 0 ? a.r2
                         : static_cast<Index>(std::ceil(10.0 * std::log(static_cast<double>(n))));
      cfg.seed = derive_seed(a.seed, {0x736b657400000000ULL});
      scores = approx_leverage(problem.X, cfg).as_leverage_scores();
    }
    if (scheme == Scheme::Slev) {
      if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw ConfigError("--alpha: SLEV needs alpha in (0, 1)");
      dist = build_distribution(scheme, scores, a.alpha);
    } else {
      dist = build_distribution(scheme, scores);
    }
  }
  const double alpha = scheme == Scheme::Slev ? a.alpha : 0.0;
  const std::string label = estimator_label(scheme, source, weighted);
  write_estimates_header(sink, p);
  Index deficient = 0;
  for (Index t = 0; t < a.trials; ++t) {
    const Seed seed = derive_seed(a.seed, {static_cast<std::uint64_t>(t)});
    const Subsample sub = draw_subsample(dist, a.r, seed);
    const SubsampleEstimate est =
        weighted ? weighted_estimate(problem, sub) : unweighted_estimate(problem, sub);
    if (est.rank_deficient) ++deficient;
    write_estimate_row(sink, label, alpha, a.r, seed, t, est);
  }
  err << "solve: " << label << " r=" << a.r << " trials=" << a.trials
      << " rank_deficient=" << deficient << '\n';
  return kExitOk;
}

struct ExperimentArgs {
  std::string config;
  Seed seed = 1;
  unsigned threads = 0;
  std::string out;
  Index reps = 0;
  std::string mode;
};

int cmd_experiment(const ExperimentArgs& a, const CLI::App& sub, std::ostream& out,
                   std::ostream& err) {
  ExperimentConfig cfg = load_experiment_config(a.config);
  if (sub.count("--seed") > 0) cfg.set_master_seed(a.seed);
  if (sub.count("--threads") > 0) cfg.threads = a.threads;
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (sub.count("--reps") > 0) cfg.reps = a.reps;
  if (!a.mode.empty()) {
    try {
      cfg.mode = study_mode_from_string(a.mode);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--mode: ") + e.what());
    }
  }
  cfg.validate();
  const unsigned threads = resolve_threads(cfg.threads);
  err << "experiment: " << cfg.schemes.size() << " schemes x " << cfg.r_grid.size()
      << " sizes, " << cfg.reps << " reps, " << threads << " thread(s), digest " << cfg.digest()
      << '\n';
  const RunRecord record = run_experiment(cfg, threads);
  write_run_outputs(record, cfg, cfg.output_dir);
  for (const PhaseTiming& t : record.timings) {
    err << "experiment: " << t.phase << " " << t.seconds << " s\n";
  }
  write_report_csv(out, record.reports);
  return kExitOk;
}

struct BenchArgs {
  std::string sizes = "1000x10";
  std::string methods = "exact,bfast,gfast";
  Index reps = 3;
  double r1_per_p = 2.0;
  double r2_per_log_n = 10.0;
  Seed seed = 1;
  std::string out;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  TimingOptions options;
  options.r1_per_p = a.r1_per_p;
  options.r2_per_log_n = a.r2_per_log_n;
  options.seed = a.seed;
  options.reps = a.reps;
  options.methods = split_list(a.methods);
  if (options.reps < 1) throw ConfigError("--reps must be >= 1");
  for (const std::string& m : options.methods) {
    if (m != "exact" && m != "bfast" && m != "gfast") {
      throw ConfigError("--methods: unknown method '" + m + "'");
    }
  }
  const auto sizes = parse_sizes(a.sizes);
  err << "bench: " << sizes.size() << " size(s), " << options.methods.size() << " method(s), "
      << options.reps << " rep(s)\n";
  const std::vector<TimingRow> rows = timing_benchmark(sizes, options);
  write_timing_csv(out, rows);
  if (!a.out.empty()) {
    const fs::path dir = a.out;
    ensure_dir(dir);
    {
      auto f = open_file(dir / "timing.csv");
      write_timing_csv(f, rows);
    }
    Json meta;
    meta["version"] = std::string(kVersion);
    meta["timestamp"] = timestamp_utc();
    meta["hardware_concurrency"] = std::thread::hardware_concurrency();
    meta["compiler"] = __VERSION__;
    meta["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                    "." + std::to_string(EIGEN_MINOR_VERSION);
    meta["sizes"] = a.sizes;
    meta["methods"] = options.methods;
    meta["reps"] = options.reps;
    meta["r1_per_p"] = options.r1_per_p;
    meta["r2_per_log_n"] = options.r2_per_log_n;
    meta["seed"] = options.seed;
    meta["statistic"] = "median";
    open_file(dir / "bench_meta.json") << meta.dump(2) << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Leverage-score subsampling for least squares", "levsample"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  GenDataArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "Generate a design, response, beta0 and sigma2");
  gen_cmd->add_option("--config", gen.config, "Experiment config whose design to generate");
  gen_cmd->add_option("--family", gen.family, "GA, T, 1A, 1B, 2..7 or replicated-row");
  gen_cmd->add_option("--n", gen.n, "Rows");
  gen_cmd->add_option("--p", gen.p, "Columns (toy families fix their own)");
  gen_cmd->add_option("--df", gen.df, "Degrees of freedom for T designs");
  gen_cmd->add_option("--keep", gen.keep, "Distinct rows kept by replicated-row");
  gen_cmd->add_option("--sigma2", gen.sigma2, "Noise variance");
  gen_cmd->add_option("--seed", gen.seed, "Master seed");
  gen_cmd->add_option("--out", gen.out, "Output directory");

  LeverageArgs lev;
  CLI::App* lev_cmd = app.add_subcommand("leverage", "Exact or approximate leverage scores");
  lev_cmd->add_option("--input", lev.input, "Matrix file (.csv or .bin) or gen-data directory")
      ->required();
  lev_cmd->add_option("--method", lev.method, "exact, bfast or gfast");
  lev_cmd->add_option("--r1", lev.r1, "Sketch rows (default 2p)");
  lev_cmd->add_option("--r2", lev.r2, "Projection columns (default ceil(10 ln n))");
  lev_cmd->add_option("--seed", lev.seed, "Sketch seed");
  lev_cmd->add_option("--out", lev.out, "Directory for scores.csv and summary.json");

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Full or subsampled least-squares estimates");
  solve_cmd->add_option("--input", solve.input, "gen-data directory");
  solve_cmd->add_option("--x", solve.x, "Design matrix file");
  solve_cmd->add_option("--y", solve.y, "Response vector file");
  solve_cmd->add_option("--scheme", solve.scheme, "OLS, UNIF, LEV, SLEV or LEVUNW");
  solve_cmd->add_option("--r", solve.r, "Subsample size");
  solve_cmd->add_option("--alpha", solve.alpha, "SLEV mixing weight");
  solve_cmd->add_option("--trials", solve.trials, "Independent subsamples");
  solve_cmd->add_option("--source", solve.source, "Leverage source: exact, bfast or gfast");
  solve_cmd->add_option("--r1", solve.r1, "Sketch rows for approximate scores");
  solve_cmd->add_option("--r2", solve.r2, "Projection columns for approximate scores");
  solve_cmd->add_option("--seed", solve.seed, "Seed");
  solve_cmd->add_option("--out", solve.out, "Estimates CSV path (default standard output)");

  ExperimentArgs exp;
  CLI::App* exp_cmd = app.add_subcommand("experiment", "Run a Monte Carlo bias/variance grid");
  exp_cmd->add_option("--config", exp.config, "JSON experiment config")->required();
  exp_cmd->add_option("--seed", exp.seed, "Override master_seed");
  exp_cmd->add_option("--threads", exp.threads, "Worker threads")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--out", exp.out, "Override output_dir");
  exp_cmd->add_option("--reps", exp.reps, "Override reps");
  exp_cmd->add_option("--mode", exp.mode, "Override mode: conditional or unconditional");

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Time exact and approximate leverage");
  bench_cmd->add_option("--sizes", bench.sizes, "Comma-separated NxP list");
  bench_cmd->add_option("--methods", bench.methods, "Comma-separated exact,bfast,gfast");
  bench_cmd->add_option("--reps", bench.reps, "Repetitions per cell (median reported)");
  bench_cmd->add_option("--r1-per-p", bench.r1_per_p, "r1 = ceil(k p)");
  bench_cmd->add_option("--r2-per-log-n", bench.r2_per_log_n, "r2 = ceil(k ln n)");
  bench_cmd->add_option("--seed", bench.seed, "Design and sketch seed");
  bench_cmd->add_option("--out", bench.out, "Directory for timing.csv and bench_meta.json");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_data(gen, *gen_cmd, out, err);
    if (lev_cmd->parsed()) return cmd_leverage(lev, out, err);
    if (solve_cmd->parsed()) return cmd_solve(solve, out, err);
    if (exp_cmd->parsed()) return cmd_experiment(exp, *exp_cmd, out, err);
    if (bench_cmd->parsed()) return cmd_bench(bench, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace levsample
