// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
// Usage: acceptance [path-to-levsample-binary]
// Criterion 11 runs the binary as a subprocess when a path is given and
// falls back to the in-process entry point otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "levsample/cli.hpp"
#include "levsample/datagen.hpp"
#include "levsample/experiment.hpp"
#include "levsample/fast_leverage.hpp"
#include "levsample/linalg.hpp"
#include "levsample/parallel.hpp"
#include "levsample/sampling.hpp"
#include "levsample/stats.hpp"

using namespace levsample;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, a);
  return buf;
}

RegressionProblem problem_from(const DesignSpec& design, double sigma2, Seed response_seed) {
  RegressionProblem problem;
  problem.X = gen_design(design);
  problem.beta0 = default_beta(problem.X.cols());
  problem.sigma2 = sigma2;
  problem.y = gen_response(problem.X, *problem.beta0, sigma2, response_seed);
  return problem;
}

Outcome c1_leverage_exactness() {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<Index> pick_p(2, 100);
  double worst_sum = 0.0;
  double worst_invariance = 0.0;
  Index largest_n = 0;
  for (int k = 0; k < 20; ++k) {
    const Index p = k == 0 ? 100 : pick_p(gen);
    const Index n = k == 0 ? 2000 : std::uniform_int_distribution<Index>(p + 1, 2000)(gen);
    largest_n = std::max(largest_n, n);
    const DesignSpec spec{k % 2 == 0 ? DesignFamily::Gaussian : DesignFamily::StudentT, n, p, 3, 50,
                          static_cast<Seed>(100 + k)};
    const DenseMatrix X = gen_design(spec);
    const LeverageScores h = leverage_scores_exact(X);
    worst_sum = std::max(worst_sum, std::abs(h.values.sum() - static_cast<double>(p)));

    // Column-space invariance: X A spans the same space for invertible A.
    std::normal_distribution<double> normal;
    DenseMatrix A(p, p);
    for (Index i = 0; i < p; ++i) {
      for (Index j = 0; j < p; ++j) A(i, j) = normal(gen) / std::sqrt(static_cast<double>(p));
    }
    A += DenseMatrix::Identity(p, p) * 2.0;
    const Vector h2 = leverage_scores_exact(X * A).values;
    worst_invariance = std::max(worst_invariance, (h.values - h2).cwiseAbs().maxCoeff());
  }
  return {worst_sum < 1e-8 && worst_invariance < 1e-8,
          "20 designs up to " + std::to_string(largest_n) + "x100, max |sum h - p| = " +
              fmt("%.2e", worst_sum) + ", max invariance gap = " + fmt("%.2e", worst_invariance) +
              " (tol 1e-8)"};
}

Outcome c2_closed_form_toys() {
  double worst_line = 0.0;
  double worst_gram = 0.0;
  for (Index n : {10, 100, 1000}) {
    const DenseMatrix X = gen_design({DesignFamily::InflatedLine, n, 1, 3, 50, 0});
    const double nd = static_cast<double>(n);
    const double denom = nd * (nd + 1) * (2 * nd + 1);
    worst_gram = std::max(worst_gram, std::abs((X.transpose() * X)(0, 0) - denom / 6));
    const Vector h = leverage_scores_exact(X).values;
    for (Index i = 1; i <= n; ++i) {
      worst_line = std::max(worst_line,
                            std::abs(h(i - 1) - 6.0 * static_cast<double>(i * i) / denom));
    }
  }
  double worst_hadamard = 0.0;
  for (auto [n, p] : std::vector<std::pair<Index, Index>>{{16, 3}, {256, 10}, {1024, 50}}) {
    const Vector h = leverage_scores_exact(gen_design({DesignFamily::TruncatedHadamard, n, p, 3, 50, 0})).values;
    worst_hadamard = std::max(
        worst_hadamard, (h.array() - static_cast<double>(p) / static_cast<double>(n)).abs().maxCoeff());
  }
  bool identity_exact = true;
  for (auto [n, p] : std::vector<std::pair<Index, Index>>{{10, 3}, {500, 20}}) {
    const Vector h = leverage_scores_exact(gen_design({DesignFamily::TruncatedIdentity, n, p, 3, 50, 0})).values;
    for (Index i = 0; i < n; ++i) identity_exact = identity_exact && h(i) == (i < p ? 1.0 : 0.0);
  }
  return {worst_line < 1e-10 && worst_gram < 1e-10 && worst_hadamard < 1e-12 && identity_exact,
          "inflated line max err " + fmt("%.2e", worst_line) + ", X^T X err " +
              fmt("%.2e", worst_gram) + ", Hadamard max |h - p/n| " + fmt("%.2e", worst_hadamard) +
              ", identity exact: " + (identity_exact ? "yes" : "no")};
}

Outcome c3_plus_minus_one() {
  const RegressionProblem problem = problem_from({DesignFamily::PlusMinusOne, 10, 1, 3, 50, 0}, 1.0, 1);
  const LeverageScores h = leverage_scores_exact(problem.X);
  const double target = 1.0 * (1.0 / 10 + 0.81 / 5);
  const BiasVarianceReport unif =
      run_unconditional(problem, uniform_distribution(10), 5, true, 10000, 31);
  const BiasVarianceReport lev =
      run_unconditional(problem, build_distribution(Scheme::Lev, h), 5, true, 10000, 32);
  const double eu = unif.variance_trace / target - 1.0;
  const double el = lev.variance_trace / target - 1.0;
  return {std::abs(eu) < 0.10 && std::abs(el) < 0.10,
          "UNIF var " + fmt("%.4f", unif.variance_trace) + " (" + fmt("%+.1f%%", 100 * eu) +
              "), LEV var " + fmt("%.4f", lev.variance_trace) + " (" + fmt("%+.1f%%", 100 * el) +
              ") vs " + fmt("%.3f", target) + ", band 10%"};
}

Outcome c4_analytic_vs_empirical() {
  const RegressionProblem problem = problem_from({DesignFamily::Gaussian, 500, 10, 3, 50, 41}, 9.0, 42);
  const LeverageScores h = leverage_scores_exact(problem.X);
  const BiasVarianceReport lev =
      run_conditional(problem, build_distribution(Scheme::Lev, h), 100, true, 5000, 43);
  const BiasVarianceReport unif =
      run_conditional(problem, uniform_distribution(500), 100, true, 5000, 44);
  const double rl = *lev.analytic_variance_trace / lev.variance_trace - 1.0;
  const double ru = *unif.analytic_variance_trace / unif.variance_trace - 1.0;
  return {std::abs(rl) < 0.20 && std::abs(ru) < 0.20,
          "LEV analytic/empirical " + fmt("%.4f", *lev.analytic_variance_trace) + "/" +
              fmt("%.4f", lev.variance_trace) + " (" + fmt("%+.1f%%", 100 * rl) + "), UNIF " +
              fmt("%.4f", *unif.analytic_variance_trace) + "/" + fmt("%.4f", unif.variance_trace) +
              " (" + fmt("%+.1f%%", 100 * ru) + "), band 20%"};
}

Outcome c5_inverse_r_scaling() {
  const RegressionProblem problem = problem_from({DesignFamily::Gaussian, 1000, 10, 3, 50, 51}, 9.0, 52);
  const SamplingDistribution lev = build_distribution(Scheme::Lev, leverage_scores_exact(problem.X));
  const BiasVarianceReport r10 = run_unconditional(problem, lev, 100, true, 2000, 53);
  const BiasVarianceReport r20 = run_unconditional(problem, lev, 200, true, 2000, 54);
  const double ratio = r20.variance_trace / r10.variance_trace;
  return {ratio >= 0.4 && ratio <= 0.8,
          "var(r=20p)/var(r=10p) = " + fmt("%.3f", ratio) + ", band [0.4, 0.8]"};
}

Outcome c6_scheme_ordering() {
  ExperimentConfig cfg;
  cfg.design = {DesignFamily::StudentT, 1000, 50, 1, 50, 61};
  cfg.design_seed_pinned = true;
  cfg.sigma2 = 9.0;
  cfg.schemes = {SchemeSpec{Scheme::Unif}, SchemeSpec{Scheme::Lev},
                 SchemeSpec{Scheme::Slev, 0.9}, SchemeSpec{Scheme::Slev, 0.1}};
  cfg.r_grid = {250};
  cfg.mode = StudyMode::Unconditional;
  cfg.reps = 2000;
  cfg.master_seed = 62;
  const RunRecord rec = run_experiment(cfg, resolve_threads());
  const double unif = rec.reports[0].variance_trace;
  const double lev = rec.reports[1].variance_trace;
  const double slev9 = rec.reports[2].variance_trace;
  const double slev1 = rec.reports[3].variance_trace;
  const bool pass = lev < unif && slev9 <= 1.1 * std::min(lev, unif) && slev1 > slev9;
  return {pass, "UNIF " + fmt("%.4f", unif) + ", LEV " + fmt("%.4f", lev) + ", SLEV(0.9) " +
                    fmt("%.4f", slev9) + ", SLEV(0.1) " + fmt("%.4f", slev1)};
}

Outcome c7_levunw_centering() {
  const RegressionProblem problem = problem_from({DesignFamily::StudentT, 1000, 50, 1, 50, 71}, 9.0, 72);
  const LeverageScores h = leverage_scores_exact(problem.X);
  const Index r = 250;
  const SamplingDistribution lev = build_distribution(Scheme::Lev, h);
  const Vector beta_ols = solve_ols(problem.X, problem.y).beta_hat;
  const Vector beta_wls =
      solve_wls(problem.X, problem.y, static_cast<double>(r) * lev.probs()).beta_hat_wls;

  struct Case {
    const char* name;
    SamplingDistribution dist;
    bool weighted;
  };
  const std::vector<Case> cases = {{"LEVUNW", lev, false},
                                   {"LEV", lev, true},
                                   {"UNIF", uniform_distribution(1000), true},
                                   {"SLEV(0.9)", build_distribution(Scheme::Slev, h, 0.9), true}};
  bool pass = true;
  std::string detail;
  Seed seed = 73;
  for (const Case& c : cases) {
    const BiasVarianceReport rep =
        run_conditional(problem, c.dist, r, c.weighted, 2000, seed++, resolve_threads());
    const double to_wls = (rep.mean_estimate - beta_wls).norm();
    const double to_ols = (rep.mean_estimate - beta_ols).norm();
    pass = pass && (c.weighted ? to_ols < to_wls : to_wls < to_ols);
    detail += std::string(detail.empty() ? "" : "; ") + c.name + " |mean-wls| " +
              fmt("%.4f", to_wls) + " |mean-ols| " + fmt("%.4f", to_ols);
  }
  return {pass, detail};
}

Outcome c8_rank_loss() {
  RegressionProblem problem;
  problem.X = replicated_row_design(1000, 10, 50, 3, 81);
  problem.y = Vector::Zero(1000);
  const SamplingDistribution unif = uniform_distribution(1000);
  const SamplingDistribution lev = build_distribution(Scheme::Lev, leverage_scores_exact(problem.X));
  const unsigned threads = resolve_threads();
  const double u15 = rank_loss_trial(problem, unif, 15, 500, 82, threads).fraction_singular;
  const double l15 = rank_loss_trial(problem, lev, 15, 500, 83, threads).fraction_singular;
  const double l30 = rank_loss_trial(problem, lev, 30, 500, 84, threads).fraction_singular;
  return {u15 > 0.9 && l15 < u15 && l30 < 0.05,
          "r=p+5: UNIF " + fmt("%.3f", u15) + ", LEV " + fmt("%.3f", l15) + "; r=3p: LEV " +
              fmt("%.3f", l30)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Outcome c9_fast_leverage_quality() {
  const DenseMatrix X = gen_design({DesignFamily::StudentT, 2000, 100, 3, 50, 91});
  const Vector exact = leverage_scores_exact(X).values;
  const double log_n = std::log(2000.0);
  std::vector<double> medians;
  std::string detail;
  for (double k : {1.0, 5.0, 10.0}) {
    std::vector<double> corr;
    for (Seed s = 0; s < 10; ++s) {
      ApproxLeverageConfig cfg{200, static_cast<Index>(std::ceil(k * log_n)), ProjectionKind::Binary,
                               1000 + s, false, false};
      corr.push_back(compare_scores(exact, approx_leverage(X, cfg).scores).correlation);
    }
    medians.push_back(median(corr));
    detail += std::string(detail.empty() ? "" : ", ") + "r2=" +
              std::to_string(static_cast<Index>(std::ceil(k * log_n))) + ": " +
              fmt("%.3f", medians.back());
  }
  const bool pass = medians[2] > 0.8 && medians[0] <= medians[1] && medians[1] <= medians[2];
  return {pass, "median correlation " + detail};
}

Outcome c10_approx_substitution() {
  ExperimentConfig cfg;
  cfg.design = {DesignFamily::StudentT, 2000, 100, 3, 50, 101};
  cfg.design_seed_pinned = true;
  cfg.sigma2 = 9.0;
  SchemeSpec lev_fast{Scheme::Lev};
  lev_fast.source = ScoreSource::BFast;
  SchemeSpec slev_fast{Scheme::Slev, 0.9};
  slev_fast.source = ScoreSource::BFast;
  cfg.schemes = {SchemeSpec{Scheme::Lev}, lev_fast, SchemeSpec{Scheme::Slev, 0.9}, slev_fast};
  cfg.r_grid = {500};
  cfg.mode = StudyMode::Unconditional;
  cfg.reps = 1000;
  cfg.master_seed = 102;
  const RunRecord rec = run_experiment(cfg, resolve_threads());
  const double lev = rec.reports[1].variance_trace / rec.reports[0].variance_trace - 1.0;
  const double slev = rec.reports[3].variance_trace / rec.reports[2].variance_trace - 1.0;
  return {std::abs(lev) <= 0.15 && std::abs(slev) <= 0.15,
          "bfast/exact variance: LEV " + fmt("%+.1f%%", 100 * lev) + ", SLEV(0.9) " +
              fmt("%+.1f%%", 100 * slev) + ", band 15%"};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome c11_determinism(const std::string& binary) {
  const fs::path dir = fs::temp_directory_path() / "levsample_acceptance_c11";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << R"({
  "design": {"family": "T", "df": 1, "n": 1000, "p": 20},
  "schemes": ["UNIF", "LEV", {"name": "SLEV", "alpha": 0.9}, "LEVUNW",
              {"name": "LEV", "source": "bfast"}],
  "r_grid": ["3p", "5p"], "mode": "unconditional", "reps": 100, "master_seed": 11
})";
  auto run = [&](const fs::path& out) {
    if (!binary.empty()) {
      const std::string cmd = "\"" + binary + "\" experiment --config \"" +
                              (dir / "config.json").string() + "\" --threads 1 --out \"" +
                              out.string() + "\" > /dev/null 2>&1";
      return std::system(cmd.c_str());
    }
    std::ostringstream sink;
    return run_cli({"experiment", "--config", (dir / "config.json").string(), "--threads", "1",
                    "--out", out.string()},
                   sink, sink);
  };
  if (run(dir / "a") != 0 || run(dir / "b") != 0) return {false, "experiment run failed"};
  bool same = true;
  std::size_t bytes = 0;
  for (const char* name : {"report.csv", "report_coords.csv"}) {
    const std::string a = slurp(dir / "a" / name);
    bytes += a.size();
    same = same && !a.empty() && a == slurp(dir / "b" / name);
  }
  return {same, std::string(binary.empty() ? "in-process" : "subprocess") + ", " +
                    std::to_string(bytes) + " bytes compared, " + (same ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string binary = argc > 1 ? argv[1] : "";
  struct Criterion {
    const char* label;
    double budget_seconds;  // 0 = no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"C1  leverage exactness", 10, c1_leverage_exactness},
      {"C2  closed-form toy designs", 0, c2_closed_form_toys},
      {"C3  +-1 design variance law", 30, c3_plus_minus_one},
      {"C4  analytic vs empirical conditional variance", 120, c4_analytic_vs_empirical},
      {"C5  1/r variance scaling", 0, c5_inverse_r_scaling},
      {"C6  scheme ordering on T1", 180, c6_scheme_ordering},
      {"C7  LEVUNW centering on T1", 0, c7_levunw_centering},
      {"C8  rank loss on replicated rows", 60, c8_rank_loss},
      {"C9  fast leverage quality", 60, c9_fast_leverage_quality},
      {"C10 approximate-for-exact substitution", 0, c10_approx_substitution},
      {"C11 single-thread determinism", 0, [&] { return c11_determinism(binary); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.1f s", seconds);
    if (c.budget_seconds > 0) {
      timing += fmt(" (budget %.0f s)", c.budget_seconds);
      if (seconds > c.budget_seconds) {
        outcome.pass = false;
        timing += " OVER BUDGET";
      }
    }
    if (!outcome.pass) ++failures;
    std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << c.label << ": " << outcome.detail
              << "; " << timing << std::endl;
  }
  std::cout << (failures == 0 ? "all acceptance criteria passed"
                              : std::to_string(failures) + " acceptance criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
