#pragma once

#include <optional>
#include <string>
#include <vector>

#include "levsample/core.hpp"
#include "levsample/datagen.hpp"
#include "levsample/linalg.hpp"
#include "levsample/problem.hpp"
#include "levsample/sampling.hpp"

namespace levsample {

enum class StudyMode { Conditional, Unconditional };

const char* to_string(StudyMode mode);
StudyMode study_mode_from_string(std::string_view name);

/// Empirical bias/variance of repeated subsample estimates.
///
/// Conditional studies fix (X, y) and measure against beta_hat_ols; unweighted
/// conditional studies additionally report the distance to beta_hat_wls with
/// W0 = r * pi. Unconditional studies redraw the noise each replicate and
/// measure against beta0. All covariances use divisor reps, so
/// mse == bias_sq + variance_trace up to rounding.
struct BiasVarianceReport {
  std::string scheme;
  double alpha = 0.0;
  StudyMode mode = StudyMode::Conditional;
  bool weighted = true;
  Index r = 0;
  Index reps = 0;
  double bias_sq = 0.0;
  double variance_trace = 0.0;
  double mse = 0.0;
  double prediction_mse = 0.0;
  /// Trace of the leading-order analytic covariance; absent when X is rank deficient.
  std::optional<double> analytic_variance_trace;
  Index rank_deficient_count = 0;

  Vector mean_estimate;
  Vector reference;
  Vector coord_bias;
  Vector coord_variance;
  std::optional<Vector> wls_reference;
  std::optional<double> bias_sq_wls;
};

struct MseDecomposition {
  double bias_sq = 0.0;
  double variance_trace = 0.0;
  double mse = 0.0;
  /// (1/n) mean ||X (beta_k - reference)||^2, present when X was supplied.
  std::optional<double> prediction_mse;
  Vector mean;
  Vector coord_bias;
  Vector coord_variance;
};

struct UnweightedVariances {
  DenseMatrix conditional;
  /// Requires problem.sigma2.
  std::optional<DenseMatrix> unconditional;
};

/// One point of the analytic variance curves for a toy design.
struct ToyVarianceRow {
  Index n = 0;
  Index r = 0;
  double lev = 0.0;
  double unif = 0.0;
  double slev = 0.0;
  double levunw = 0.0;
};

MseDecomposition mse_decomposition(const std::vector<Vector>& estimates, const Vector& reference,
                                   const DenseMatrix* X = nullptr);

/// Replicate k draws its subsample from derive_seed(seed, {k, 1}). Replicates
/// may run on `threads` workers; results are reduced in replicate order, so
/// the report does not depend on the thread count.
BiasVarianceReport run_conditional(const RegressionProblem& problem,
                                   const SamplingDistribution& dist, Index r, bool weighted,
                                   Index reps, Seed seed, unsigned threads = 1);

/// As run_conditional, but replicate k first draws y = X beta0 + eps from
/// derive_seed(seed, {k, 0}).
BiasVarianceReport run_unconditional(const RegressionProblem& problem,
                                     const SamplingDistribution& dist, Index r, bool weighted,
                                     Index reps, Seed seed, unsigned threads = 1);

/// (X^T X)^{-1} X^T diag(e^2 / (r pi)) X (X^T X)^{-1}, the leading-order
/// conditional covariance of the weighted estimator. A zero pi at a nonzero
/// residual makes every entry +infinity.
DenseMatrix analytic_conditional_variance(const OLSFit& fit, const DenseMatrix& X,
                                          const SamplingDistribution& dist, Index r);

/// sigma2 (X^T X)^{-1} + (sigma2 / r) (X^T X)^{-1} X^T diag((1 - h)^2 / pi) X (X^T X)^{-1}.
DenseMatrix analytic_unconditional_variance(const DenseMatrix& X, const LeverageScores& h,
                                            const SamplingDistribution& dist, Index r,
                                            double sigma2);

/// Leading-order covariances of the unweighted estimator for expected
/// sample counts w0 (W0 = diag(w0)); LEVUNW uses w0 = r * h / sum(h).
UnweightedVariances analytic_unweighted_variances(const RegressionProblem& problem,
                                                  const Vector& w0);
UnweightedVariances analytic_levunw_variances(const RegressionProblem& problem,
                                              const LeverageScores& h, Index r);

/// Analytic unconditional variance traces of LEV, UNIF, SLEV(alpha) and
/// LEVUNW on a toy design for each n, with r = max(1, round(r_fraction * n)).
std::vector<ToyVarianceRow> toy_variance_curves(DesignFamily family,
                                                const std::vector<Index>& n_grid,
                                                double r_fraction = 0.1, double sigma2 = 1.0,
                                                double alpha = 0.9);

}  // namespace levsample
