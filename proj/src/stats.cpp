#include "levsample/stats.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "levsample/parallel.hpp"
#include "levsample/rng.hpp"

namespace levsample {

const char* to_string(StudyMode mode) {
  return mode == StudyMode::Conditional ? "conditional" : "unconditional";
}

StudyMode study_mode_from_string(std::string_view name) {
  if (name == "conditional") return StudyMode::Conditional;
  if (name == "unconditional") return StudyMode::Unconditional;
  throw std::invalid_argument("unknown study mode '" + std::string(name) + "'");
}

MseDecomposition mse_decomposition(const std::vector<Vector>& estimates, const Vector& reference,
                                   const DenseMatrix* X) {
  if (estimates.empty()) throw std::invalid_argument("mse_decomposition: no estimates");
  const Index p = reference.size();
  const double reps = static_cast<double>(estimates.size());

  MseDecomposition out;
  out.mean = Vector::Zero(p);
  for (const Vector& b : estimates) {
    if (b.size() != p) throw std::invalid_argument("mse_decomposition: length mismatch");
    out.mean += b;
  }
  out.mean /= reps;
  out.coord_bias = out.mean - reference;
  out.coord_variance = Vector::Zero(p);
  double mse = 0.0;
  double prediction = 0.0;
  for (const Vector& b : estimates) {
    out.coord_variance += (b - out.mean).cwiseAbs2();
    mse += (b - reference).squaredNorm();
    if (X != nullptr) prediction += (*X * (b - reference)).squaredNorm();
  }
  out.coord_variance /= reps;
  out.bias_sq = out.coord_bias.squaredNorm();
  out.variance_trace = out.coord_variance.sum();
  out.mse = mse / reps;
  if (X != nullptr) {
    if (X->cols() != p) throw std::invalid_argument("mse_decomposition: cols(X) != p");
    out.prediction_mse = prediction / (reps * static_cast<double>(X->rows()));
  }
  return out;
}

namespace {

DenseMatrix infinite_matrix(Index p) {
  return DenseMatrix::Constant(p, p, std::numeric_limits<double>::infinity());
}

ThinSVD full_rank_svd(const DenseMatrix& X, const char* who) {
  ThinSVD svd = thin_svd(X);
  if (numerical_rank(svd, X.rows()) < X.cols()) {
    throw std::invalid_argument(std::string(who) + ": requires full column rank X");
  }
  return svd;
}

// (X^T X)^{-1} X^T diag(d) X (X^T X)^{-1} = V S^{-1} (U^T diag(d) U) S^{-1} V^T.
DenseMatrix sandwich(const ThinSVD& svd, const Vector& d) {
  const DenseMatrix middle = svd.U.transpose() * d.asDiagonal() * svd.U;
  const DenseMatrix left = svd.V * svd.singular_values.cwiseInverse().asDiagonal();
  DenseMatrix out = left * middle * left.transpose();
  return 0.5 * (out + out.transpose());
}

// (A)^{-1} X^T diag(d) X (A)^{-1} for A = X^T W0 X given its inverse.
DenseMatrix weighted_sandwich(const DenseMatrix& X, const DenseMatrix& gram_inv, const Vector& d) {
  const DenseMatrix middle = X.transpose() * d.asDiagonal() * X;
  DenseMatrix out = gram_inv * middle * gram_inv;
  return 0.5 * (out + out.transpose());
}

struct Replicate {
  Vector beta;
  bool rank_deficient = false;
};

BiasVarianceReport summarize(const std::vector<Replicate>& reps_out, const Vector& reference,
                             const DenseMatrix& X) {
  std::vector<Vector> estimates;
  estimates.reserve(reps_out.size());
  BiasVarianceReport report;
  for (const Replicate& rep : reps_out) {
    estimates.push_back(rep.beta);
    if (rep.rank_deficient) ++report.rank_deficient_count;
  }
  const MseDecomposition dec = mse_decomposition(estimates, reference, &X);
  report.bias_sq = dec.bias_sq;
  report.variance_trace = dec.variance_trace;
  report.mse = dec.mse;
  report.prediction_mse = dec.prediction_mse.value_or(0.0);
  report.mean_estimate = dec.mean;
  report.reference = reference;
  report.coord_bias = dec.coord_bias;
  report.coord_variance = dec.coord_variance;
  report.reps = static_cast<Index>(reps_out.size());
  return report;
}

void fill_header(BiasVarianceReport& report, const SamplingDistribution& dist, StudyMode mode,
                 bool weighted, Index r) {
  report.scheme = estimator_label(dist.scheme(), dist.source(), weighted);
  report.alpha = dist.alpha();
  report.mode = mode;
  report.weighted = weighted;
  report.r = r;
}

void check_study(const RegressionProblem& problem, const SamplingDistribution& dist, Index r,
                 Index reps) {
  problem.validate();
  if (dist.size() != problem.n()) {
    throw std::invalid_argument("study: distribution size != rows(X)");
  }
  if (r < 1) throw std::invalid_argument("study: r must be >= 1");
  if (reps < 2) throw std::invalid_argument("study: reps must be >= 2");
}

SubsampleEstimate estimate(const RegressionProblem& problem, const Subsample& sub, bool weighted) {
  return weighted ? weighted_estimate(problem, sub) : unweighted_estimate(problem, sub);
}

}  // namespace

DenseMatrix analytic_conditional_variance(const OLSFit& fit, const DenseMatrix& X,
                                          const SamplingDistribution& dist, Index r) {
  const Index n = X.rows();
  if (fit.residuals.size() != n || dist.size() != n) {
    throw std::invalid_argument("analytic_conditional_variance: dimension mismatch");
  }
  if (r < 1) throw std::invalid_argument("analytic_conditional_variance: r must be >= 1");
  const ThinSVD svd = full_rank_svd(X, "analytic_conditional_variance");

  const double scale = fit.residuals.cwiseAbs().maxCoeff();
  const double tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
                     std::max(scale, 1.0);
  Vector d(n);
  for (Index i = 0; i < n; ++i) {
    const double e = fit.residuals(i);
    const double pi = dist.probs()(i);
    if (pi > 0.0) {
      d(i) = e * e / (static_cast<double>(r) * pi);
    } else if (std::abs(e) > tol) {
      return infinite_matrix(X.cols());
    } else {
      d(i) = 0.0;
    }
  }
  return sandwich(svd, d);
}

DenseMatrix analytic_unconditional_variance(const DenseMatrix& X, const LeverageScores& h,
                                            const SamplingDistribution& dist, Index r,
                                            double sigma2) {
  const Index n = X.rows();
  if (h.size() != n || dist.size() != n) {
    throw std::invalid_argument("analytic_unconditional_variance: dimension mismatch");
  }
  if (r < 1) throw std::invalid_argument("analytic_unconditional_variance: r must be >= 1");
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("analytic_unconditional_variance: sigma2 < 0");
  const ThinSVD svd = full_rank_svd(X, "analytic_unconditional_variance");

  const double tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon();
  Vector d(n);
  for (Index i = 0; i < n; ++i) {
    const double gap = 1.0 - h.values(i);
    const double pi = dist.probs()(i);
    if (pi > 0.0) {
      d(i) = gap * gap / pi;
    } else if (std::abs(gap) > tol) {
      return infinite_matrix(X.cols());
    } else {
      d(i) = 0.0;
    }
  }
  const DenseMatrix left = svd.V * svd.singular_values.cwiseInverse().asDiagonal();
  const DenseMatrix ols = left * left.transpose();
  return sigma2 * ols + (sigma2 / static_cast<double>(r)) * sandwich(svd, d);
}

UnweightedVariances analytic_unweighted_variances(const RegressionProblem& problem,
                                                  const Vector& w0) {
  problem.validate();
  const Index n = problem.n();
  const Index p = problem.p();
  if (w0.size() != n) throw std::invalid_argument("analytic_unweighted_variances: length(w0) != n");
  if ((w0.array() < 0.0).any()) {
    throw std::invalid_argument("analytic_unweighted_variances: negative weight");
  }
  const Vector root = w0.cwiseSqrt();
  const DenseMatrix scaled = root.asDiagonal() * problem.X;
  const ThinSVD svd = thin_svd(scaled);
  if (numerical_rank(svd, n) < p) {
    throw NumericalError("analytic_unweighted_variances: X^T W0 X is singular");
  }
  const DenseMatrix left = svd.V * svd.singular_values.cwiseInverse().asDiagonal();
  const DenseMatrix gram_inv = left * left.transpose();

  const Vector beta_wls = gram_inv * (problem.X.transpose() * w0.cwiseProduct(problem.y));
  const Vector resid_w = problem.y - problem.X * beta_wls;

  UnweightedVariances out;
  out.conditional = weighted_sandwich(problem.X, gram_inv, resid_w.cwiseAbs2().cwiseProduct(w0));
  if (problem.sigma2) {
    const double s2 = *problem.sigma2;
    // Diagonal of the weighted projection P = X (X^T W0 X)^{-1} X^T W0.
    const Vector proj_diag =
        (problem.X * gram_inv).cwiseProduct(problem.X).rowwise().sum().cwiseProduct(w0);
    const Vector complement = (1.0 - proj_diag.array()).matrix();
    out.unconditional =
        s2 * weighted_sandwich(problem.X, gram_inv, w0.cwiseAbs2()) +
        s2 * weighted_sandwich(problem.X, gram_inv, complement.cwiseAbs2().cwiseProduct(w0));
  }
  return out;
}

UnweightedVariances analytic_levunw_variances(const RegressionProblem& problem,
                                              const LeverageScores& h, Index r) {
  if (h.size() != problem.n()) {
    throw std::invalid_argument("analytic_levunw_variances: dimension mismatch");
  }
  if (r < 1) throw std::invalid_argument("analytic_levunw_variances: r must be >= 1");
  const double total = h.values.sum();
  if (!(total > 0.0)) throw std::invalid_argument("analytic_levunw_variances: leverage sums to zero");
  const Vector w0 = (static_cast<double>(r) / total) * h.values;
  return analytic_unweighted_variances(problem, w0);
}

BiasVarianceReport run_conditional(const RegressionProblem& problem,
                                   const SamplingDistribution& dist, Index r, bool weighted,
                                   Index reps, Seed seed, unsigned threads) {
  check_study(problem, dist, r, reps);
  std::vector<Replicate> out(static_cast<std::size_t>(reps));
  parallel_for(out.size(), threads, [&](std::size_t k) {
    const Subsample sub = draw_subsample(dist, r, derive_seed(seed, {k, 1}));
    SubsampleEstimate est = estimate(problem, sub, weighted);
    out[k] = Replicate{std::move(est.beta_tilde), est.rank_deficient};
  });

  const OLSFit fit = solve_ols(problem.X, problem.y);
  BiasVarianceReport report = summarize(out, fit.beta_hat, problem.X);
  fill_header(report, dist, StudyMode::Conditional, weighted, r);

  const bool full_rank = fit.numerical_rank == problem.p();
  const Vector w0 = static_cast<double>(r) * dist.probs();
  if (!weighted) {
    const WLSFit wls = solve_wls(problem.X, problem.y, w0);
    report.wls_reference = wls.beta_hat_wls;
    report.bias_sq_wls = (report.mean_estimate - wls.beta_hat_wls).squaredNorm();
  }
  if (full_rank) {
    if (weighted) {
      report.analytic_variance_trace =
          analytic_conditional_variance(fit, problem.X, dist, r).trace();
    } else {
      try {
        report.analytic_variance_trace =
            analytic_unweighted_variances(problem, w0).conditional.trace();
      } catch (const NumericalError&) {
      }
    }
  }
  return report;
}

BiasVarianceReport run_unconditional(const RegressionProblem& problem,
                                     const SamplingDistribution& dist, Index r, bool weighted,
                                     Index reps, Seed seed, unsigned threads) {
  check_study(problem, dist, r, reps);
  problem.validate_ground_truth();
  const Vector signal = problem.X * *problem.beta0;
  const double sd = std::sqrt(*problem.sigma2);

  std::vector<Replicate> out(static_cast<std::size_t>(reps));
  parallel_for(out.size(), threads, [&](std::size_t k) {
    RegressionProblem local{problem.X, signal, std::nullopt, std::nullopt};
    if (sd > 0.0) {
      CounterRng rng(derive_seed(seed, {k, 0}));
      std::normal_distribution<double> noise(0.0, sd);
      for (Index i = 0; i < local.y.size(); ++i) local.y(i) += noise(rng);
    }
    const Subsample sub = draw_subsample(dist, r, derive_seed(seed, {k, 1}));
    SubsampleEstimate est = estimate(local, sub, weighted);
    out[k] = Replicate{std::move(est.beta_tilde), est.rank_deficient};
  });

  BiasVarianceReport report = summarize(out, *problem.beta0, problem.X);
  fill_header(report, dist, StudyMode::Unconditional, weighted, r);

  const LeverageScores h = leverage_scores_exact(problem.X);
  if (h.rank == problem.p()) {
    if (weighted) {
      report.analytic_variance_trace =
          analytic_unconditional_variance(problem.X, h, dist, r, *problem.sigma2).trace();
    } else {
      try {
        const Vector w0 = static_cast<double>(r) * dist.probs();
        report.analytic_variance_trace =
            analytic_unweighted_variances(problem, w0).unconditional->trace();
      } catch (const NumericalError&) {
      }
    }
  }
  return report;
}

std::vector<ToyVarianceRow> toy_variance_curves(DesignFamily family,
                                                const std::vector<Index>& n_grid,
                                                double r_fraction, double sigma2, double alpha) {
  if (!(r_fraction > 0.0)) throw std::invalid_argument("toy_variance_curves: r_fraction must be > 0");
  std::vector<ToyVarianceRow> rows;
  rows.reserve(n_grid.size());
  for (Index n : n_grid) {
    DesignSpec spec;
    spec.family = family;
    spec.n = n;
    const DenseMatrix X = gen_design(spec);
    const LeverageScores h = leverage_scores_exact(X);
    ToyVarianceRow row;
    row.n = n;
    row.r = std::max<Index>(1, static_cast<Index>(std::llround(r_fraction * static_cast<double>(n))));
    row.lev = analytic_unconditional_variance(X, h, build_distribution(Scheme::Lev, h), row.r, sigma2)
                  .trace();
    row.unif = analytic_unconditional_variance(X, h, uniform_distribution(n), row.r, sigma2).trace();
    row.slev =
        analytic_unconditional_variance(X, h, build_distribution(Scheme::Slev, h, alpha), row.r, sigma2)
            .trace();
    RegressionProblem problem{X, Vector::Zero(n), std::nullopt, sigma2};
    row.levunw = analytic_levunw_variances(problem, h, row.r).unconditional->trace();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace levsample
