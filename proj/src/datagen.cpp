#include "levsample/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "levsample/rng.hpp"

namespace levsample {

namespace {

// Cholesky factor of Sigma_ij = 2 * 0.5^|i-j|.
DenseMatrix covariance_factor(Index p) {
  DenseMatrix sigma(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) sigma(i, j) = 2.0 * std::pow(0.5, std::abs(i - j));
  }
  Eigen::LLT<DenseMatrix> llt(sigma);
  return llt.matrixL();
}

// Each row draws from its own stream so rows are independent of generation order.
DenseMatrix multivariate_rows(Index n, Index p, Seed seed, bool gaussian, int df) {
  const DenseMatrix L = covariance_factor(p);
  DenseMatrix X(n, p);
  Vector z(p);
  for (Index i = 0; i < n; ++i) {
    CounterRng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    std::normal_distribution<double> normal;
    for (Index j = 0; j < p; ++j) z(j) = normal(rng);
    Vector row = L * z;
    if (gaussian) {
      row.array() += 1.0;
    } else {
      std::chi_squared_distribution<double> chi2(static_cast<double>(df));
      const double w = chi2(rng) / static_cast<double>(df);
      row /= std::sqrt(w);
    }
    X.row(i) = row.transpose();
  }
  return X;
}

void require_p(const DesignSpec& spec, Index expected) {
  if (spec.p != 0 && spec.p != expected) {
    throw std::invalid_argument(std::string("gen_design: ") + to_string(spec.family) +
                                " requires p = " + std::to_string(expected));
  }
}

}  // namespace

Index family_fixed_p(DesignFamily family) {
  switch (family) {
    case DesignFamily::SampleMean:
    case DesignFamily::PlusMinusOne:
    case DesignFamily::InflatedLine:
    case DesignFamily::InFill:
      return 1;
    case DesignFamily::RegressionSurface:
    case DesignFamily::WorstCase:
      return 2;
    default:
      return 0;
  }
}

DenseMatrix sylvester_hadamard(Index n) {
  if (n < 1 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("sylvester_hadamard: n must be a power of two");
  }
  DenseMatrix H = DenseMatrix::Ones(1, 1);
  while (H.rows() < n) {
    const Index m = H.rows();
    DenseMatrix next(2 * m, 2 * m);
    next << H, H, H, -H;
    H = std::move(next);
  }
  return H;
}

DenseMatrix gen_design(const DesignSpec& spec) {
  const Index n = spec.n;
  if (n < 1) throw std::invalid_argument("gen_design: n must be >= 1");
  const Index fixed = family_fixed_p(spec.family);
  if (fixed != 0) require_p(spec, fixed);
  const Index p = fixed != 0 ? fixed : spec.p;
  if (p < 1) throw std::invalid_argument("gen_design: p must be >= 1");
  if (n < p) throw std::invalid_argument("gen_design: requires n >= p");

  switch (spec.family) {
    case DesignFamily::Gaussian:
      return multivariate_rows(n, p, spec.seed, true, 0);
    case DesignFamily::StudentT:
      if (spec.df < 1) throw std::invalid_argument("gen_design: df must be >= 1");
      return multivariate_rows(n, p, spec.seed, false, spec.df);
    case DesignFamily::ReplicatedRow:
      return replicated_row_design(n, p, spec.keep, spec.df, spec.seed);
    case DesignFamily::SampleMean:
      return DenseMatrix::Ones(n, 1);
    case DesignFamily::PlusMinusOne: {
      DenseMatrix X(n, 1);
      for (Index i = 0; i < n; ++i) X(i, 0) = (i % 2 == 0) ? 1.0 : -1.0;
      return X;
    }
    case DesignFamily::InflatedLine: {
      DenseMatrix X(n, 1);
      for (Index i = 0; i < n; ++i) X(i, 0) = static_cast<double>(i + 1);
      return X;
    }
    case DesignFamily::InFill: {
      DenseMatrix X(n, 1);
      for (Index i = 0; i < n; ++i) X(i, 0) = 1.0 / static_cast<double>(i + 1);
      return X;
    }
    case DesignFamily::RegressionSurface: {
      if (n % 2 != 0) throw std::invalid_argument("gen_design: regression surface needs even n");
      DenseMatrix X = DenseMatrix::Zero(n, 2);
      const double log_n = std::log(static_cast<double>(n));
      for (Index j = 1; j <= n / 2; ++j) {
        // sqrt(n / 3^j) without forming 3^j
        const double v = std::exp(0.5 * (log_n - static_cast<double>(j) * std::log(3.0)));
        X(2 * j - 2, 0) = v;
        X(2 * j - 1, 1) = v;
      }
      return X;
    }
    case DesignFamily::TruncatedHadamard:
      return sylvester_hadamard(n).leftCols(p);
    case DesignFamily::TruncatedIdentity:
      return DenseMatrix::Identity(n, p);
    case DesignFamily::WorstCase: {
      if (n < 2) throw std::invalid_argument("gen_design: worst-case design needs n >= 2");
      DenseMatrix X = DenseMatrix::Zero(n, 2);
      X(0, 0) = 1.0;
      X.col(1).tail(n - 1).setOnes();
      return X;
    }
  }
  throw std::invalid_argument("gen_design: unknown family");
}

DenseMatrix replicated_row_design(Index n, Index p, Index keep, int df, Seed seed) {
  if (keep < 1 || keep > n) throw std::invalid_argument("replicated_row_design: need 1 <= keep <= n");
  if (df < 1) throw std::invalid_argument("replicated_row_design: df must be >= 1");
  if (n < p || p < 1) throw std::invalid_argument("replicated_row_design: requires n >= p >= 1");
  DenseMatrix X = multivariate_rows(n, p, seed, false, df);
  if (keep == n) return X;

  const Vector h = leverage_scores_exact(X).values;
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return h(a) > h(b); });

  const Index lowest = order.back();
  const Eigen::RowVectorXd filler = X.row(lowest);
  std::vector<bool> kept(static_cast<std::size_t>(n), false);
  for (Index k = 0; k < keep; ++k) kept[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = true;
  for (Index i = 0; i < n; ++i) {
    if (!kept[static_cast<std::size_t>(i)]) X.row(i) = filler;
  }
  return X;
}

Vector default_beta(Index p) {
  if (p < 1) throw std::invalid_argument("default_beta: p must be >= 1");
  if (p < 20) {
    std::clog << "levsample: default_beta(p=" << p << ") falls back to all ones (needs p >= 20)\n";
    return Vector::Ones(p);
  }
  Vector beta = Vector::Constant(p, 0.1);
  beta.head(10).setOnes();
  beta.tail(10).setOnes();
  return beta;
}

Vector gen_response(const DenseMatrix& X, const Vector& beta0, double sigma2, Seed seed) {
  if (beta0.size() != X.cols()) throw std::invalid_argument("gen_response: length(beta0) != cols(X)");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("gen_response: sigma2 must be finite and >= 0");
  }
  Vector y = X * beta0;
  if (sigma2 == 0.0) return y;
  CounterRng rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(sigma2));
  for (Index i = 0; i < y.size(); ++i) y(i) += noise(rng);
  return y;
}

LeverageSummary leverage_summary(const LeverageScores& h, Index p) {
  const Index n = h.size();
  if (n < 1) throw std::invalid_argument("leverage_summary: no scores");
  if (p < 1) throw std::invalid_argument("leverage_summary: p must be >= 1");
  std::vector<double> probs(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) probs[static_cast<std::size_t>(i)] = h.values(i) / static_cast<double>(p);

  LeverageSummary s;
  std::vector<double> sorted = probs;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  s.min = sorted.front();
  s.max = sorted.back();
  s.median = m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  s.mean = std::accumulate(probs.begin(), probs.end(), 0.0) / static_cast<double>(m);
  double ss = 0.0;
  for (double v : probs) ss += (v - s.mean) * (v - s.mean);
  s.std_dev = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) : 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  s.max_over_min = s.min > 0.0 ? s.max / s.min : inf;
  s.max_over_mean = s.mean > 0.0 ? s.max / s.mean : inf;
  s.max_over_median = s.median > 0.0 ? s.max / s.median : inf;
  return s;
}

const char* to_string(DesignFamily family) {
  switch (family) {
    case DesignFamily::Gaussian: return "GA";
    case DesignFamily::StudentT: return "T";
    case DesignFamily::SampleMean: return "sample-mean";
    case DesignFamily::PlusMinusOne: return "pm-one";
    case DesignFamily::InflatedLine: return "inflated-line";
    case DesignFamily::InFill: return "in-fill";
    case DesignFamily::RegressionSurface: return "regression-surface";
    case DesignFamily::TruncatedHadamard: return "truncated-hadamard";
    case DesignFamily::TruncatedIdentity: return "truncated-identity";
    case DesignFamily::WorstCase: return "worst-case";
    case DesignFamily::ReplicatedRow: return "replicated-row";
  }
  return "GA";
}

DesignFamily design_family_from_string(std::string_view name) {
  struct Alias {
    std::string_view name;
    DesignFamily family;
  };
  static constexpr Alias kAliases[] = {
      {"GA", DesignFamily::Gaussian},
      {"T", DesignFamily::StudentT},
      {"sample-mean", DesignFamily::SampleMean},
      {"1A", DesignFamily::SampleMean},
      {"pm-one", DesignFamily::PlusMinusOne},
      {"1B", DesignFamily::PlusMinusOne},
      {"inflated-line", DesignFamily::InflatedLine},
      {"2", DesignFamily::InflatedLine},
      {"in-fill", DesignFamily::InFill},
      {"3", DesignFamily::InFill},
      {"regression-surface", DesignFamily::RegressionSurface},
      {"4", DesignFamily::RegressionSurface},
      {"truncated-hadamard", DesignFamily::TruncatedHadamard},
      {"5", DesignFamily::TruncatedHadamard},
      {"truncated-identity", DesignFamily::TruncatedIdentity},
      {"6", DesignFamily::TruncatedIdentity},
      {"worst-case", DesignFamily::WorstCase},
      {"7", DesignFamily::WorstCase},
      {"replicated-row", DesignFamily::ReplicatedRow},
  };
  for (const Alias& a : kAliases) {
    if (a.name == name) return a.family;
  }
  throw std::invalid_argument("unknown design family '" + std::string(name) + "'");
}

}  // namespace levsample
