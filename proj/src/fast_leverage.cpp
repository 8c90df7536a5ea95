#include "levsample/fast_leverage.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "levsample/datagen.hpp"
#include "levsample/rng.hpp"

namespace levsample {

const char* to_string(ProjectionKind kind) {
  return kind == ProjectionKind::Binary ? "bfast" : "gfast";
}

ScoreSource score_source(ProjectionKind kind) {
  return kind == ProjectionKind::Binary ? ScoreSource::BFast : ScoreSource::GFast;
}

void ApproxLeverageConfig::validate(Index n, Index p) const {
  if (r1 < p) throw std::invalid_argument("approx_leverage: r1 must be >= p");
  if (r2 < 1) throw std::invalid_argument("approx_leverage: r2 must be >= 1");
  if (identity_sketch && r1 != n) {
    throw std::invalid_argument("approx_leverage: identity sketch needs r1 == n");
  }
  if (identity_projection && r2 != p) {
    throw std::invalid_argument("approx_leverage: identity projection needs r2 == p");
  }
}

LeverageScores ApproxLeverageScores::as_leverage_scores() const {
  LeverageScores h;
  h.values = scores;
  h.rank = static_cast<Index>(std::lround(normalized_sum));
  h.source = score_source(config.kind);
  return h;
}

namespace {

DenseMatrix random_projection(Index rows, Index cols, ProjectionKind kind, Seed seed) {
  CounterRng rng(seed);
  DenseMatrix out(rows, cols);
  double* data = out.data();
  const Index count = rows * cols;
  if (kind == ProjectionKind::Binary) {
    std::uint64_t bits = 0;
    for (Index k = 0; k < count; ++k) {
      if ((k & 63) == 0) bits = rng();
      data[k] = (bits & 1u) ? 1.0 : -1.0;
      bits >>= 1;
    }
  } else {
    std::normal_distribution<double> normal;
    for (Index k = 0; k < count; ++k) data[k] = normal(rng);
  }
  return out;
}

bool triangular_full_rank(const DenseMatrix& R, Index rows) {
  const Vector diag = R.diagonal().cwiseAbs();
  const double largest = diag.maxCoeff();
  if (!(largest > 0.0)) return false;
  const double tol = static_cast<double>(std::max(rows, R.cols())) *
                     std::numeric_limits<double>::epsilon() * largest;
  return (diag.array() > tol).all();
}

}  // namespace

ApproxLeverageScores approx_leverage(const DenseMatrix& X, const ApproxLeverageConfig& cfg) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (n < 1 || p < 1) throw std::invalid_argument("approx_leverage: empty matrix");
  cfg.validate(n, p);
  require_finite(X, "approx_leverage");

  constexpr int kMaxAttempts = 4;  // first sketch plus three reseeded retries
  const int max_attempts = cfg.identity_sketch ? 1 : kMaxAttempts;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    DenseMatrix sketch;
    if (cfg.identity_sketch) {
      sketch = X;
    } else {
      const DenseMatrix pi1 = random_projection(
          cfg.r1, n, cfg.kind, derive_seed(cfg.seed, {static_cast<std::uint64_t>(attempt), 1}));
      sketch.noalias() = pi1 * X;
    }
    Eigen::HouseholderQR<DenseMatrix> qr(sketch);
    const DenseMatrix R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    if (!triangular_full_rank(R, cfg.r1)) continue;

    DenseMatrix omega;
    double prefactor = 1.0;
    if (cfg.identity_projection) {
      omega = R.triangularView<Eigen::Upper>().solve(DenseMatrix::Identity(p, p));
    } else {
      const DenseMatrix pi2 = random_projection(
          p, cfg.r2, cfg.kind, derive_seed(cfg.seed, {static_cast<std::uint64_t>(attempt), 2}));
      omega = R.triangularView<Eigen::Upper>().solve(pi2);
      prefactor = 1.0 / static_cast<double>(cfg.r2);
    }
    const DenseMatrix sketched_rows = X * omega;

    ApproxLeverageScores out;
    out.scores = prefactor * sketched_rows.rowwise().squaredNorm();
    const double total = out.scores.sum();
    if (!(total > 0.0) || !std::isfinite(total)) continue;
    out.scores *= static_cast<double>(p) / total;
    out.normalized_sum = out.scores.sum();
    out.config = cfg;
    out.attempts = attempt + 1;
    return out;
  }
  throw NumericalError("approx_leverage: sketch Pi1 X is rank deficient after retries");
}

ExactComparison compare_scores(const Vector& exact, const Vector& approx) {
  if (exact.size() != approx.size()) {
    throw std::invalid_argument("compare_to_exact: score vectors differ in length");
  }
  ExactComparison out;
  out.correlation = pearson_correlation(exact, approx);
  const double tol = static_cast<double>(exact.size()) * std::numeric_limits<double>::epsilon();
  for (Index i = 0; i < exact.size(); ++i) {
    if (exact(i) > tol) {
      out.max_relative_error =
          std::max(out.max_relative_error, std::abs(exact(i) - approx(i)) / exact(i));
      ++out.rows_compared;
    }
  }
  return out;
}

ExactComparison compare_to_exact(const DenseMatrix& X, const ApproxLeverageScores& approx) {
  if (approx.scores.size() != X.rows()) {
    throw std::invalid_argument("compare_to_exact: dimension mismatch");
  }
  return compare_scores(leverage_scores_exact(X).values, approx.scores);
}

std::vector<TimingRow> timing_benchmark(const std::vector<std::pair<Index, Index>>& sizes,
                                        const TimingOptions& options) {
  if (sizes.empty()) throw std::invalid_argument("timing_benchmark: no sizes");
  if (options.reps < 1) throw std::invalid_argument("timing_benchmark: reps must be >= 1");
  using Clock = std::chrono::steady_clock;

  std::vector<TimingRow> rows;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    const auto [n, p] = sizes[s];
    DesignSpec spec;
    spec.family = DesignFamily::Gaussian;
    spec.n = n;
    spec.p = p;
    spec.seed = derive_seed(options.seed, {s});
    const DenseMatrix X = gen_design(spec);

    const Index r1 = std::min<Index>(
        n, static_cast<Index>(std::ceil(options.r1_per_p * static_cast<double>(p))));
    const Index r2 = std::max<Index>(
        1, static_cast<Index>(std::ceil(options.r2_per_log_n * std::log(static_cast<double>(n)))));

    for (const std::string& method : options.methods) {
      std::vector<double> seconds;
      for (Index rep = 0; rep < options.reps; ++rep) {
        const auto start = Clock::now();
        double sink = 0.0;
        if (method == "exact") {
          sink = leverage_scores_exact(X).values.sum();
        } else if (method == "bfast" || method == "gfast") {
          ApproxLeverageConfig cfg;
          cfg.r1 = r1;
          cfg.r2 = r2;
          cfg.kind = method == "bfast" ? ProjectionKind::Binary : ProjectionKind::Gaussian;
          cfg.seed = derive_seed(options.seed, {s, static_cast<std::uint64_t>(rep)});
          sink = approx_leverage(X, cfg).normalized_sum;
        } else {
          throw std::invalid_argument("timing_benchmark: unknown method '" + method + "'");
        }
        const std::chrono::duration<double> elapsed = Clock::now() - start;
        if (!std::isfinite(sink)) throw NumericalError("timing_benchmark: non-finite result");
        seconds.push_back(elapsed.count());
      }
      std::sort(seconds.begin(), seconds.end());
      const std::size_t m = seconds.size();
      const double median =
          m % 2 == 1 ? seconds[m / 2] : 0.5 * (seconds[m / 2 - 1] + seconds[m / 2]);
      const bool exact = method == "exact";
      rows.push_back(TimingRow{n, p, method, exact ? 0 : r1, exact ? 0 : r2, median});
    }
  }
  return rows;
}

}  // namespace levsample
