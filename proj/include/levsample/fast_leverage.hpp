#pragma once

#include <string>
#include <vector>

#include "levsample/core.hpp"
#include "levsample/linalg.hpp"

namespace levsample {

enum class ProjectionKind { Binary, Gaussian };

/// Parameters of the two-projection leverage approximation.
///
/// Pi1 is r1 x n and compresses the rows of X; Pi2 is p x r2 and compresses
/// the columns of X R^{-1}. Entries are +-1 (Binary) or N(0, 1) (Gaussian),
/// so the raw estimate carries a 1/r2 prefactor and is then renormalized.
///
/// The identity switches exist for testing: identity_sketch uses Pi1 = I_n
/// (needs r1 == n), identity_projection uses Pi2 = I_p (needs r2 == p).
struct ApproxLeverageConfig {
  Index r1 = 0;
  Index r2 = 0;
  ProjectionKind kind = ProjectionKind::Binary;
  Seed seed = 0;
  bool identity_sketch = false;
  bool identity_projection = false;

  /// Throws std::invalid_argument unless r1 >= p, r2 >= 1 and the identity
  /// switches agree with the dimensions of an n x p input.
  void validate(Index n, Index p) const;
};

struct ApproxLeverageScores {
  Vector scores;
  ApproxLeverageConfig config;
  double normalized_sum = 0.0;
  /// Number of sketches drawn; > 1 when Pi1 X came out rank deficient.
  int attempts = 1;

  /// Scores as LeverageScores tagged bfast or gfast, usable by build_distribution.
  LeverageScores as_leverage_scores() const;
};

struct ExactComparison {
  double correlation = 0.0;
  double max_relative_error = 0.0;
  Index rows_compared = 0;
};

struct TimingRow {
  Index n = 0;
  Index p = 0;
  std::string method;  // exact, bfast or gfast
  Index r1 = 0;
  Index r2 = 0;
  double median_seconds = 0.0;
};

/// Settings for timing_benchmark. Sketch sizes scale with each size:
/// r1 = ceil(r1_per_p * p) capped at n, r2 = ceil(r2_per_log_n * ln n).
struct TimingOptions {
  double r1_per_p = 2.0;
  double r2_per_log_n = 10.0;
  Seed seed = 1;
  Index reps = 3;
  std::vector<std::string> methods{"exact", "bfast", "gfast"};
};

/// Approximates every leverage score of X:
///   R from QR(Pi1 X), then l_i = ||(X R^{-1} Pi2)_i||^2 / r2, rescaled to sum to p.
/// R^{-1} is applied by triangular solve. A rank-deficient Pi1 X is retried
/// with fresh seeds up to three times before NumericalError is thrown.
ApproxLeverageScores approx_leverage(const DenseMatrix& X, const ApproxLeverageConfig& cfg);

/// Pearson correlation with the exact scores, and max |h - l| / h over rows
/// whose exact score exceeds the rank tolerance.
ExactComparison compare_to_exact(const DenseMatrix& X, const ApproxLeverageScores& approx);
ExactComparison compare_scores(const Vector& exact, const Vector& approx);

/// Median wall-clock seconds per (size, method) on seeded GA designs.
std::vector<TimingRow> timing_benchmark(const std::vector<std::pair<Index, Index>>& sizes,
                                        const TimingOptions& options);

const char* to_string(ProjectionKind kind);
ScoreSource score_source(ProjectionKind kind);

}  // namespace levsample
