#pragma once

#include <string>

#include "levsample/core.hpp"
#include "levsample/linalg.hpp"

namespace levsample {

/// Synthetic design families. Gaussian and StudentT draw rows with
/// covariance Sigma_ij = 2 * 0.5^|i-j|; the rest are closed-form toys.
enum class DesignFamily {
  Gaussian,           // GA: rows ~ N(1_p, Sigma)
  StudentT,           // T(df): rows ~ Z / sqrt(chi2_df / df), Z ~ N(0, Sigma)
  SampleMean,         // 1A: all ones, p = 1
  PlusMinusOne,       // 1B: +1 on odd rows, -1 on even rows (1-based), p = 1
  InflatedLine,       // 2: X_i = i, p = 1
  InFill,             // 3: X_i = 1 / i, p = 1
  RegressionSurface,  // 4: p = 2, n even, paired rows sqrt(n / 3^j)
  TruncatedHadamard,  // 5: first p columns of the Sylvester Hadamard matrix, n = 2^k
  TruncatedIdentity,  // 6: first p columns of I_n
  WorstCase,          // 7: row (1, 0) then n - 1 copies of (0, 1), p = 2
  ReplicatedRow,      // T(df) rows reduced to `keep` high-leverage rows plus copies of the lowest
};

struct DesignSpec {
  DesignFamily family = DesignFamily::Gaussian;
  Index n = 0;
  /// 0 selects the family's own column count (toys) and is an error otherwise.
  Index p = 0;
  int df = 3;
  Index keep = 50;
  Seed seed = 0;
};

/// Summary of leverage probabilities h_ii / sum(h).
struct LeverageSummary {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;  // divisor n - 1
  double max_over_min = 0.0;
  double max_over_mean = 0.0;
  double max_over_median = 0.0;
};

DenseMatrix gen_design(const DesignSpec& spec);

/// Draws an n x p T(df) matrix, keeps its `keep` highest-leverage rows (in
/// original order) and fills the remaining rows with copies of the row of
/// smallest leverage. keep == n returns the T(df) draw unchanged.
DenseMatrix replicated_row_design(Index n, Index p, Index keep, int df, Seed seed);

/// (1_10, 0.1 * 1_{p-20}, 1_10); all ones when p < 20 (with a notice on std::clog).
Vector default_beta(Index p);

/// y = X beta0 + eps, eps_i ~ N(0, sigma2) i.i.d.; sigma2 = 0 gives y = X beta0.
Vector gen_response(const DenseMatrix& X, const Vector& beta0, double sigma2, Seed seed);

LeverageSummary leverage_summary(const LeverageScores& h, Index p);

/// Column count a family requires, or 0 when it accepts any p.
Index family_fixed_p(DesignFamily family);

const char* to_string(DesignFamily family);
/// Accepts canonical names (GA, T, sample-mean, ..., replicated-row) and the
/// toy numbers 1A, 1B, 2..7.
DesignFamily design_family_from_string(std::string_view name);

/// Sylvester Hadamard matrix of order n; n must be a power of two.
DenseMatrix sylvester_hadamard(Index n);

}  // namespace levsample
