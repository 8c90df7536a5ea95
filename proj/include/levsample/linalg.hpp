#pragma once

#include <optional>

#include "levsample/core.hpp"

namespace levsample {

/// Thin SVD X = U * diag(singular_values) * V^T with U n x p, V p x p.
struct ThinSVD {
  DenseMatrix U;
  Vector singular_values;  // nonincreasing, >= 0
  DenseMatrix V;
};

enum class ScoreSource { Exact, BFast, GFast };

/// Leverage scores h_ii (or an approximation to them), one per row.
struct LeverageScores {
  Vector values;
  Index rank = 0;
  ScoreSource source = ScoreSource::Exact;

  Index size() const { return values.size(); }
};

struct OLSFit {
  Vector beta_hat;
  Vector residuals;
  std::optional<Vector> leverage;
  Index numerical_rank = 0;
};

struct WLSFit {
  Vector beta_hat_wls;
  Vector residuals_w;
  Vector weights;
  Index numerical_rank = 0;
};

/// Minimum-norm least-squares solution of A x ~ b plus the numerical rank of A.
struct MinNormSolution {
  Vector x;
  Index rank = 0;
};

/// Thin SVD via Householder QR followed by an SVD of the p x p triangular factor.
/// Requires n >= p and finite entries.
ThinSVD thin_svd(const DenseMatrix& X);

/// Count of singular values above max(rows, p) * eps * sigma_max.
Index numerical_rank(const ThinSVD& svd, Index rows);
Index numerical_rank(const Vector& singular_values, Index rows);

/// argmin ||A x - b|| of minimum Euclidean norm. Handles any shape and rank;
/// an all-zero A yields x = 0 and rank 0.
MinNormSolution solve_min_norm(const DenseMatrix& A, const Vector& b);

OLSFit solve_ols(const DenseMatrix& X, const Vector& y, bool compute_leverage = false);

/// Minimizes sum_i w_i (y_i - x_i^T beta)^2. Rows with zero weight drop out.
WLSFit solve_wls(const DenseMatrix& X, const Vector& y, const Vector& weights);

/// Squared row norms of the leading numerical-rank columns of U. The scores
/// sum to the numerical rank, which is p for full-rank X.
LeverageScores leverage_scores_exact(const DenseMatrix& X);
LeverageScores leverage_scores_from_svd(const ThinSVD& svd, Index rows);

/// Pearson correlation; 0 when either argument has zero variance.
double pearson_correlation(const Vector& a, const Vector& b);

const char* to_string(ScoreSource source);
ScoreSource score_source_from_string(std::string_view name);

}  // namespace levsample
