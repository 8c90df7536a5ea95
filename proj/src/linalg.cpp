#include "levsample/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace levsample {

void require_finite(const DenseMatrix& m, std::string_view what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

void require_finite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

namespace {

double rank_tolerance(const Vector& sv, Index rows) {
  if (sv.size() == 0) return 0.0;
  const double dim = static_cast<double>(std::max<Index>(rows, sv.size()));
  return dim * std::numeric_limits<double>::epsilon() * sv(0);
}

// SVD of a small square or wide matrix, fully computed.
Eigen::BDCSVD<DenseMatrix> small_svd(const DenseMatrix& A) {
  return Eigen::BDCSVD<DenseMatrix>(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

}  // namespace

Index numerical_rank(const Vector& singular_values, Index rows) {
  if (singular_values.size() == 0 || singular_values(0) <= 0.0) return 0;
  const double tol = rank_tolerance(singular_values, rows);
  Index rank = 0;
  for (Index i = 0; i < singular_values.size(); ++i) {
    if (singular_values(i) > tol) ++rank;
  }
  return rank;
}

Index numerical_rank(const ThinSVD& svd, Index rows) {
  return numerical_rank(svd.singular_values, rows);
}

ThinSVD thin_svd(const DenseMatrix& X) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (n < 1 || p < 1) throw std::invalid_argument("thin_svd: empty matrix");
  if (n < p) throw std::invalid_argument("thin_svd: requires rows >= cols");
  require_finite(X, "thin_svd");

  Eigen::HouseholderQR<DenseMatrix> qr(X);
  const DenseMatrix R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  auto svd = small_svd(R);

  ThinSVD out;
  DenseMatrix padded = DenseMatrix::Zero(n, p);
  padded.topRows(p) = svd.matrixU();
  out.U = qr.householderQ() * padded;
  out.singular_values = svd.singularValues();
  out.V = svd.matrixV();
  return out;
}

MinNormSolution solve_min_norm(const DenseMatrix& A, const Vector& b) {
  const Index m = A.rows();
  const Index p = A.cols();
  if (b.size() != m) throw std::invalid_argument("solve_min_norm: dimension mismatch");

  MinNormSolution out;
  out.x = Vector::Zero(p);
  if (m == 0 || p == 0) return out;

  DenseMatrix U;
  Vector sv;
  DenseMatrix V;
  Vector rhs;  // U-space coordinates of b
  if (m >= p) {
    Eigen::HouseholderQR<DenseMatrix> qr(A);
    const DenseMatrix R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    const Vector qtb = (qr.householderQ().adjoint() * b).head(p);
    auto svd = small_svd(R);
    sv = svd.singularValues();
    V = svd.matrixV();
    rhs = svd.matrixU().adjoint() * qtb;
  } else {
    auto svd = small_svd(A);
    sv = svd.singularValues();
    V = svd.matrixV();
    rhs = svd.matrixU().adjoint() * b;
  }
  out.rank = numerical_rank(sv, m);
  for (Index k = 0; k < out.rank; ++k) out.x += V.col(k) * (rhs(k) / sv(k));
  return out;
}

OLSFit solve_ols(const DenseMatrix& X, const Vector& y, bool compute_leverage) {
  if (y.size() != X.rows()) throw std::invalid_argument("solve_ols: length(y) != rows(X)");
  require_finite(X, "solve_ols X");
  require_finite(y, "solve_ols y");

  OLSFit fit;
  if (X.rows() >= X.cols()) {
    const ThinSVD svd = thin_svd(X);
    fit.numerical_rank = numerical_rank(svd, X.rows());
    const Vector uty = svd.U.adjoint() * y;
    fit.beta_hat = Vector::Zero(X.cols());
    for (Index k = 0; k < fit.numerical_rank; ++k) {
      fit.beta_hat += svd.V.col(k) * (uty(k) / svd.singular_values(k));
    }
    if (compute_leverage) fit.leverage = leverage_scores_from_svd(svd, X.rows()).values;
  } else {
    MinNormSolution sol = solve_min_norm(X, y);
    fit.beta_hat = std::move(sol.x);
    fit.numerical_rank = sol.rank;
    if (compute_leverage) {
      throw std::invalid_argument("solve_ols: leverage requires rows >= cols");
    }
  }
  fit.residuals = y - X * fit.beta_hat;
  return fit;
}

WLSFit solve_wls(const DenseMatrix& X, const Vector& y, const Vector& weights) {
  const Index n = X.rows();
  if (y.size() != n || weights.size() != n) {
    throw std::invalid_argument("solve_wls: dimension mismatch");
  }
  require_finite(X, "solve_wls X");
  require_finite(y, "solve_wls y");
  require_finite(weights, "solve_wls weights");
  if ((weights.array() < 0.0).any()) throw std::invalid_argument("solve_wls: negative weight");
  if (!(weights.array() > 0.0).any()) throw std::invalid_argument("solve_wls: all weights zero");

  const Vector root = weights.cwiseSqrt();
  const DenseMatrix A = root.asDiagonal() * X;
  const Vector b = root.cwiseProduct(y);
  MinNormSolution sol = solve_min_norm(A, b);

  WLSFit fit;
  fit.beta_hat_wls = std::move(sol.x);
  fit.residuals_w = y - X * fit.beta_hat_wls;
  fit.weights = weights;
  fit.numerical_rank = sol.rank;
  return fit;
}

LeverageScores leverage_scores_from_svd(const ThinSVD& svd, Index rows) {
  LeverageScores h;
  h.rank = numerical_rank(svd, rows);
  h.values = svd.U.leftCols(h.rank).rowwise().squaredNorm();
  h.source = ScoreSource::Exact;
  return h;
}

LeverageScores leverage_scores_exact(const DenseMatrix& X) {
  return leverage_scores_from_svd(thin_svd(X), X.rows());
}

double pearson_correlation(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("pearson_correlation: need two equal-length vectors of length >= 2");
  }
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double saa = da.square().sum();
  const double sbb = db.square().sum();
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return (da * db).sum() / std::sqrt(saa * sbb);
}

const char* to_string(ScoreSource source) {
  switch (source) {
    case ScoreSource::Exact: return "exact";
    case ScoreSource::BFast: return "bfast";
    case ScoreSource::GFast: return "gfast";
  }
  return "exact";
}

ScoreSource score_source_from_string(std::string_view name) {
  if (name == "exact") return ScoreSource::Exact;
  if (name == "bfast") return ScoreSource::BFast;
  if (name == "gfast") return ScoreSource::GFast;
  throw std::invalid_argument("unknown leverage source '" + std::string(name) + "'");
}

}  // namespace levsample
