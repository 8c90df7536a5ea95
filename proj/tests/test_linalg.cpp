#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "levsample/linalg.hpp"
#include "oracles.hpp"

using namespace levsample;

namespace {

DenseMatrix random_matrix(Index n, Index p, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  DenseMatrix X(n, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) X(i, j) = normal(gen);
  }
  return X;
}

Vector random_vector(Index n, unsigned seed) { return random_matrix(n, 1, seed).col(0); }

}  // namespace

TEST_CASE("thin_svd reconstructs X with orthonormal factors") {
  const DenseMatrix X = random_matrix(80, 7, 1);
  const ThinSVD svd = thin_svd(X);
  CHECK(svd.U.rows() == 80);
  CHECK(svd.U.cols() == 7);
  CHECK(svd.V.rows() == 7);
  const DenseMatrix rebuilt = svd.U * svd.singular_values.asDiagonal() * svd.V.transpose();
  CHECK((rebuilt - X).norm() < 1e-12 * X.norm());
  CHECK((svd.U.transpose() * svd.U - DenseMatrix::Identity(7, 7)).norm() < 1e-12);
  CHECK((svd.V.transpose() * svd.V - DenseMatrix::Identity(7, 7)).norm() < 1e-12);
  for (Index k = 1; k < 7; ++k) CHECK(svd.singular_values(k) <= svd.singular_values(k - 1));
}

TEST_CASE("thin_svd rejects wide and non-finite input") {
  CHECK_THROWS_AS(thin_svd(random_matrix(3, 5, 2)), std::invalid_argument);
  DenseMatrix X = random_matrix(10, 2, 3);
  X(4, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(thin_svd(X), std::invalid_argument);
  X(4, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(leverage_scores_exact(X), std::invalid_argument);
}

TEST_CASE("exact leverage matches the explicit hat matrix") {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const DenseMatrix X = random_matrix(40 + 10 * seed, 3 + seed, seed + 10);
    const LeverageScores h = leverage_scores_exact(X);
    const Vector ref = oracle::hat_diagonal(X);
    CHECK((h.values - ref).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(h.rank == X.cols());
    CHECK(h.values.sum() == doctest::Approx(static_cast<double>(X.cols())).epsilon(1e-12));
    CHECK(h.values.minCoeff() >= 0.0);
    CHECK(h.values.maxCoeff() <= 1.0 + 1e-12);
  }
}

TEST_CASE("leverage is invariant under invertible column transforms") {
  const DenseMatrix X = random_matrix(200, 6, 4);
  const DenseMatrix A = random_matrix(6, 6, 5) + 3.0 * DenseMatrix::Identity(6, 6);
  const Vector h1 = leverage_scores_exact(X).values;
  const Vector h2 = leverage_scores_exact(X * A).values;
  CHECK((h1 - h2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rank-deficient X: scores sum to the numerical rank") {
  DenseMatrix X = random_matrix(50, 4, 6);
  X.col(3) = 2.0 * X.col(0) - X.col(1);
  const LeverageScores h = leverage_scores_exact(X);
  CHECK(h.rank == 3);
  CHECK(h.values.sum() == doctest::Approx(3.0).epsilon(1e-10));
  const DenseMatrix basis = X.leftCols(3);
  CHECK((h.values - oracle::hat_diagonal(basis)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("numerical_rank uses the max(rows, p) * eps * sigma_max rule") {
  Vector s(3);
  s << 1.0, 1e-3, 1e-17;
  CHECK(numerical_rank(s, 100) == 2);
  s(2) = 1e-12;
  CHECK(numerical_rank(s, 100) == 3);
  CHECK(numerical_rank(Vector::Zero(3), 10) == 0);
}

TEST_CASE("solve_ols agrees with the normal equations") {
  const DenseMatrix X = random_matrix(120, 5, 7);
  const Vector y = random_vector(120, 8);
  const OLSFit fit = solve_ols(X, y, true);
  CHECK((fit.beta_hat - oracle::normal_equations(X, y)).norm() < 1e-10);
  CHECK((fit.residuals - (y - X * fit.beta_hat)).norm() < 1e-12);
  CHECK((X.transpose() * fit.residuals).norm() < 1e-10);
  REQUIRE(fit.leverage.has_value());
  CHECK((*fit.leverage - oracle::hat_diagonal(X)).norm() < 1e-10);
  CHECK(fit.numerical_rank == 5);
}

TEST_CASE("solve_min_norm matches a truncated SVD for any shape") {
  SUBCASE("tall rank deficient") {
    DenseMatrix A = random_matrix(30, 5, 9);
    A.col(4) = A.col(0) + A.col(1);
    const Vector b = random_vector(30, 10);
    const MinNormSolution sol = solve_min_norm(A, b);
    CHECK(sol.rank == 4);
    CHECK((sol.x - oracle::truncated_svd_solve(A, b)).norm() < 1e-9);
  }
  SUBCASE("wide") {
    const DenseMatrix A = random_matrix(3, 8, 11);
    const Vector b = random_vector(3, 12);
    const MinNormSolution sol = solve_min_norm(A, b);
    CHECK(sol.rank == 3);
    CHECK((A * sol.x - b).norm() < 1e-10);
    CHECK((sol.x - oracle::truncated_svd_solve(A, b)).norm() < 1e-10);
  }
  SUBCASE("all zero") {
    const MinNormSolution sol = solve_min_norm(DenseMatrix::Zero(4, 2), Vector::Ones(4));
    CHECK(sol.rank == 0);
    CHECK(sol.x.isZero());
  }
}

TEST_CASE("solve_wls agrees with weighted normal equations") {
  const DenseMatrix X = random_matrix(60, 4, 13);
  const Vector y = random_vector(60, 14);
  Vector w = random_vector(60, 15).cwiseAbs();
  w(3) = 0.0;
  const WLSFit fit = solve_wls(X, y, w);
  CHECK((fit.beta_hat_wls - oracle::normal_equations(X, y, w)).norm() < 1e-10);
  CHECK(fit.numerical_rank == 4);
  Vector bad = w;
  bad(0) = -1.0;
  CHECK_THROWS_AS(solve_wls(X, y, bad), std::invalid_argument);
  CHECK_THROWS_AS(solve_wls(X, y, Vector::Zero(60)), std::invalid_argument);
}

TEST_CASE("pearson_correlation") {
  Vector a(4), b(4);
  a << 1, 2, 3, 4;
  b << 2, 4, 6, 8;
  CHECK(pearson_correlation(a, b) == doctest::Approx(1.0));
  CHECK(pearson_correlation(a, -b) == doctest::Approx(-1.0));
  CHECK(pearson_correlation(a, Vector::Constant(4, 3.0)) == 0.0);
}

TEST_CASE("score source names round-trip") {
  for (ScoreSource s : {ScoreSource::Exact, ScoreSource::BFast, ScoreSource::GFast}) {
    CHECK(score_source_from_string(to_string(s)) == s);
  }
  CHECK_THROWS_AS(score_source_from_string("nope"), std::invalid_argument);
}
