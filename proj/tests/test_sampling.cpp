#include <doctest.h>

#include <cmath>
#include <random>

#include "levsample/datagen.hpp"
#include "levsample/sampling.hpp"
#include "oracles.hpp"

using namespace levsample;

namespace {

RegressionProblem ga_problem(Index n, Index p, Seed seed, double sigma2 = 1.0) {
  RegressionProblem problem;
  problem.X = gen_design({DesignFamily::Gaussian, n, p, 3, 50, seed});
  problem.beta0 = Vector::LinSpaced(p, 1.0, 2.0);
  problem.sigma2 = sigma2;
  problem.y = gen_response(problem.X, *problem.beta0, sigma2, seed + 100);
  return problem;
}

}  // namespace

TEST_CASE("distributions are normalized and tagged") {
  const RegressionProblem problem = ga_problem(300, 5, 1);
  const LeverageScores h = leverage_scores_exact(problem.X);

  const SamplingDistribution unif = uniform_distribution(300);
  CHECK(unif.probs().sum() == doctest::Approx(1.0));
  CHECK(unif.probs().minCoeff() == doctest::Approx(1.0 / 300));
  CHECK(unif.tag() == "UNIF");

  const SamplingDistribution lev = build_distribution(Scheme::Lev, h);
  CHECK(lev.probs().sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((lev.probs() - h.values / 5.0).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(lev.tag() == "LEV");

  const double alpha = 0.7;
  const SamplingDistribution slev = build_distribution(Scheme::Slev, h, alpha);
  CHECK(slev.probs().sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(slev.probs().minCoeff() >= (1.0 - alpha) / 300 - 1e-18);
  CHECK((slev.probs() - (alpha * lev.probs() + (1 - alpha) * unif.probs())).norm() < 1e-15);
  CHECK(slev.alpha() == alpha);
  CHECK(slev.tag() == "SLEV");

  LeverageScores approx = h;
  approx.source = ScoreSource::BFast;
  CHECK(build_distribution(Scheme::Lev, approx).tag() == "APPROX_LEV");
  CHECK(build_distribution(Scheme::Slev, approx, 0.5).tag() == "APPROX_SLEV");
}

TEST_CASE("invalid distributions are rejected") {
  const LeverageScores h{Vector::Constant(4, 0.5), 2, ScoreSource::Exact};
  CHECK_THROWS_AS(build_distribution(Scheme::Slev, h), std::invalid_argument);
  CHECK_THROWS_AS(build_distribution(Scheme::Slev, h, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_distribution(Scheme::Slev, h, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_distribution(Scheme::Custom, h), std::invalid_argument);
  Vector w = Vector::Ones(3);
  w(1) = -0.1;
  CHECK_THROWS_AS(SamplingDistribution::from_weights(w), std::invalid_argument);
  CHECK_THROWS_AS(SamplingDistribution::from_weights(Vector::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(draw_subsample(uniform_distribution(5), 0, 1), std::invalid_argument);
}

TEST_CASE("draws are seeded and reproducible") {
  const SamplingDistribution dist = uniform_distribution(1000);
  const Subsample a = draw_subsample(dist, 50, 42);
  const Subsample b = draw_subsample(dist, 50, 42);
  const Subsample c = draw_subsample(dist, 50, 43);
  CHECK(a.indices == b.indices);
  CHECK(a.indices != c.indices);
  CHECK(a.r() == 50);
  CHECK(a.probs_at_draw.size() == 50);
}

TEST_CASE("zero-probability rows are never drawn") {
  Vector w = Vector::Zero(10);
  w(2) = 1.0;
  w(7) = 3.0;
  const SamplingDistribution dist = SamplingDistribution::from_weights(w);
  CHECK(dist.index_for(0.0) == 2);
  CHECK(dist.index_for(0.2499) == 2);
  CHECK(dist.index_for(0.25) == 7);
  CHECK(dist.index_for(0.9999999) == 7);
  const Subsample sub = draw_subsample(dist, 5000, 3);
  Index sevens = 0;
  for (Index i : sub.indices) {
    CHECK((i == 2 || i == 7));
    if (i == 7) ++sevens;
  }
  // Binomial(5000, 0.75): sd about 30.6.
  CHECK(std::abs(static_cast<double>(sevens) - 3750.0) < 5 * 30.7);
}

TEST_CASE("empirical draw frequencies follow pi") {
  Vector w(5);
  w << 1, 2, 3, 4, 10;
  const SamplingDistribution dist = SamplingDistribution::from_weights(w);
  const Index r = 200000;
  const Subsample sub = draw_subsample(dist, r, 11);
  Vector counts = Vector::Zero(5);
  for (Index i : sub.indices) counts(i) += 1.0;
  double chi2 = 0.0;
  for (Index k = 0; k < 5; ++k) {
    const double expected = static_cast<double>(r) * dist.probs()(k);
    chi2 += (counts(k) - expected) * (counts(k) - expected) / expected;
  }
  // 4 degrees of freedom; the 0.999 quantile is 18.47.
  CHECK(chi2 < 18.47);
}

TEST_CASE("weighted estimate with every row once at pi = 1/n is OLS") {
  const RegressionProblem problem = ga_problem(40, 3, 2);
  Subsample sub;
  for (Index i = 0; i < 40; ++i) sub.indices.push_back(i);
  sub.probs_at_draw = Vector::Constant(40, 1.0 / 40);
  const SubsampleEstimate est = weighted_estimate(problem, sub);
  CHECK((est.beta_tilde - oracle::normal_equations(problem.X, problem.y)).norm() < 1e-10);
  CHECK(est.subproblem_rank == 3);
  CHECK_FALSE(est.rank_deficient);
}

TEST_CASE("weighted estimate solves the reweighted normal equations") {
  const RegressionProblem problem = ga_problem(200, 4, 3);
  const LeverageScores h = leverage_scores_exact(problem.X);
  const SamplingDistribution dist = build_distribution(Scheme::Lev, h);
  const Subsample sub = draw_subsample(dist, 30, 5);
  Vector w = Vector::Zero(200);
  for (Index k = 0; k < sub.r(); ++k) w(sub.indices[k]) += 1.0 / (30.0 * sub.probs_at_draw(k));
  const SubsampleEstimate est = weighted_estimate(problem, sub);
  CHECK((est.beta_tilde - oracle::normal_equations(problem.X, problem.y, w)).norm() < 1e-9);
  CHECK(est.weighted);

  Vector counts = Vector::Zero(200);
  for (Index i : sub.indices) counts(i) += 1.0;
  const SubsampleEstimate unw = unweighted_estimate(problem, sub);
  CHECK((unw.beta_tilde - oracle::normal_equations(problem.X, problem.y, counts)).norm() < 1e-9);
  CHECK_FALSE(unw.weighted);
}

TEST_CASE("noise-free response is recovered by every estimator") {
  const RegressionProblem problem = ga_problem(100, 4, 4, 0.0);
  const LeverageScores h = leverage_scores_exact(problem.X);
  for (const SamplingDistribution& dist :
       {uniform_distribution(100), build_distribution(Scheme::Lev, h),
        build_distribution(Scheme::Slev, h, 0.9)}) {
    const Subsample sub = draw_subsample(dist, 20, 9);
    CHECK((weighted_estimate(problem, sub).beta_tilde - *problem.beta0).norm() < 1e-9);
    CHECK((unweighted_estimate(problem, sub).beta_tilde - *problem.beta0).norm() < 1e-9);
  }
}

TEST_CASE("weighted estimate refuses rows drawn at probability zero") {
  const RegressionProblem problem = ga_problem(10, 2, 5);
  Subsample sub;
  sub.indices = {0, 1, 2};
  sub.probs_at_draw = Vector::Zero(3);
  CHECK_THROWS_AS(weighted_estimate(problem, sub), std::invalid_argument);
  sub.indices = {0, 1, 20};
  sub.probs_at_draw = Vector::Constant(3, 0.1);
  CHECK_THROWS_AS(weighted_estimate(problem, sub), std::invalid_argument);
}

TEST_CASE("rank loss on the worst-case design") {
  // One informative row among n: uniform sampling of r rows misses it with
  // probability (1 - 1/n)^r, leverage sampling never does (its score is 1).
  RegressionProblem problem;
  problem.X = gen_design({DesignFamily::WorstCase, 100, 2, 3, 50, 0});
  problem.y = Vector::Ones(100);
  const Index trials = 2000;
  const RankLossResult unif = rank_loss_trial(problem, uniform_distribution(100), 10, trials, 7);
  const double miss = std::pow(0.99, 10);
  const double sd = std::sqrt(miss * (1 - miss) / trials);
  CHECK(std::abs(unif.fraction_singular - miss) < 5 * sd);
  CHECK(unif.rank_histogram.size() == 3);
  CHECK(unif.rank_histogram[0] == 0);
  CHECK(unif.rank_histogram[1] + unif.rank_histogram[2] == trials);

  const LeverageScores h = leverage_scores_exact(problem.X);
  const RankLossResult lev =
      rank_loss_trial(problem, build_distribution(Scheme::Lev, h), 10, 500, 7);
  // LEV puts mass 1/2 on the informative row.
  CHECK(lev.fraction_singular < 0.01);
}

TEST_CASE("rank_loss_trial is identical across thread counts") {
  RegressionProblem problem;
  problem.X = replicated_row_design(300, 5, 20, 3, 2);
  problem.y = Vector::Ones(300);
  const SamplingDistribution dist = uniform_distribution(300);
  const RankLossResult one = rank_loss_trial(problem, dist, 10, 200, 3, 1);
  const RankLossResult four = rank_loss_trial(problem, dist, 10, 200, 3, 4);
  CHECK(one.fraction_singular == four.fraction_singular);
  CHECK(one.rank_histogram == four.rank_histogram);
}

TEST_CASE("estimator labels") {
  CHECK(estimator_label(Scheme::Unif, ScoreSource::Exact, true) == "UNIF");
  CHECK(estimator_label(Scheme::Lev, ScoreSource::Exact, true) == "LEV");
  CHECK(estimator_label(Scheme::Lev, ScoreSource::Exact, false) == "LEVUNW");
  CHECK(estimator_label(Scheme::Slev, ScoreSource::GFast, true) == "APPROX_SLEV/gfast");
  CHECK(estimator_label(Scheme::Lev, ScoreSource::BFast, true) == "APPROX_LEV/bfast");
  CHECK(scheme_from_string("SLEV") == Scheme::Slev);
  CHECK_THROWS_AS(scheme_from_string("BOGUS"), std::invalid_argument);
}
