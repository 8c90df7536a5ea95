#pragma once

#include <optional>
#include <string>
#include <vector>

#include "levsample/core.hpp"
#include "levsample/linalg.hpp"
#include "levsample/problem.hpp"

namespace levsample {

/// Sampling scheme. LEVUNW is Lev sampling paired with the unweighted
/// estimator, so it is not a distinct distribution.
enum class Scheme { Unif, Lev, Slev, Custom };

const char* to_string(Scheme scheme);
Scheme scheme_from_string(std::string_view name);

/// Normalized row-sampling probabilities with their provenance.
/// Construction enforces pi >= 0 and sum(pi) = 1; the cumulative table used
/// for inverse-CDF draws is built once here.
class SamplingDistribution {
 public:
  /// Validates and normalizes `weights` (nonnegative, positive sum).
  static SamplingDistribution from_weights(const Vector& weights, Scheme scheme = Scheme::Custom,
                                           double alpha = 0.0,
                                           ScoreSource source = ScoreSource::Exact);

  const Vector& probs() const { return probs_; }
  Scheme scheme() const { return scheme_; }
  double alpha() const { return alpha_; }
  ScoreSource source() const { return source_; }
  Index size() const { return probs_.size(); }

  /// "UNIF", "LEV", "SLEV", "APPROX_LEV", "APPROX_SLEV" or "CUSTOM".
  std::string tag() const;

  /// Row index whose cumulative interval contains u * total, u in [0, 1).
  /// Rows of zero probability own empty intervals and are never returned.
  Index index_for(double u) const;

 private:
  SamplingDistribution() = default;

  Vector probs_;
  std::vector<double> cumulative_;
  Scheme scheme_ = Scheme::Custom;
  double alpha_ = 0.0;
  ScoreSource source_ = ScoreSource::Exact;
};

/// r row indices drawn i.i.d. with replacement, with pi recorded at draw time.
struct Subsample {
  std::vector<Index> indices;
  Vector probs_at_draw;
  Scheme scheme = Scheme::Custom;
  double alpha = 0.0;
  ScoreSource source = ScoreSource::Exact;

  Index r() const { return static_cast<Index>(indices.size()); }
};

struct SubsampleEstimate {
  Vector beta_tilde;
  Index subproblem_rank = 0;
  bool rank_deficient = false;
  Scheme scheme = Scheme::Custom;
  double alpha = 0.0;
  bool weighted = true;
};

struct RankLossResult {
  double fraction_singular = 0.0;
  /// rank_histogram[k] = number of trials whose subproblem had rank k, k = 0..p.
  std::vector<Index> rank_histogram;
  Index trials = 0;
};

SamplingDistribution uniform_distribution(Index n);

/// UNIF ignores the scores apart from their count. LEV uses h / sum(h).
/// SLEV mixes alpha * LEV + (1 - alpha) * UNIF and needs alpha in (0, 1).
SamplingDistribution build_distribution(Scheme scheme, const LeverageScores& scores,
                                        std::optional<double> alpha = std::nullopt);

Subsample draw_subsample(const SamplingDistribution& dist, Index r, Seed seed);

/// Solves min || D S^T y - D S^T X beta || with D_kk = 1 / sqrt(r pi_k).
SubsampleEstimate weighted_estimate(const RegressionProblem& problem, const Subsample& sub);

/// Solves min || S^T y - S^T X beta ||; with leverage probabilities this is LEVUNW.
SubsampleEstimate unweighted_estimate(const RegressionProblem& problem, const Subsample& sub);

/// Fraction of `trials` weighted subproblems of size r that lose column rank.
/// Trial t draws from the stream derive_seed(seed, {t}).
RankLossResult rank_loss_trial(const RegressionProblem& problem, const SamplingDistribution& dist,
                               Index r, Index trials, Seed seed, unsigned threads = 1);

/// Short scheme label: UNIF, LEV, SLEV, LEVUNW, prefixed APPROX_ for
/// approximate scores and suffixed with the source, e.g. APPROX_LEV/bfast.
std::string estimator_label(Scheme scheme, ScoreSource source, bool weighted);

}  // namespace levsample
