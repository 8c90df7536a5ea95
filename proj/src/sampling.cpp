#include "levsample/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "levsample/parallel.hpp"
#include "levsample/rng.hpp"

namespace levsample {

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Unif: return "UNIF";
    case Scheme::Lev: return "LEV";
    case Scheme::Slev: return "SLEV";
    case Scheme::Custom: return "CUSTOM";
  }
  return "CUSTOM";
}

Scheme scheme_from_string(std::string_view name) {
  if (name == "UNIF") return Scheme::Unif;
  if (name == "LEV") return Scheme::Lev;
  if (name == "SLEV") return Scheme::Slev;
  if (name == "CUSTOM") return Scheme::Custom;
  throw std::invalid_argument("unknown sampling scheme '" + std::string(name) + "'");
}

std::string estimator_label(Scheme scheme, ScoreSource source, bool weighted) {
  std::string base = to_string(scheme);
  if (!weighted && scheme != Scheme::Unif) base += "UNW";
  if (source == ScoreSource::Exact || scheme == Scheme::Unif || scheme == Scheme::Custom) {
    return base;
  }
  return "APPROX_" + base + "/" + to_string(source);
}

SamplingDistribution SamplingDistribution::from_weights(const Vector& weights, Scheme scheme,
                                                        double alpha, ScoreSource source) {
  if (weights.size() < 1) throw std::invalid_argument("sampling distribution: empty");
  require_finite(weights, "sampling distribution");
  if ((weights.array() < 0.0).any()) {
    throw std::invalid_argument("sampling distribution: negative weight");
  }
  const double total = weights.sum();
  if (!(total > 0.0)) throw std::invalid_argument("sampling distribution: all mass zero");

  SamplingDistribution d;
  d.probs_ = weights / total;
  d.scheme_ = scheme;
  d.alpha_ = alpha;
  d.source_ = source;
  d.cumulative_.resize(static_cast<std::size_t>(d.probs_.size()));
  std::partial_sum(d.probs_.data(), d.probs_.data() + d.probs_.size(), d.cumulative_.begin());
  return d;
}

std::string SamplingDistribution::tag() const {
  std::string base = to_string(scheme_);
  if (source_ != ScoreSource::Exact && (scheme_ == Scheme::Lev || scheme_ == Scheme::Slev)) {
    return "APPROX_" + base;
  }
  return base;
}

Index SamplingDistribution::index_for(double u) const {
  const double total = cumulative_.back();
  const double target = u * total;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  auto idx = static_cast<Index>(it - cumulative_.begin());
  if (idx >= size()) idx = size() - 1;
  // Rounding at the top end can land on a trailing zero-probability row.
  while (idx > 0 && probs_(idx) <= 0.0) --idx;
  return idx;
}

SamplingDistribution uniform_distribution(Index n) {
  if (n < 1) throw std::invalid_argument("uniform_distribution: n must be >= 1");
  return SamplingDistribution::from_weights(Vector::Constant(n, 1.0), Scheme::Unif);
}

SamplingDistribution build_distribution(Scheme scheme, const LeverageScores& scores,
                                        std::optional<double> alpha) {
  const Index n = scores.size();
  if (n < 1) throw std::invalid_argument("build_distribution: no scores");
  switch (scheme) {
    case Scheme::Unif:
      return uniform_distribution(n);
    case Scheme::Lev: {
      require_finite(scores.values, "build_distribution");
      if ((scores.values.array() < 0.0).any()) {
        throw std::invalid_argument("build_distribution: negative leverage score");
      }
      return SamplingDistribution::from_weights(scores.values, Scheme::Lev, 0.0, scores.source);
    }
    case Scheme::Slev: {
      if (!alpha || !(*alpha > 0.0 && *alpha < 1.0)) {
        throw std::invalid_argument("build_distribution: SLEV requires alpha in (0, 1)");
      }
      require_finite(scores.values, "build_distribution");
      if ((scores.values.array() < 0.0).any()) {
        throw std::invalid_argument("build_distribution: negative leverage score");
      }
      const double total = scores.values.sum();
      if (!(total > 0.0)) throw std::invalid_argument("build_distribution: leverage sums to zero");
      const double a = *alpha;
      const Vector mixed =
          (a * scores.values.array() / total + (1.0 - a) / static_cast<double>(n)).matrix();
      return SamplingDistribution::from_weights(mixed, Scheme::Slev, a, scores.source);
    }
    case Scheme::Custom:
      break;
  }
  throw std::invalid_argument("build_distribution: use from_weights for custom distributions");
}

Subsample draw_subsample(const SamplingDistribution& dist, Index r, Seed seed) {
  if (r < 1) throw std::invalid_argument("draw_subsample: r must be >= 1");
  CounterRng rng(seed);
  Subsample sub;
  sub.indices.resize(static_cast<std::size_t>(r));
  sub.probs_at_draw.resize(r);
  for (Index k = 0; k < r; ++k) {
    const Index i = dist.index_for(rng.uniform());
    sub.indices[static_cast<std::size_t>(k)] = i;
    sub.probs_at_draw(k) = dist.probs()(i);
  }
  sub.scheme = dist.scheme();
  sub.alpha = dist.alpha();
  sub.source = dist.source();
  return sub;
}

namespace {

void check_subsample(const RegressionProblem& problem, const Subsample& sub) {
  if (problem.y.size() != problem.n()) {
    throw std::invalid_argument("estimate: length(y) != rows(X)");
  }
  if (sub.r() < 1 || sub.probs_at_draw.size() != sub.r()) {
    throw std::invalid_argument("estimate: malformed subsample");
  }
  for (Index i : sub.indices) {
    if (i < 0 || i >= problem.n()) throw std::invalid_argument("estimate: index out of range");
  }
}

SubsampleEstimate solve_rows(const RegressionProblem& problem, const Subsample& sub,
                             const Vector& row_scale, bool weighted) {
  const Index r = sub.r();
  const Index p = problem.p();
  DenseMatrix A(r, p);
  Vector b(r);
  for (Index k = 0; k < r; ++k) {
    const Index i = sub.indices[static_cast<std::size_t>(k)];
    A.row(k) = row_scale(k) * problem.X.row(i);
    b(k) = row_scale(k) * problem.y(i);
  }
  MinNormSolution sol = solve_min_norm(A, b);
  SubsampleEstimate est;
  est.beta_tilde = std::move(sol.x);
  est.subproblem_rank = sol.rank;
  est.rank_deficient = sol.rank < p;
  est.scheme = sub.scheme;
  est.alpha = sub.alpha;
  est.weighted = weighted;
  return est;
}

}  // namespace

SubsampleEstimate weighted_estimate(const RegressionProblem& problem, const Subsample& sub) {
  check_subsample(problem, sub);
  if (!(sub.probs_at_draw.array() > 0.0).all()) {
    throw std::invalid_argument("weighted_estimate: drawn row with zero probability");
  }
  const double r = static_cast<double>(sub.r());
  const Vector scale = (r * sub.probs_at_draw.array()).rsqrt().matrix();
  return solve_rows(problem, sub, scale, true);
}

SubsampleEstimate unweighted_estimate(const RegressionProblem& problem, const Subsample& sub) {
  check_subsample(problem, sub);
  return solve_rows(problem, sub, Vector::Ones(sub.r()), false);
}

RankLossResult rank_loss_trial(const RegressionProblem& problem, const SamplingDistribution& dist,
                               Index r, Index trials, Seed seed, unsigned threads) {
  if (trials < 1) throw std::invalid_argument("rank_loss_trial: trials must be >= 1");
  if (dist.size() != problem.n()) {
    throw std::invalid_argument("rank_loss_trial: distribution size != rows(X)");
  }
  std::vector<Index> ranks(static_cast<std::size_t>(trials));
  parallel_for(ranks.size(), threads, [&](std::size_t t) {
    const Subsample sub = draw_subsample(dist, r, derive_seed(seed, {t}));
    ranks[t] = weighted_estimate(problem, sub).subproblem_rank;
  });

  RankLossResult out;
  out.trials = trials;
  out.rank_histogram.assign(static_cast<std::size_t>(problem.p() + 1), 0);
  Index singular = 0;
  for (Index k : ranks) {
    ++out.rank_histogram[static_cast<std::size_t>(k)];
    if (k < problem.p()) ++singular;
  }
  out.fraction_singular = static_cast<double>(singular) / static_cast<double>(trials);
  return out;
}

}  // namespace levsample
