#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "levsample/datagen.hpp"
#include "levsample/experiment.hpp"
#include "levsample/fast_leverage.hpp"
#include "levsample/linalg.hpp"
#include "levsample/parallel.hpp"
#include "levsample/sampling.hpp"

namespace py = pybind11;
using namespace levsample;

namespace {

RegressionProblem make_problem(const DenseMatrix& X, const Vector& y) {
  RegressionProblem problem{X, y, std::nullopt, std::nullopt};
  problem.validate();
  return problem;
}

py::dict report_dict(const BiasVarianceReport& rep) {
  py::dict d;
  d["scheme"] = rep.scheme;
  d["alpha"] = rep.alpha;
  d["mode"] = to_string(rep.mode);
  d["weighted"] = rep.weighted;
  d["r"] = rep.r;
  d["reps"] = rep.reps;
  d["bias_sq"] = rep.bias_sq;
  d["variance_trace"] = rep.variance_trace;
  d["mse"] = rep.mse;
  d["analytic_variance_trace"] =
      rep.analytic_variance_trace ? py::object(py::float_(*rep.analytic_variance_trace)) : py::none();
  d["rank_deficient_count"] = rep.rank_deficient_count;
  d["mean_estimate"] = rep.mean_estimate;
  d["reference"] = rep.reference;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Leverage-score subsampling for overdetermined least squares";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def(
      "leverage_scores",
      [](const DenseMatrix& X) { return leverage_scores_exact(X).values; },
      py::arg("X"), py::call_guard<py::gil_scoped_release>(),
      "Exact leverage scores (diagonal of the hat matrix).");

  m.def(
      "thin_svd",
      [](const DenseMatrix& X) {
        ThinSVD svd = thin_svd(X);
        return py::make_tuple(svd.U, svd.singular_values, svd.V);
      },
      py::arg("X"), "Thin SVD (U, s, V) with X = U diag(s) V^T.");

  m.def(
      "solve_ols",
      [](const DenseMatrix& X, const Vector& y) {
        OLSFit fit = solve_ols(X, y);
        return py::make_tuple(fit.beta_hat, fit.residuals, fit.numerical_rank);
      },
      py::arg("X"), py::arg("y"), "Minimum-norm least squares: (beta_hat, residuals, rank).");

  m.def(
      "approx_leverage",
      [](const DenseMatrix& X, Index r1, Index r2, const std::string& kind, Seed seed) {
        ApproxLeverageConfig cfg;
        cfg.r1 = r1;
        cfg.r2 = r2;
        if (kind == "bfast") cfg.kind = ProjectionKind::Binary;
        else if (kind == "gfast") cfg.kind = ProjectionKind::Gaussian;
        else throw std::invalid_argument("kind must be 'bfast' or 'gfast'");
        cfg.seed = seed;
        py::gil_scoped_release release;
        return approx_leverage(X, cfg).scores;
      },
      py::arg("X"), py::arg("r1"), py::arg("r2"), py::arg("kind") = "bfast", py::arg("seed") = 1,
      "Approximate leverage scores from a row sketch and a column projection.");

  m.def(
      "compare_scores",
      [](const Vector& exact, const Vector& approx) {
        const ExactComparison c = compare_scores(exact, approx);
        return py::make_tuple(c.correlation, c.max_relative_error);
      },
      py::arg("exact"), py::arg("approx"), "(Pearson correlation, max relative error).");

  m.def(
      "gen_design",
      [](const std::string& family, Index n, Index p, int df, Index keep, Seed seed) {
        DesignSpec spec;
        spec.family = design_family_from_string(family);
        spec.n = n;
        spec.p = p;
        spec.df = df;
        spec.keep = keep;
        spec.seed = seed;
        return gen_design(spec);
      },
      py::arg("family"), py::arg("n"), py::arg("p") = 0, py::arg("df") = 3, py::arg("keep") = 50,
      py::arg("seed") = 1, "Synthetic design matrix.");

  m.def("default_beta", &default_beta, py::arg("p"));
  m.def("gen_response", &gen_response, py::arg("X"), py::arg("beta0"), py::arg("sigma2"),
        py::arg("seed"));

  m.def(
      "leverage_summary",
      [](const Vector& h, Index p) {
        const LeverageSummary s = leverage_summary(LeverageScores{h, p, ScoreSource::Exact}, p);
        py::dict d;
        d["min"] = s.min;
        d["median"] = s.median;
        d["max"] = s.max;
        d["mean"] = s.mean;
        d["std_dev"] = s.std_dev;
        d["max_over_min"] = s.max_over_min;
        d["max_over_mean"] = s.max_over_mean;
        d["max_over_median"] = s.max_over_median;
        return d;
      },
      py::arg("h"), py::arg("p"), "Summary of the leverage probabilities h / sum(h).");

  m.def(
      "sampling_probabilities",
      [](const DenseMatrix& X, const std::string& scheme, std::optional<double> alpha) {
        const Scheme s = scheme_from_string(scheme);
        if (s == Scheme::Unif) return uniform_distribution(X.rows()).probs();
        return build_distribution(s, leverage_scores_exact(X), alpha).probs();
      },
      py::arg("X"), py::arg("scheme"), py::arg("alpha") = py::none(),
      "UNIF, LEV or SLEV sampling probabilities for the rows of X.");

  m.def(
      "draw_subsample",
      [](const Vector& probs, Index r, Seed seed) {
        const Subsample sub =
            draw_subsample(SamplingDistribution::from_weights(probs), r, seed);
        return std::vector<Index>(sub.indices.begin(), sub.indices.end());
      },
      py::arg("probs"), py::arg("r"), py::arg("seed"),
      "r row indices drawn with replacement from probs.");

  m.def(
      "subsample_estimate",
      [](const DenseMatrix& X, const Vector& y, const std::vector<Index>& indices,
         const Vector& probs, bool weighted) {
        const RegressionProblem problem = make_problem(X, y);
        const SamplingDistribution dist = SamplingDistribution::from_weights(probs);
        Subsample sub;
        sub.indices = indices;
        sub.probs_at_draw.resize(static_cast<Index>(indices.size()));
        for (std::size_t k = 0; k < indices.size(); ++k) {
          if (indices[k] < 0 || indices[k] >= dist.size()) {
            throw std::invalid_argument("subsample index out of range");
          }
          sub.probs_at_draw(static_cast<Index>(k)) = dist.probs()(indices[k]);
        }
        const SubsampleEstimate est =
            weighted ? weighted_estimate(problem, sub) : unweighted_estimate(problem, sub);
        return py::make_tuple(est.beta_tilde, est.subproblem_rank);
      },
      py::arg("X"), py::arg("y"), py::arg("indices"), py::arg("probs"), py::arg("weighted") = true,
      "Weighted (D = 1/sqrt(r pi)) or unweighted subsample estimate: (beta, rank).");

  m.def(
      "run_experiment",
      [](const std::string& config_json, std::optional<unsigned> threads) {
        const ExperimentConfig cfg = parse_experiment_config(config_json);
        const unsigned workers = resolve_threads(threads ? threads : cfg.threads);
        RunRecord record;
        {
          py::gil_scoped_release release;
          record = run_experiment(cfg, workers);
        }
        py::list rows;
        for (const BiasVarianceReport& rep : record.reports) rows.append(report_dict(rep));
        return rows;
      },
      py::arg("config_json"), py::arg("threads") = py::none(),
      "Runs a JSON experiment config and returns one dict per (scheme, r).");
}
