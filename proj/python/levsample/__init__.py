"""Leverage-score subsampling for overdetermined least squares."""

from ._core import (
    __version__,
    approx_leverage,
    compare_scores,
    default_beta,
    draw_subsample,
    gen_design,
    gen_response,
    leverage_scores,
    leverage_summary,
    run_experiment,
    sampling_probabilities,
    solve_ols,
    subsample_estimate,
    thin_svd,
)

__all__ = [
    "__version__",
    "approx_leverage",
    "compare_scores",
    "default_beta",
    "draw_subsample",
    "gen_design",
    "gen_response",
    "leverage_scores",
    "leverage_summary",
    "run_experiment",
    "sampling_probabilities",
    "solve_ols",
    "subsample_estimate",
    "thin_svd",
]
