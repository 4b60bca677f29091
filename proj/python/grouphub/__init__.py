"""Hub models for grouped co-occurrence data.

Node ids are 0-based here, as in the C++ library; CSV and JSON files use
1-based ids.
"""

from ._core import (
    GroupHubError,
    HubModelParams,
    build_scenario,
    check_identifiability,
    enumerate_pmf,
    fit_em,
    generate,
    group_log_likelihoods,
    lambda_path,
    log_likelihood,
    mislabel_rate,
    modified_em,
    solve_rho,
    tv_distance,
)

__all__ = [
    "GroupHubError",
    "HubModelParams",
    "build_scenario",
    "check_identifiability",
    "enumerate_pmf",
    "fit_em",
    "generate",
    "group_log_likelihoods",
    "lambda_path",
    "log_likelihood",
    "mislabel_rate",
    "modified_em",
    "solve_rho",
    "tv_distance",
]
