"""Estimation-error bounds for quantum models with nuisance parameters."""

from ._core import (
    Model,
    QnuisError,
    bloch_pvm,
    builtin_models,
    classical_fisher,
    classical_weight_elimination,
    fidelity,
    fisher_time_series,
    hgm_bound,
    information_loss,
    nagaoka_bound,
    noise_presets,
    nui_bound_11,
    nui_bound_12,
    nui_bound_21,
    optimal_interest_pvm,
    oracle_minimize,
    orthogonalize,
    partial_fisher,
    sld_cr_bound,
    sld_fisher,
    solve_sld,
    weight_limit_bound,
)

__all__ = [
    "Model",
    "QnuisError",
    "bloch_pvm",
    "builtin_models",
    "classical_fisher",
    "classical_weight_elimination",
    "fidelity",
    "fisher_time_series",
    "hgm_bound",
    "information_loss",
    "nagaoka_bound",
    "noise_presets",
    "nui_bound_11",
    "nui_bound_12",
    "nui_bound_21",
    "optimal_interest_pvm",
    "oracle_minimize",
    "orthogonalize",
    "partial_fisher",
    "sld_cr_bound",
    "sld_fisher",
    "solve_sld",
    "weight_limit_bound",
]
