"""Stability certificates and Monte Carlo for fractional stochastic neutral equations."""

from ._core import (
    CriterionInputs,
    FracstabError,
    FractionalOrder,
    System,
    beta,
    caputo_ms_criterion,
    certify,
    closed_form,
    contraction_constant,
    delta_for_epsilon,
    eigenvalues,
    gamma,
    k_stab,
    ml,
    ml_matrix,
    ml_norm_sup,
    sector_check,
    simulate,
    theta,
)

__all__ = [name for name in dir() if not name.startswith("_")]
