"""End-to-end decomposition pipeline shared by the CLI and the bootstrap."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .basis import SieveBasis
from .decomp import DecompSeries, pt_association, pt_series
from .inference import InfluenceSeries, influence_rho
from .pfeig import EigenSolution, normalize, solve_generalized
from .preferences import PowerUtility, RecursiveUtility, power_utility_sdf_series
from .sievemat import StatePanel, estimate_gram, estimate_pricing
from .valuefn import FixedPointSolution, recursive_sdf_series, solve_value_fixed_point


class FitFailedError(RuntimeError):
    """The estimation pipeline could not produce a usable fit."""


@dataclass
class DecompositionResult:
    """Everything the decomposition pipeline produces for one panel."""

    basis: SieveBasis
    sol: EigenSolution
    series: DecompSeries
    association: dict
    m: np.ndarray
    fixed_point: Optional[FixedPointSolution] = None
    influence: Optional[InfluenceSeries] = None

    def scalar_record(self) -> dict:
        """Flat record of the headline scalars (bootstrap statistic payload)."""
        out = {
            "rho": self.series.rho,
            "y": self.series.yield_y,
            "L": self.series.entropy_L,
            "sdf_entropy": self.series.sdf_entropy,
            "horizon_dependence": self.series.horizon_dependence,
        }
        if self.fixed_point is not None:
            out["lambda"] = self.fixed_point.lam
        return out


def realized_sdf(
    panel: StatePanel,
    preferences: Optional[Union[PowerUtility, RecursiveUtility]],
    basis: SieveBasis,
) -> tuple[np.ndarray, Optional[FixedPointSolution]]:
    """SDF increments for the panel: observed column, or implied by preferences."""
    if preferences is None:
        if panel.sdf_increments is None:
            raise ValueError("panel has no SDF column and no preferences were given")
        return panel.sdf_increments, None
    if isinstance(preferences, PowerUtility):
        return power_utility_sdf_series(panel, preferences.beta, preferences.gamma), None
    fp = solve_value_fixed_point(basis, panel, preferences.beta, preferences.gamma)
    if not fp.converged:
        raise FitFailedError("value-recursion iteration did not converge")
    return recursive_sdf_series(panel, preferences.beta, preferences.gamma, fp, basis), fp


def decompose_panel(
    panel: StatePanel,
    basis: SieveBasis,
    preferences: Optional[Union[PowerUtility, RecursiveUtility]] = None,
    allow_fallback: bool = True,
) -> DecompositionResult:
    """Run the full decomposition on one panel with a fitted basis.

    Solves for the SDF increments (observable column, power formula, or
    recursive plug-in), estimates the eigenpair, and constructs the
    permanent/transitory series and scalar functionals. A fallback
    eigen-solution propagates into the result when ``allow_fallback``,
    else raises FitFailedError (bootstrap replicates discard such fits).
    """
    m, fp = realized_sdf(panel, preferences, basis)
    panel = panel.with_sdf(m)
    G = estimate_gram(basis, panel)
    M = estimate_pricing(basis, panel)
    sol = solve_generalized(M, G, const_coeffs=basis.const_coeffs)
    infl = None
    if sol.is_fallback:
        if not allow_fallback:
            raise FitFailedError("no real simple positive eigenvalue; fallback solution")
        n = panel.n
        phi_t = np.ones(n)
        phi_t1 = np.ones(n)
        phi_star_t = np.ones(n)
    else:
        sol = normalize(sol, G)
        b0 = basis.evaluate_many(panel.x0)
        b1 = basis.evaluate_many(panel.x1)
        phi_t = b0 @ sol.right_coeffs
        phi_t1 = b1 @ sol.right_coeffs
        phi_star_t = b0 @ sol.left_coeffs
        infl = influence_rho(
            sol, panel, m, phi_t=phi_t, phi_star_t=phi_star_t, phi_t1=phi_t1
        )
    series = pt_series(sol.rho, phi_t, phi_t1, m)
    association = pt_association(series)
    return DecompositionResult(
        basis=basis,
        sol=sol,
        series=series,
        association=association,
        m=m,
        fixed_point=fp,
        influence=infl,
    )


def bootstrap_statistic(
    basis: SieveBasis,
    preferences: Optional[Union[PowerUtility, RecursiveUtility]],
):
    """Closure mapping a resampled panel to the scalar record.

    Only the scalar functionals are computed (eigenvalue, yield, the two
    entropies, horizon dependence, and the value-recursion eigenvalue when
    preferences are recursive); none of them needs the eigenfunction to
    stay positive on the resample, so replicates are discarded only for
    fallback eigen-solutions or non-converged value recursions. The basis
    (sieve dimension, standardization, knots) is held fixed across
    replicates.
    """

    def stat(panel: StatePanel) -> dict:
        m, fp = realized_sdf(panel, preferences, basis)
        panel_m = panel.with_sdf(m)
        G = estimate_gram(basis, panel_m)
        M = estimate_pricing(basis, panel_m)
        sol = solve_generalized(M, G, const_coeffs=basis.const_coeffs)
        if sol.is_fallback:
            raise FitFailedError("fallback eigen-solution on a bootstrap resample")
        mean_log_m = float(np.mean(np.log(m)))
        entropy_l = math.log(sol.rho) - mean_log_m
        sdf_ent = math.log(float(np.mean(m))) - mean_log_m
        out = {
            "rho": sol.rho,
            "y": -math.log(sol.rho),
            "L": entropy_l,
            "sdf_entropy": sdf_ent,
            "horizon_dependence": entropy_l - sdf_ent,
        }
        if fp is not None:
            out["lambda"] = fp.lam
        return out

    return stat
