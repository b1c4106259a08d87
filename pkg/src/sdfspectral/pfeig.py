"""Largest-eigenvalue solver for the sample generalized eigenproblem.

Solves M c = rho G c together with the adjoint problem c*' M = rho c*' G,
selects the largest real positive eigenvalue, and normalizes scale and
sign. When no real simple positive eigenvalue exists the solver falls
back to the trivial pair (rho, phi, phi*) = (1, 1, 1), flagged so that
downstream statistics can censor such fits.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.linalg

#: relative threshold below which an imaginary part is rounding noise
REALITY_TOL = 1e-8
#: relative separation under which the top eigenvalue is treated as non-simple
TIE_TOL = 1e-10


class DefectivePairError(RuntimeError):
    """Left/right eigenvectors are G-orthogonal; no biorthogonal scaling exists."""


@dataclass(frozen=True)
class EigenSolution:
    """Eigenvalue/eigenvector triple with normalization metadata.

    ``right_coeffs`` are the coefficients of the eigenfunction in the
    basis, ``left_coeffs`` those of the adjoint eigenfunction.
    ``const_coeffs`` records how the constant function is represented in
    the basis (used by the fallback and by the sign convention).
    """

    rho: float
    right_coeffs: np.ndarray
    left_coeffs: np.ndarray
    is_fallback: bool
    residuals: tuple[float, float]
    spectral_gap: Optional[float]
    const_coeffs: Optional[np.ndarray] = None
    normalized: bool = False


def _ensure_spd(G: np.ndarray) -> np.ndarray:
    """Return G, or G + eps*I after one ridge attempt; raise if still not SPD."""
    G = 0.5 * (G + G.T)
    try:
        scipy.linalg.cholesky(G)
        return G
    except scipy.linalg.LinAlgError:
        pass
    eps = 1e-10 * np.trace(G) / G.shape[0]
    Gr = G + eps * np.eye(G.shape[0])
    try:
        scipy.linalg.cholesky(Gr)
    except scipy.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "Gram matrix not positive definite even after ridge"
        ) from exc
    return Gr


def _real_candidates(vals: np.ndarray) -> np.ndarray:
    """Indices of numerically real eigenvalues."""
    return np.flatnonzero(
        np.abs(vals.imag) <= REALITY_TOL * (1.0 + np.abs(vals.real))
    )


def solve_generalized(
    M: np.ndarray,
    G: np.ndarray,
    const_coeffs: Optional[np.ndarray] = None,
) -> EigenSolution:
    """Solve the generalized eigenproblem of the pair (M, G).

    Computes every generalized eigenvalue, keeps those that are real to
    rounding, and selects the one with the largest (positive) real part.
    The adjoint eigenvector comes from the transposed problem, paired by
    eigenvalue proximity. Falls back to the constant solution with
    rho = 1 when no real positive eigenvalue exists or the top one is not
    simple.

    ``const_coeffs`` is the basis representation of the constant function
    (defaults to a vector of ones); it determines the fallback
    coefficients and the sign convention applied by :func:`normalize`.
    """
    M = np.asarray(M, dtype=float)
    G = _ensure_spd(np.asarray(G, dtype=float))
    k = M.shape[0]
    if const_coeffs is None:
        const_coeffs = np.ones(k)

    vals, vecs = scipy.linalg.eig(M, G)
    real_idx = _real_candidates(vals)
    pos_idx = real_idx[vals.real[real_idx] > 0]

    def fallback() -> EigenSolution:
        c = np.asarray(const_coeffs, dtype=float)
        return EigenSolution(
            rho=1.0,
            right_coeffs=c.copy(),
            left_coeffs=c.copy(),
            is_fallback=True,
            residuals=(np.nan, np.nan),
            spectral_gap=None,
            const_coeffs=c.copy(),
        )

    if pos_idx.size == 0:
        return fallback()
    top = pos_idx[np.argmax(vals.real[pos_idx])]
    rho = float(vals.real[top])

    # Simplicity: any other eigenvalue (real or complex) within TIE_TOL
    # relative distance of rho triggers the fallback convention.
    others = np.delete(np.arange(k), top)
    if others.size and np.min(np.abs(vals[others] - rho)) <= TIE_TOL * abs(rho):
        return fallback()

    right = vecs[:, top].real.copy()

    vals_t, vecs_t = scipy.linalg.eig(M.T, G.T)
    match = np.argmin(np.abs(vals_t - rho))
    if abs(vals_t[match] - rho) > 1e-8 * (1.0 + abs(rho)):
        return fallback()
    left = vecs_t[:, match].real.copy()

    norm_scale = scipy.linalg.norm(M, 2) + rho * scipy.linalg.norm(G, 2)
    res_r = np.linalg.norm(M @ right - rho * (G @ right)) / np.linalg.norm(right)
    res_l = np.linalg.norm(M.T @ left - rho * (G @ left)) / np.linalg.norm(left)
    if not (res_r < 1e-8 * norm_scale and res_l < 1e-8 * norm_scale):
        return fallback()

    real_vals = np.sort(vals.real[real_idx])
    gap = float(rho - real_vals[-2]) if real_vals.size >= 2 else None

    return EigenSolution(
        rho=rho,
        right_coeffs=right,
        left_coeffs=left,
        is_fallback=False,
        residuals=(float(res_r), float(res_l)),
        spectral_gap=gap,
        const_coeffs=np.asarray(const_coeffs, dtype=float).copy(),
    )


def normalize(sol: EigenSolution, G: np.ndarray) -> EigenSolution:
    """Impose the scale and sign conventions on an eigen solution.

    Scales the right coefficients so c'Gc = 1 (unit empirical norm of the
    eigenfunction), then the left so c*'Gc = 1 (unit empirical inner
    product), and finally flips both signs jointly so that the empirical
    mean of the eigenfunction is non-negative. Idempotent.
    """
    if sol.is_fallback:
        raise ValueError("cannot normalize a fallback solution")
    G = np.asarray(G, dtype=float)
    c = sol.right_coeffs.astype(float)
    scale = float(c @ G @ c)
    if scale <= 0:
        raise DefectivePairError("right eigenvector has non-positive G-norm")
    c = c / np.sqrt(scale)
    cs = sol.left_coeffs.astype(float)
    cross = float(cs @ G @ c)
    if cross == 0.0:
        raise DefectivePairError("defective pair: left/right eigenvectors G-orthogonal")
    cs = cs / cross
    const = sol.const_coeffs if sol.const_coeffs is not None else np.ones(c.size)
    # With the constant function in the basis span, const'Gc is exactly the
    # sample mean of the eigenfunction.
    if const @ G @ c < 0:
        c, cs = -c, -cs
    return replace(sol, right_coeffs=c, left_coeffs=cs, normalized=True)


def eigenfunction_values(
    sol: EigenSolution, basis, points: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the eigenfunction and its adjoint at the given points."""
    b = basis.evaluate_many(points)
    return b @ sol.right_coeffs, b @ sol.left_coeffs
