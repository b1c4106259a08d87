"""Sample moment matrices for the sieve-reduced operator problems.

Given a state time series X_0..X_n, the Gram matrix averages outer
products of the basis vector at X_t over t = 0..n-1; the pricing matrix
additionally weights by the discount-factor increment m_t and pairs X_t
with X_{t+1}; the nonlinear map does the same for the value-recursion
operator. All three are plain sample averages of the corresponding
population moments.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .basis import SieveBasis


@dataclass(frozen=True)
class StatePanel:
    """Aligned observations of the state process and per-period series.

    Row t of ``x0``/``x1`` holds the transition pair (X_t, X_{t+1});
    growth, sdf_increments and returns (when present) are aligned with it.
    ``states`` keeps the original X_0..X_n path when the panel was built
    from one (it is None for pair-resampled panels, e.g. bootstrap draws).
    """

    x0: np.ndarray  # (n, d)
    x1: np.ndarray  # (n, d)
    growth: Optional[np.ndarray] = None  # (n,) positive
    sdf_increments: Optional[np.ndarray] = None  # (n,) positive
    returns: Optional[np.ndarray] = None  # (n, p) gross returns
    states: Optional[np.ndarray] = None  # (n+1, d) original path, if any

    def __post_init__(self):
        for name in ("x0", "x1", "growth", "sdf_increments", "returns"):
            arr = getattr(self, name)
            if arr is not None and not np.all(np.isfinite(arr)):
                raise ValueError(f"panel field {name!r} contains non-finite values")
        if self.x0.shape != self.x1.shape:
            raise ValueError("x0 and x1 must have identical shapes")
        for name in ("growth", "sdf_increments"):
            arr = getattr(self, name)
            if arr is not None:
                if arr.shape[0] != self.n:
                    raise ValueError(f"{name} must have length n={self.n}")
                if np.any(arr <= 0):
                    t = int(np.argmax(arr <= 0))
                    raise ValueError(f"{name} must be strictly positive (first violation at t={t})")
        if self.returns is not None and self.returns.shape[0] != self.n:
            raise ValueError(f"returns must have n={self.n} rows")

    @property
    def n(self) -> int:
        return self.x0.shape[0]

    @property
    def state_dim(self) -> int:
        return self.x0.shape[1]

    @classmethod
    def from_states(
        cls,
        states: np.ndarray,
        growth: Optional[np.ndarray] = None,
        sdf_increments: Optional[np.ndarray] = None,
        returns: Optional[np.ndarray] = None,
    ) -> "StatePanel":
        """Build a panel from a path X_0..X_n (n+1 rows, d columns)."""
        s = np.asarray(states, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        if s.shape[0] < 2:
            raise ValueError("need at least two observations of the state")
        g = None if growth is None else np.asarray(growth, dtype=float).ravel()
        m = None if sdf_increments is None else np.asarray(sdf_increments, dtype=float).ravel()
        r = None if returns is None else np.atleast_2d(np.asarray(returns, dtype=float))
        return cls(x0=s[:-1], x1=s[1:], growth=g, sdf_increments=m, returns=r, states=s)

    def with_sdf(self, sdf_increments: np.ndarray) -> "StatePanel":
        """Copy of the panel with the given SDF increment series attached."""
        return StatePanel(
            x0=self.x0,
            x1=self.x1,
            growth=self.growth,
            sdf_increments=np.asarray(sdf_increments, dtype=float).ravel(),
            returns=self.returns,
            states=self.states,
        )

    def resample(self, idx: np.ndarray) -> "StatePanel":
        """Panel of the transition pairs (and aligned series) at ``idx``."""
        idx = np.asarray(idx, dtype=int)
        return StatePanel(
            x0=self.x0[idx],
            x1=self.x1[idx],
            growth=None if self.growth is None else self.growth[idx],
            sdf_increments=None
            if self.sdf_increments is None
            else self.sdf_increments[idx],
            returns=None if self.returns is None else self.returns[idx],
            states=None,
        )


@dataclass(frozen=True)
class SieveMatrices:
    """The k x k sample Gram and pricing matrices for one panel/basis."""

    gram: np.ndarray
    pricing: np.ndarray
    k: int
    n: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.gram)) or not np.all(np.isfinite(self.pricing)):
            raise ValueError("sample matrices must be finite")
        asym = np.abs(self.gram - self.gram.T).max()
        if asym > 1e-12 * max(1.0, np.abs(self.gram).max()):
            raise ValueError("gram matrix is not symmetric")


def estimate_gram(basis: SieveBasis, panel: StatePanel) -> np.ndarray:
    """Sample Gram matrix (1/n) sum_t b(X_t) b(X_t)' over t = 0..n-1.

    The final observation X_n enters only the pricing matrix. Warns when
    n < k (underdetermined) or the result is numerically singular.
    """
    if panel.n < basis.dimension_k:
        warnings.warn(
            f"n={panel.n} below basis dimension k={basis.dimension_k}; "
            "Gram matrix is singular",
            stacklevel=2,
        )
    b0 = basis.evaluate_many(panel.x0)
    gram = b0.T @ b0 / panel.n
    gram = 0.5 * (gram + gram.T)
    if np.linalg.cond(gram) > 1e12:
        warnings.warn("Gram matrix numerically singular (condition > 1e12)", stacklevel=2)
    return gram


def estimate_pricing(basis: SieveBasis, panel: StatePanel) -> np.ndarray:
    """Sample pricing matrix (1/n) sum_t b(X_t) m_t b(X_{t+1})'.

    The panel must carry a realized SDF increment series m_t; whether m_t
    comes from a known formula or a plug-in with estimated components is
    the caller's concern.
    """
    if panel.sdf_increments is None:
        raise ValueError("panel has no sdf_increments; attach a realized SDF series")
    m = panel.sdf_increments
    b0 = basis.evaluate_many(panel.x0)
    b1 = basis.evaluate_many(panel.x1)
    return b0.T @ (m[:, None] * b1) / panel.n


def apply_nonlinear(
    basis: SieveBasis,
    panel: StatePanel,
    beta: float,
    gamma: float,
    v: np.ndarray,
) -> np.ndarray:
    """Sample value-recursion map (1/n) sum_t b(X_t) G_{t+1}^{1-gamma} |b(X_{t+1})'v|^beta.

    Positively homogeneous of degree beta in v. G^{1-gamma} is computed as
    exp((1-gamma) log G) so that large risk aversion does not overflow
    before the log would.
    """
    if panel.growth is None:
        raise ValueError("panel has no growth series")
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    with np.errstate(over="ignore"):
        gw = np.exp((1.0 - gamma) * np.log(panel.growth))
    if not np.all(np.isfinite(gw)):
        t = int(np.argmax(~np.isfinite(gw)))
        raise ValueError(f"G^(1-gamma) overflows at t={t}; gamma too extreme for the data")
    b0 = basis.evaluate_many(panel.x0)
    b1 = basis.evaluate_many(panel.x1)
    inner = np.abs(b1 @ np.asarray(v, dtype=float)) ** beta
    return b0.T @ (gw * inner) / panel.n


def estimate_matrices(basis: SieveBasis, panel: StatePanel) -> SieveMatrices:
    """Convenience bundle of the Gram and pricing matrices."""
    return SieveMatrices(
        gram=estimate_gram(basis, panel),
        pricing=estimate_pricing(basis, panel),
        k=basis.dimension_k,
        n=panel.n,
    )
