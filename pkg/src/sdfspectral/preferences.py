"""Preference specifications and the SDF increments they imply."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sievemat import StatePanel


@dataclass(frozen=True)
class PowerUtility:
    """CRRA time-separable preferences: m_t = beta * G_{t+1}^(-gamma)."""

    beta: float
    gamma: float

    kind = "power"


@dataclass(frozen=True)
class RecursiveUtility:
    """Unit-EIS recursive preferences; the SDF needs a solved continuation value."""

    beta: float
    gamma: float

    kind = "recursive"


def power_utility_sdf_series(panel: StatePanel, beta: float, gamma: float) -> np.ndarray:
    """Realized power-utility SDF increments beta * G^(-gamma) from the panel growth."""
    if panel.growth is None:
        raise ValueError("panel has no growth series")
    return beta * np.exp(-gamma * np.log(panel.growth))
