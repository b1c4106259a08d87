"""Shared fixtures: the Gaussian AR(1) testbed and its oracle solutions."""

import numpy as np
import pytest

import sdfspectral as s

BETA, GAMMA = 0.994, 15.0


@pytest.fixture(scope="session")
def testbed() -> s.Ar1Design:
    return s.Ar1Design(mu=0.005, kappa=0.6, sigma=0.01)


@pytest.fixture(scope="session")
def power_prefs() -> s.PowerUtility:
    return s.PowerUtility(beta=BETA, gamma=GAMMA)


@pytest.fixture(scope="session")
def recursive_prefs() -> s.RecursiveUtility:
    return s.RecursiveUtility(beta=BETA, gamma=GAMMA)


@pytest.fixture(scope="session")
def quad_power(testbed, power_prefs) -> s.QuadratureSolution:
    return s.quadrature_eig(testbed, power_prefs, 80)


@pytest.fixture(scope="session")
def quad_recursive(testbed, recursive_prefs) -> s.QuadratureSolution:
    return s.quadrature_eig(testbed, recursive_prefs, 80)


@pytest.fixture(scope="session")
def panel3200(testbed) -> s.StatePanel:
    return s.simulate_ar1(testbed, 3200, np.random.default_rng(2024))


@pytest.fixture(scope="session")
def power_fit(panel3200, power_prefs):
    """Basis, matrices, and normalized eigen solution for the power design."""
    basis = s.BasisSpec(family="hermite", k=8).build(panel3200.states)
    m = s.power_utility_sdf_series(panel3200, power_prefs.beta, power_prefs.gamma)
    panel = panel3200.with_sdf(m)
    G = s.estimate_gram(basis, panel)
    M = s.estimate_pricing(basis, panel)
    sol = s.normalize(s.solve_generalized(M, G, const_coeffs=basis.const_coeffs), G)
    return {"basis": basis, "panel": panel, "G": G, "M": M, "sol": sol, "m": m}
