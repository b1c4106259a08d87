"""Independent ground truth for the Gaussian AR(1) testbed.

Two routes that never touch the sample estimators: a closed-form
exponential-affine solution for power utility (the conditional moment
generating function of a Gaussian AR(1) is exponentially affine, so the
eigenfunction is an exponential in the state), and a dense Gauss-Hermite
discretization of the population operators that works for any of the
supported preference specifications. Tests compare the two against each
other and the estimators against either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.linalg
from numpy.polynomial.hermite import hermgauss

from .preferences import PowerUtility, RecursiveUtility


@dataclass(frozen=True)
class Ar1Design:
    """Gaussian AR(1) law for log growth: g' - mu = kappa (g - mu) + sigma e."""

    mu: float
    kappa: float
    sigma: float

    def __post_init__(self):
        if not abs(self.kappa) < 1:
            raise ValueError("need |kappa| < 1 for stationarity")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    @property
    def stationary_std(self) -> float:
        return self.sigma / math.sqrt(1.0 - self.kappa**2)


@dataclass(frozen=True)
class AffineSolution:
    """Closed-form eigenvalue, log-eigenfunction slope, and entropy."""

    rho: float
    slope_a: float
    entropy_L: float


def affine_power_utility_solution(
    design: Ar1Design, beta: float, gamma: float
) -> AffineSolution:
    """Exponential-affine solution of the power-utility eigenproblem.

    The eigenfunction is proportional to exp(a (x - mu)) with
    a = -gamma kappa / (1 - kappa); the eigenvalue and the entropy of the
    permanent component follow from the Gaussian moment generating
    function.
    """
    if design.kappa == 1:
        raise ValueError("kappa = 1 has no stationary solution")
    a = -gamma * design.kappa / (1.0 - design.kappa)
    half_var = gamma**2 * design.sigma**2 / (2.0 * (1.0 - design.kappa) ** 2)
    rho = beta * math.exp(-gamma * design.mu + half_var)
    return AffineSolution(rho=rho, slope_a=a, entropy_L=half_var)


@dataclass(frozen=True)
class QuadratureOperator:
    """Dense discretization of the pricing operator on a stationary grid.

    ``kernel[i, j]`` approximates the operator so that (K psi)(x_i) is
    kernel @ psi; ``weights`` integrate against the stationary law and sum
    to one. ``transition`` is the plain conditional-expectation matrix and
    ``sdf`` the per-pair SDF values m(x_i, x_j).
    """

    nodes: np.ndarray
    weights: np.ndarray
    kernel: np.ndarray
    transition: np.ndarray
    sdf: Optional[np.ndarray] = None

    def lr_mean(self, vals: np.ndarray) -> float:
        """Stationary mean of a function given on the nodes."""
        return float(self.weights @ vals)

    def pair_mean(self, vals_ij: np.ndarray) -> float:
        """Stationary mean of a function of the transition pair (x_i, x_j)."""
        return float(self.weights @ np.sum(self.transition * vals_ij, axis=1))


def stationary_grid(design: Ar1Design, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes/weights for the stationary law N(mu, sigma_x^2)."""
    u, w = hermgauss(q)
    nodes = design.mu + math.sqrt(2.0) * design.stationary_std * u
    weights = w / math.sqrt(math.pi)
    return nodes, weights


def transition_matrix(
    design: Ar1Design, nodes: np.ndarray, weights: np.ndarray
) -> np.ndarray:
    """Conditional-expectation matrix P with (P psi)_i ~ E[psi(X') | X = x_i].

    P[i, j] = f(x_j | x_i) w_j / f_Q(x_j): the transition density
    re-weighted against the stationary law carried by the quadrature.
    """
    mu, kappa, sigma = design.mu, design.kappa, design.sigma
    sd_x = design.stationary_std
    cond_mean = mu + kappa * (nodes - mu)
    f_cond = (
        np.exp(-0.5 * ((nodes[None, :] - cond_mean[:, None]) / sigma) ** 2)
        / (sigma * math.sqrt(2.0 * math.pi))
    )
    f_stat = np.exp(-0.5 * ((nodes - mu) / sd_x) ** 2) / (sd_x * math.sqrt(2.0 * math.pi))
    return f_cond * (weights / f_stat)[None, :]


@dataclass(frozen=True)
class QuadratureSolution:
    """Population eigen objects on the quadrature grid."""

    rho: float
    phi: np.ndarray
    phi_star: np.ndarray
    operator: QuadratureOperator
    lam: Optional[float] = None
    chi: Optional[np.ndarray] = None
    yield_y: float = 0.0
    entropy_L: float = 0.0
    sdf_entropy: float = 0.0

    @property
    def nodes(self) -> np.ndarray:
        return self.operator.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.operator.weights


def _positive_eigvec(kernel: np.ndarray, rho: float, weights: np.ndarray) -> np.ndarray:
    """Positive dominant eigenvector by power iteration.

    The grid kernel is entrywise non-negative, so power iteration from the
    constant vector keeps every component non-negative; a QZ eigenvector
    would instead carry rounding noise of arbitrary sign at far-tail nodes
    whose weight has underflowed.
    """
    v = np.ones(kernel.shape[0])
    for _ in range(2000):
        nxt = kernel @ v / rho
        nxt = nxt / math.sqrt(float(weights @ nxt**2))
        if math.sqrt(float(weights @ (nxt - v) ** 2)) < 1e-14:
            return nxt
        v = nxt
    return v


def _largest_real_pair(kernel: np.ndarray, weights: np.ndarray):
    """Largest real eigenvalue with positive right/adjoint eigenvectors."""
    vals = scipy.linalg.eigvals(kernel)
    real = np.flatnonzero(np.abs(vals.imag) <= 1e-10 * (1.0 + np.abs(vals.real)))
    rho = float(np.max(vals.real[real]))

    phi = _positive_eigvec(kernel, rho, weights)
    # The grid adjoint in the weighted inner product is D^-1 K' D, so the
    # adjoint eigenfunction solves the transposed problem reweighted by D.
    u = _positive_eigvec(kernel.T, rho, weights)
    phi_star = u / weights

    phi = phi / math.sqrt(float(weights @ phi**2))
    phi_star = phi_star / float(weights @ (phi * phi_star))
    return rho, phi, phi_star


def _recursive_grid_solution(
    beta: float,
    gamma: float,
    nodes: np.ndarray,
    weights: np.ndarray,
    transition: np.ndarray,
    tol: float = 1e-13,
    max_iter: int = 100_000,
) -> tuple[float, np.ndarray]:
    """Unit-norm eigenfunction and eigenvalue of the grid value-recursion operator."""
    growth_w = np.exp((1.0 - gamma) * nodes)
    H = transition * growth_w[None, :]

    def t_apply(v):
        return H @ np.abs(v) ** beta

    chi = np.ones(nodes.size)
    for _ in range(max_iter):
        image = t_apply(chi)
        nxt = image / math.sqrt(float(weights @ image**2))
        if math.sqrt(float(weights @ (nxt - chi) ** 2)) < tol:
            chi = nxt
            break
        chi = nxt
    else:
        raise RuntimeError("value-recursion iteration did not converge on the grid")
    lam = math.sqrt(float(weights @ t_apply(chi) ** 2))
    return lam, chi


def quadrature_eig(
    design: Ar1Design,
    sdf_spec: Union[PowerUtility, RecursiveUtility],
    q_nodes: int = 80,
) -> QuadratureSolution:
    """Population eigenvalue/eigenfunctions via dense quadrature.

    Discretizes the pricing operator on a Gauss-Hermite grid under the
    stationary law and solves the dense eigenproblem. For recursive
    preferences the continuation-value eigenpair is solved first on the
    same grid and the implied SDF plugged into the pricing operator.
    Growth is exp of the (next-period) state throughout.
    """
    if q_nodes < 40:
        raise ValueError("use at least 40 quadrature nodes")
    nodes, weights = stationary_grid(design, q_nodes)
    P = transition_matrix(design, nodes, weights)

    lam = None
    chi = None
    if isinstance(sdf_spec, PowerUtility):
        m_pair = sdf_spec.beta * np.exp(-sdf_spec.gamma * nodes)[None, :] * np.ones(
            (q_nodes, 1)
        )
    elif isinstance(sdf_spec, RecursiveUtility):
        lam, chi = _recursive_grid_solution(
            sdf_spec.beta, sdf_spec.gamma, nodes, weights, P
        )
        m_pair = (
            (sdf_spec.beta / lam)
            * np.exp(-sdf_spec.gamma * nodes)[None, :]
            * (chi[None, :] ** sdf_spec.beta / chi[:, None])
        )
    else:
        raise TypeError(f"unsupported SDF specification {sdf_spec!r}")

    kernel = m_pair * P
    op = QuadratureOperator(
        nodes=nodes, weights=weights, kernel=kernel, transition=P, sdf=m_pair
    )
    rho, phi, phi_star = _largest_real_pair(kernel, weights)

    log_m = np.log(m_pair)
    mean_log_m = op.pair_mean(log_m)
    mean_m = op.pair_mean(m_pair)
    return QuadratureSolution(
        rho=rho,
        phi=phi,
        phi_star=phi_star,
        operator=op,
        lam=lam,
        chi=chi,
        yield_y=-math.log(rho),
        entropy_L=math.log(rho) - mean_log_m,
        sdf_entropy=math.log(mean_m) - mean_log_m,
    )


def population_sieve_matrices(
    op: QuadratureOperator, basis
) -> tuple[np.ndarray, np.ndarray]:
    """Population Gram and pricing matrices of a basis under the grid operator.

    The counterparts of the sample matrices: G = E[b b'] and
    M = E[b(X) m b(X')'], both integrated on the quadrature grid.
    """
    B = basis.evaluate_many(op.nodes)
    WB = op.weights[:, None] * B
    return B.T @ WB, B.T @ (op.weights[:, None] * (op.kernel @ B))


def population_nonlinear_map(
    design: Ar1Design, basis, beta: float, gamma: float, q_nodes: int = 80
):
    """Population analogue of the sample value-recursion map on coefficients."""
    nodes, weights = stationary_grid(design, q_nodes)
    P = transition_matrix(design, nodes, weights)
    H = P * np.exp((1.0 - gamma) * nodes)[None, :]
    B = basis.evaluate_many(nodes)

    def t_map(v: np.ndarray) -> np.ndarray:
        return B.T @ (weights * (H @ np.abs(B @ v) ** beta))

    gram = B.T @ (weights[:, None] * B)
    return t_map, gram
