"""
Projected-Gradient Update for the OAC Powers

One descent step on the reduced MSE, a clip to the per-device box
[0, P_c], and a Euclidean projection onto the aggregate half-space
sum_k eta_k g_k <= Gamma_max.
"""

import logging
from dataclasses import dataclass

import numpy as np

from estimator import EPSILON_FLOOR, Scenario, mse_gradient

logger = logging.getLogger(__name__)

# Slack on the aggregate constraint after projection
AGGREGATE_SLACK = 1e-9


@dataclass(frozen=True)
class PgParams:
    """Stepsize mu and the gradient singularity lift"""
    mu: float = 1e-3
    epsilon_floor: float = EPSILON_FLOOR

    def __post_init__(self):
        if not self.mu >= 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        if not self.epsilon_floor > 0:
            raise ValueError(f"epsilon_floor must be > 0, got {self.epsilon_floor}")


def clip_box(scenario: Scenario, g: np.ndarray) -> np.ndarray:
    return np.clip(g, 0.0, scenario.Pc)


def pg_step(scenario: Scenario, g: np.ndarray, n_sig: float,
            params: PgParams = PgParams()) -> np.ndarray:
    """
    Gradient step followed by the box clip

        g_bar_k = min(P_c, max(0, g_k - mu dMSE/dg_k))
    """
    g = np.asarray(g, dtype=float)
    if params.mu == 0:
        return g.copy()
    grad = mse_gradient(scenario, g, n_sig, params.epsilon_floor)
    return clip_box(scenario, g - params.mu * grad)


def _project_halfspace_orthant(eta: np.ndarray, g_bar: np.ndarray,
                               gamma_max: float) -> np.ndarray:
    """
    Exact projection of g_bar >= 0 onto {g >= 0, eta.g <= gamma_max}.

    Michelot-style active-set iteration: shift the free components along
    eta until the aggregate hits gamma_max, freeze the ones driven below
    zero, repeat.
    """
    free = np.ones_like(g_bar, dtype=bool)
    g = g_bar.copy()
    for _ in range(g_bar.size):
        eta_f = eta[free]
        delta = (eta_f @ g_bar[free] - gamma_max) / (eta_f @ eta_f)
        g = np.where(free, g_bar - eta * delta, 0.0)
        negative = g < 0
        if not np.any(negative):
            break
        free &= ~negative
        if not np.any(free):
            g = np.zeros_like(g_bar)
            break
    return np.maximum(g, 0.0)


def project_halfspace(scenario: Scenario, g_bar: np.ndarray,
                      gamma_max: float) -> np.ndarray:
    """
    Project box-feasible OAC powers onto sum_k eta_k g_k <= gamma_max

    Closed form g_k = g_bar_k - eta_k (sum_j eta_j g_bar_j - gamma_max) / sum_j eta_j^2,
    then one clip to [0, P_c]. When that clip lifts negative components
    far enough to break the aggregate again, the exact projection onto the
    half-space intersected with g >= 0 is used instead.

    Args:
        scenario: Problem instance
        g_bar: Clipped OAC powers (K,)
        gamma_max: Aggregate cap (>= 0)

    Returns:
        Feasible OAC powers (K,)
    """
    if gamma_max < 0:
        raise ValueError(f"gamma_max must be >= 0, got {gamma_max}")

    g_bar = np.asarray(g_bar, dtype=float)
    eta = scenario.eta_oac
    aggregate = float(eta @ g_bar)
    if aggregate <= gamma_max:
        return g_bar.copy()

    delta = (aggregate - gamma_max) / float(eta @ eta)
    g = clip_box(scenario, g_bar - eta * delta)

    if float(eta @ g) > gamma_max + AGGREGATE_SLACK:
        logger.debug("Single-shot projection left the half-space; using exact projection")
        g = clip_box(scenario, _project_halfspace_orthant(eta, clip_box(scenario, g_bar), gamma_max))
    return g
