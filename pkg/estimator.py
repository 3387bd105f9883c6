"""
OAC Estimator Algebra

Problem instance and decision-variable types for the QICC power-allocation
problem, and the MSE algebra of the over-the-air computation task:
LMMSE receive coefficient, full and reduced MSE, analytic gradient and the
MSE_min / MSE_max boundary values.

Model: y = sum_k sqrt(eta_k g_k) s_k + sum_m sqrt(eta_{K+m} P_m) d_m + z,
target S = sum_k s_k, estimate S_hat = h y, unit-power symbols.
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

# Shared lift for the 1/sqrt(g_k) singularity of the gradient
EPSILON_FLOOR = 1e-12

ETA_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Scenario:
    """
    Static QICC problem instance

    Attributes:
        K: Number of OAC devices (>= 1)
        M: Number of communication devices (>= 0)
        eta: K+M transmissivities in (0, 1], summing to 1
        N0: Noise mean photon number (> 0)
        Pc: OAC per-device power cap (> 0)
        Pt: Communication per-device power cap (> 0)
    """
    K: int
    M: int
    eta: Tuple[float, ...]
    N0: float = 2.0
    Pc: float = 10.0
    Pt: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, 'eta', tuple(float(e) for e in self.eta))

        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K!r}")
        if int(self.M) != self.M or self.M < 0:
            raise ValueError(f"M must be a non-negative integer, got {self.M!r}")
        if len(self.eta) != self.K + self.M:
            raise ValueError(
                f"eta must have K+M = {self.K + self.M} entries, got {len(self.eta)}"
            )
        for i, e in enumerate(self.eta):
            if not (0.0 < e <= 1.0):
                raise ValueError(f"eta[{i}] = {e} outside (0, 1]")
        if abs(sum(self.eta) - 1.0) > ETA_SUM_TOL:
            raise ValueError(f"eta must sum to 1, sums to {sum(self.eta):.12g}")
        for name in ('N0', 'Pc', 'Pt'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        object.__setattr__(self, 'K', int(self.K))
        object.__setattr__(self, 'M', int(self.M))

    @classmethod
    def from_split(cls, K: int, M: int, N0: float = 2.0, Pc: float = 10.0,
                   Pt: float = 10.0, oac_share: float = 0.6,
                   comm_share: float = 0.4) -> 'Scenario':
        """
        Build a scenario with the equal-split transmissivity rule
        eta_k = oac_share/K, eta_{K+m} = comm_share/M.
        """
        if M == 0:
            if comm_share > 0 and abs(oac_share - 1.0) > ETA_SUM_TOL:
                raise ValueError("M = 0 needs oac_share = 1 (no communication share to split)")
            eta = [oac_share / K] * K
        else:
            eta = [oac_share / K] * K + [comm_share / M] * M
        return cls(K=K, M=M, eta=tuple(eta), N0=N0, Pc=Pc, Pt=Pt)

    @property
    def eta_oac(self) -> np.ndarray:
        return np.asarray(self.eta[:self.K], dtype=float)

    @property
    def eta_comm(self) -> np.ndarray:
        return np.asarray(self.eta[self.K:], dtype=float)

    @property
    def n_sig_max(self) -> float:
        """Largest aggregate received communication power, sum_m eta_{K+m} P_t"""
        return float(np.sum(self.eta_comm) * self.Pt)

    @property
    def gamma_cap(self) -> float:
        """Largest aggregate OAC power the box allows, sum_k eta_k P_c"""
        return float(np.sum(self.eta_oac) * self.Pc)


@dataclass
class Allocation:
    """
    Decision variables: OAC powers g, aggregate communication power n_sig
    and the receive coefficient h (real in practice, kept complex-typed).
    """
    g: np.ndarray
    n_sig: float
    h: complex = 0.0

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float)
        self.n_sig = float(self.n_sig)

    def check_feasible(self, scenario: Scenario, atol: float = 1e-9) -> None:
        """
        Raise ValueError if the allocation violates its box constraints
        """
        if self.g.shape != (scenario.K,):
            raise ValueError(f"g must have K = {scenario.K} entries, got shape {self.g.shape}")
        if not np.all(np.isfinite(self.g)):
            raise ValueError("g contains non-finite values")
        if np.any(self.g < -atol) or np.any(self.g > scenario.Pc + atol):
            raise ValueError(f"g outside [0, Pc = {scenario.Pc}]: {self.g}")
        if self.n_sig < -atol or self.n_sig > scenario.n_sig_max + atol:
            raise ValueError(
                f"n_sig = {self.n_sig} outside [0, {scenario.n_sig_max}]"
            )


@dataclass(frozen=True)
class DerivedQuantities:
    """A = sum sqrt(eta_k g_k), D = E|y|^2, n_eff = N0 + sum eta_k g_k"""
    A: float
    D: float
    n_eff: float


def derived_quantities(scenario: Scenario, g: Sequence[float], n_sig: float) -> DerivedQuantities:
    g = np.maximum(np.asarray(g, dtype=float), 0.0)
    eta = scenario.eta_oac
    aggregate = float(eta @ g)
    A = float(np.sum(np.sqrt(eta * g)))
    return DerivedQuantities(
        A=A,
        D=aggregate + n_sig + scenario.N0,
        n_eff=scenario.N0 + aggregate,
    )


def oac_aggregate(scenario: Scenario, g: Sequence[float]) -> float:
    """Aggregate received OAC power sum_k eta_k g_k"""
    return float(scenario.eta_oac @ np.asarray(g, dtype=float))


def lmmse_coefficient(scenario: Scenario, g: Sequence[float], n_sig: float) -> float:
    """
    Optimal LMMSE receive coefficient h* = E[S y*] / E[|y|^2]

    Args:
        scenario: Problem instance
        g: OAC powers (K,)
        n_sig: Aggregate received communication power

    Returns:
        h* (real, since all channel gains are real and non-negative)
    """
    dq = derived_quantities(scenario, g, n_sig)
    return dq.A / dq.D


def full_mse(scenario: Scenario, alloc: Allocation) -> float:
    """
    MSE for an arbitrary receive coefficient h:

        sum_k |h sqrt(eta_k g_k) - 1|^2 + |h|^2 (N_sig + N0)
    """
    gains = np.sqrt(scenario.eta_oac * alloc.g)
    h = complex(alloc.h)
    bias = np.abs(h * gains - 1.0) ** 2
    return float(np.sum(bias) + abs(h) ** 2 * (alloc.n_sig + scenario.N0))


def reduced_mse(scenario: Scenario, g: Sequence[float], n_sig: float) -> float:
    """MSE at h = h*: K - A^2 / D"""
    dq = derived_quantities(scenario, g, n_sig)
    return scenario.K - dq.A ** 2 / dq.D


def mse_min(scenario: Scenario) -> float:
    """Smallest achievable MSE: every OAC device at P_c, communication silent"""
    return reduced_mse(scenario, np.full(scenario.K, scenario.Pc), 0.0)


def mse_max(scenario: Scenario) -> float:
    """Largest MSE (all OAC devices silent): exactly K"""
    return float(scenario.K)


def mse_gradient(scenario: Scenario, g: Sequence[float], n_sig: float,
                 epsilon_floor: float = EPSILON_FLOOR) -> np.ndarray:
    """
    Gradient of the reduced MSE with respect to the OAC powers, n_sig fixed

        dMSE/dg_k = -(D A sqrt(eta_k)/sqrt(g_k) - A^2 eta_k) / D^2

    Components below epsilon_floor are lifted to it before evaluation.
    """
    g_lift = np.maximum(np.asarray(g, dtype=float), epsilon_floor)
    eta = scenario.eta_oac
    dq = derived_quantities(scenario, g_lift, n_sig)
    A, D = dq.A, dq.D
    return -(D * A * np.sqrt(eta) / np.sqrt(g_lift) - A ** 2 * eta) / D ** 2
