"""
Thermal-State Entropy and Bosonic MAC Rates

Rate-side math for the QICC problem: the von Neumann entropy of a
single-mode thermal state, the sum-rate gap it induces on a bosonic
multiple-access channel, and the largest sum-rate a scenario supports.

Units: mean photon numbers (dimensionless) in, bits per channel use out.
"""

import math
from typing import TYPE_CHECKING, Union

import numpy as np

if TYPE_CHECKING:
    from estimator import Scenario

ArrayLike = Union[float, np.ndarray]

LN2 = math.log(2.0)

# Below this photon number g(x) is evaluated with its leading-order expansion
SMALL_X = 1e-12


def _check_photon_number(x: ArrayLike, name: str = 'x') -> np.ndarray:
    """Validate a mean photon number (scalar or array)"""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {x!r}")
    if np.any(arr < 0):
        raise ValueError(f"{name} must be >= 0, got {x!r}")
    return arr


def _g(x: ArrayLike) -> ArrayLike:
    """
    Unchecked g(x) for validated, non-negative input.

    Uses g(x) = ln(1+x) + x*ln(1 + 1/x) (both terms positive, no
    cancellation at large x), divided by ln 2.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        xf = float(arr)
        if xf < SMALL_X:
            if xf == 0.0:
                return 0.0
            return xf * (1.0 - math.log(xf)) / LN2
        return (math.log1p(xf) + xf * math.log1p(1.0 / xf)) / LN2

    out = np.zeros_like(arr)
    tiny = (arr > 0) & (arr < SMALL_X)
    big = arr >= SMALL_X
    out[tiny] = arr[tiny] * (1.0 - np.log(arr[tiny])) / LN2
    xb = arr[big]
    out[big] = (np.log1p(xb) + xb * np.log1p(1.0 / xb)) / LN2
    return out


def von_neumann_g(x: ArrayLike) -> ArrayLike:
    """
    Von Neumann entropy of a thermal state with mean photon number x

        g(x) = (x+1) log2(x+1) - x log2(x),   g(0) = 0

    Args:
        x: Mean photon number (float or array), >= 0 and finite

    Returns:
        Entropy in bits (same shape as x)

    Raises:
        ValueError: x negative or not finite
    """
    _check_photon_number(x)
    return _g(x)


def _rate_gap(n_sig: float, n_eff: float) -> float:
    return _g(n_sig + n_eff) - _g(n_eff)


def rate_gap(n_sig: ArrayLike, n_eff: ArrayLike) -> ArrayLike:
    """
    Bosonic MAC sum-rate bound g(N_sig + N_eff) - g(N_eff)

    Args:
        n_sig: Aggregate received communication power (photons)
        n_eff: Effective noise-plus-OAC-interference (photons)

    Returns:
        Achievable sum-rate in bits per channel use
    """
    _check_photon_number(n_sig, 'n_sig')
    _check_photon_number(n_eff, 'n_eff')
    return _g(np.asarray(n_sig, dtype=float) + np.asarray(n_eff, dtype=float)) - _g(n_eff)


def max_sum_rate(scenario: 'Scenario') -> float:
    """
    Largest sum-rate the scenario supports: all communication devices at
    P_t and no OAC interference (N_eff = N_0).
    """
    return float(_rate_gap(scenario.n_sig_max, scenario.N0))
