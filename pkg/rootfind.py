"""
Bisection Solvers for the Rate Constraint

Two monotone one-dimensional problems:

    N_sig*    : g(N_sig + N_eff) - g(N_eff) = R_sum     (increasing in N_sig)
    Gamma_max : g(N_sig_max + N_eff) - g(N_eff) = R_sum (decreasing in N_eff)

Residuals are accepted within tolerance * max(1, |R_sum|).
"""

import logging
import math
import sys
from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

from entropy import _rate_gap, max_sum_rate
from estimator import Scenario

logger = logging.getLogger(__name__)


class InfeasibleRateError(ValueError):
    """Requested sum-rate cannot be reached"""

    def __init__(self, requested: float, achievable: float, message: Optional[str] = None):
        self.requested = requested
        self.achievable = achievable
        super().__init__(
            message or
            f"Requested sum-rate {requested:.6g} bits exceeds achievable {achievable:.6g} bits"
        )


@dataclass(frozen=True)
class BisectionSpec:
    """
    Bisection settings

    lo/hi override the natural bracket of each problem when given.
    tolerance is the eps_MSE of the AO algorithm.
    """
    tolerance: float = 1e-6
    max_steps: int = 200
    lo: Optional[float] = None
    hi: Optional[float] = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.lo is not None and self.hi is not None and self.lo > self.hi:
            raise ValueError(f"lo = {self.lo} > hi = {self.hi}")

    def bracket(self, lo: float, hi: float) -> 'BisectionSpec':
        """Fill in the bracket, keeping any explicit override"""
        return replace(
            self,
            lo=lo if self.lo is None else self.lo,
            hi=hi if self.hi is None else self.hi,
        )

    def residual_tolerance(self, target: float) -> float:
        return self.tolerance * max(1.0, abs(target))


@dataclass(frozen=True)
class RootResult:
    """Root of a bisection problem with its forward residual"""
    root: float
    residual: float
    steps: int


def step_bound(lo: float, hi: float, tolerance: float) -> int:
    """Bisection steps needed to shrink [lo, hi] below tolerance"""
    if hi - lo <= tolerance:
        return 0
    return math.ceil(math.log2((hi - lo) / tolerance))


def _width_floor(lo: float, hi: float) -> float:
    return 4.0 * sys.float_info.epsilon * max(1.0, abs(lo), abs(hi))


def bisect_monotone(func: Callable[[float], float], target: float, lo: float,
                    hi: float, tolerance: float, max_steps: int,
                    increasing: bool = True) -> RootResult:
    """
    Solve func(x) = target on [lo, hi] for a monotone func

    The caller guarantees the residuals at lo and hi bracket the target.
    Stops once |func(x) - target| <= tolerance. Otherwise the loop ends
    only at max_steps or when the bracket reaches floating-point
    resolution; the width in x is never compared with tolerance.

    Args:
        func: Monotone function of one variable
        target: Value to reach
        lo, hi: Bracket
        tolerance: Absolute residual tolerance
        max_steps: Step cap
        increasing: Direction of monotonicity

    Returns:
        RootResult with the midpoint of the final bracket
    """
    sign = 1.0 if increasing else -1.0
    steps = 0
    x = 0.5 * (lo + hi)
    residual = func(x) - target

    while abs(residual) > tolerance:
        if hi - lo <= _width_floor(lo, hi):
            break
        if steps >= max_steps:
            logger.warning(
                f"Bisection hit max_steps = {max_steps} with residual {residual:.3g}"
            )
            break
        if sign * residual > 0:
            hi = x
        else:
            lo = x
        x = 0.5 * (lo + hi)
        residual = func(x) - target
        steps += 1

    return RootResult(root=x, residual=residual, steps=steps)


def solve_nsig(scenario: Scenario, n_eff: float, r_sum: float,
               spec: BisectionSpec = BisectionSpec(),
               full_output: bool = False) -> Union[float, RootResult]:
    """
    Aggregate communication power that meets the requested sum-rate

    Solves g(N_sig + n_eff) - g(n_eff) = r_sum over [0, N_sig_max].

    Args:
        scenario: Problem instance
        n_eff: Effective noise-plus-OAC power (>= N0)
        r_sum: Requested sum-rate (bits, >= 0)
        spec: Tolerance and step cap
        full_output: Return a RootResult instead of the root

    Returns:
        N_sig* (or RootResult)

    Raises:
        InfeasibleRateError: r_sum unreachable at this n_eff
    """
    if r_sum < 0:
        raise ValueError(f"r_sum must be >= 0, got {r_sum}")
    if n_eff < scenario.N0 - 1e-12:
        raise ValueError(f"n_eff = {n_eff} below N0 = {scenario.N0}")

    if r_sum == 0:
        result = RootResult(root=0.0, residual=0.0, steps=0)
        return result if full_output else result.root

    spec = spec.bracket(0.0, scenario.n_sig_max)
    tol = spec.residual_tolerance(r_sum)
    rate_at_max = _rate_gap(spec.hi, n_eff)

    if rate_at_max < r_sum - tol:
        raise InfeasibleRateError(r_sum, rate_at_max)

    if rate_at_max <= r_sum + tol:
        result = RootResult(root=spec.hi, residual=rate_at_max - r_sum, steps=0)
    else:
        result = bisect_monotone(
            lambda n_sig: _rate_gap(n_sig, n_eff), r_sum,
            spec.lo, spec.hi, tol, spec.max_steps, increasing=True,
        )

    return result if full_output else result.root


def solve_gamma_max(scenario: Scenario, r_sum: float,
                    spec: BisectionSpec = BisectionSpec(),
                    full_output: bool = False) -> Union[float, RootResult]:
    """
    Largest aggregate OAC power compatible with the requested sum-rate

    Solves g(N_sig_max + N_eff) - g(N_eff) = r_sum for N_eff and returns
    Gamma_max = N_eff - N0, capped at sum_k eta_k P_c (constraint inactive).

    Args:
        scenario: Problem instance
        r_sum: Requested sum-rate (bits)
        spec: Tolerance and step cap
        full_output: Return a RootResult (root = Gamma_max)

    Returns:
        Gamma_max (or RootResult)

    Raises:
        ValueError: r_sum beyond max_sum_rate(scenario)
    """
    if r_sum < 0:
        raise ValueError(f"r_sum must be >= 0, got {r_sum}")

    r_max = max_sum_rate(scenario)
    tol = spec.residual_tolerance(r_sum)
    if r_sum > r_max + tol:
        raise InfeasibleRateError(r_sum, r_max)

    n_sig_max = scenario.n_sig_max
    cap = scenario.gamma_cap
    spec = spec.bracket(scenario.N0, scenario.N0 + cap)

    def rate(n_eff: float) -> float:
        return _rate_gap(n_sig_max, n_eff)

    rate_hi = rate(spec.hi)
    if rate_hi >= r_sum:
        # Rate constraint inactive over the whole box
        return RootResult(cap, rate_hi - r_sum, 0) if full_output else cap

    rate_lo = rate(spec.lo)
    if rate_lo <= r_sum + tol:
        return RootResult(0.0, rate_lo - r_sum, 0) if full_output else 0.0

    result = bisect_monotone(
        rate, r_sum, spec.lo, spec.hi, tol, spec.max_steps, increasing=False,
    )
    gamma = min(max(result.root - scenario.N0, 0.0), cap)
    result = RootResult(root=gamma, residual=result.residual, steps=result.steps)
    return result if full_output else result.root
