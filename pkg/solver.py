"""
Alternating-Optimization Solver for QICC Power Allocation

Minimises the OAC estimation MSE subject to a bosonic-MAC sum-rate
requirement by cycling through three blocks per iteration:

    1. LMMSE receive coefficient h (closed form)
    2. Aggregate communication power N_sig (bisection on the rate equation)
    3. OAC powers g (projected-gradient step, box clip, half-space projection)

until the MSE changes by less than eps_ao or n_max iterations have run.
Gamma_max, the aggregate OAC budget left by the rate requirement, is
computed once before the loop.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np

from entropy import max_sum_rate
from estimator import (
    Allocation,
    Scenario,
    lmmse_coefficient,
    oac_aggregate,
    reduced_mse,
)
from projgrad import PgParams, clip_box, pg_step, project_halfspace
from rootfind import (
    BisectionSpec,
    InfeasibleRateError,
    RootResult,
    solve_gamma_max,
    solve_nsig,
)

logger = logging.getLogger(__name__)

# Step halvings tried by the monotone guard before a step is rejected
GUARD_MAX_HALVINGS = 50

# Projected-gradient norm above which an eps_ao stop is reported as premature
STATIONARITY_TOL = 1e-3


class InitPolicy(Enum):
    FULL_POWER = 'full'
    HALF_POWER = 'half'


class Termination(Enum):
    TOLERANCE_MET = 'ToleranceMet'
    MAX_ITERATIONS = 'MaxIterations'
    INFEASIBLE = 'Infeasible'


@dataclass(frozen=True)
class SolverParams:
    """
    Inputs of the AO algorithm

    Attributes:
        r_sum: Requested sum-rate (bits per channel use)
        mu: Projected-gradient stepsize
        eps_ao: Stop when |MSE(n) - MSE(n-1)| <= eps_ao
        eps_mse: Bisection tolerance
        n_max: Iteration cap
        g_init: InitPolicy or an explicit K-vector of OAC powers
        monotone_guard: Halve the step until the MSE does not increase
    """
    r_sum: float = 0.0
    mu: float = 1e-3
    eps_ao: float = 1e-6
    eps_mse: float = 1e-6
    n_max: int = 1000
    g_init: Union[InitPolicy, Tuple[float, ...]] = InitPolicy.FULL_POWER
    monotone_guard: bool = False

    def __post_init__(self):
        if not self.r_sum >= 0:
            raise ValueError(f"r_sum must be >= 0, got {self.r_sum}")
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if not self.eps_ao > 0:
            raise ValueError(f"eps_ao must be > 0, got {self.eps_ao}")
        if not self.eps_mse > 0:
            raise ValueError(f"eps_mse must be > 0, got {self.eps_mse}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be a positive integer, got {self.n_max}")
        if not isinstance(self.g_init, InitPolicy):
            object.__setattr__(self, 'g_init', tuple(float(x) for x in self.g_init))

    @property
    def bisection(self) -> BisectionSpec:
        return BisectionSpec(tolerance=self.eps_mse)


@dataclass
class TraceRecord:
    iteration: int
    mse: float
    g: np.ndarray
    n_sig: float
    h: float
    aggregate: float
    nsig_residual: float = 0.0
    bisection_steps: int = 0
    note: Optional[str] = None


@dataclass
class ConvergenceTrace:
    """Per-iteration history of an AO run"""
    records: List[TraceRecord] = field(default_factory=list)
    terminated_by: Optional[Termination] = None

    @property
    def mse_values(self) -> np.ndarray:
        return np.array([r.mse for r in self.records])

    @property
    def n_iterations(self) -> int:
        """AO iterations run (record 0 is the initial point)"""
        return max(len(self.records) - 1, 0)

    @property
    def annotations(self) -> List[str]:
        return [f"iter {r.iteration}: {r.note}" for r in self.records if r.note]


@dataclass
class Solution:
    """Output of the AO algorithm"""
    alloc: Allocation
    mse: float
    comm_powers: np.ndarray
    trace: ConvergenceTrace
    gamma_max: float
    r_sum: float
    warnings: List[str] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return self.trace.n_iterations


def split_comm_powers(scenario: Scenario, n_sig: float) -> np.ndarray:
    """
    Uniform communication powers P_m = n_sig / sum_j eta_{K+j}

    Any split with sum_m eta_{K+m} P_m = n_sig gives the same MSE.

    Raises:
        ValueError: n_sig outside [0, N_sig_max]
    """
    n_sig_max = scenario.n_sig_max
    if n_sig < 0 or n_sig > n_sig_max * (1 + 1e-12) + 1e-15:
        raise ValueError(f"n_sig = {n_sig} outside communication budget [0, {n_sig_max}]")
    if scenario.M == 0:
        return np.zeros(0)
    power = n_sig / float(np.sum(scenario.eta_comm))
    return np.full(scenario.M, min(power, scenario.Pt))


def projected_gradient_norm(scenario: Scenario, g: np.ndarray, n_sig: float,
                            gamma_max: float, mu: float) -> float:
    """Stationarity measure ||g - P(g - mu grad)|| / mu"""
    g = np.asarray(g, dtype=float)
    moved = project_halfspace(scenario, pg_step(scenario, g, n_sig, PgParams(mu=mu)), gamma_max)
    return float(np.linalg.norm(g - moved) / mu)


class AOSolver:
    """
    Alternating-optimization solver for one scenario

    A solver instance is single-threaded; use one instance per concurrent run.
    """

    def __init__(self, scenario: Scenario, params: SolverParams):
        self.scenario = scenario
        self.params = params
        self.spec = params.bisection
        self.warnings: List[str] = []

    def initial_powers(self, gamma_max: float) -> np.ndarray:
        """
        Starting OAC powers, projected into the feasible set
        """
        sc = self.scenario
        policy = self.params.g_init
        if policy is InitPolicy.FULL_POWER:
            g0 = np.full(sc.K, sc.Pc)
        elif policy is InitPolicy.HALF_POWER:
            g0 = np.full(sc.K, 0.5 * sc.Pc)
        else:
            g0 = np.asarray(policy, dtype=float)
            if g0.shape != (sc.K,):
                raise ValueError(f"g_init must have K = {sc.K} entries, got {g0.size}")
            if np.any(g0 < 0) or np.any(g0 > sc.Pc):
                raise ValueError(f"g_init outside [0, Pc = {sc.Pc}]: {g0}")
        return project_halfspace(sc, clip_box(sc, g0), gamma_max)

    def update_nsig(self, g: np.ndarray) -> Tuple[RootResult, Optional[str]]:
        """
        N_sig* for the current OAC powers; clamps to N_sig_max when the
        rate is unreachable at this N_eff.
        """
        sc = self.scenario
        n_eff = sc.N0 + oac_aggregate(sc, g)
        try:
            return solve_nsig(sc, n_eff, self.params.r_sum, self.spec, full_output=True), None
        except InfeasibleRateError as e:
            note = (
                f"N_sig clamped to max {sc.n_sig_max:.6g}: rate {e.achievable:.6g} "
                f"< requested {e.requested:.6g} at N_eff = {n_eff:.6g}"
            )
            logger.warning(note)
            self.warnings.append(note)
            return RootResult(root=sc.n_sig_max, residual=e.achievable - e.requested, steps=0), note

    def solve(self) -> Solution:
        """
        Run the AO loop

        Returns:
            Solution with the final allocation, MSE, split communication
            powers and convergence trace

        Raises:
            InfeasibleRateError: r_sum exceeds the scenario's maximum sum-rate
        """
        sc, params = self.scenario, self.params
        self.warnings = []

        r_max = max_sum_rate(sc)
        if params.r_sum > r_max + self.spec.residual_tolerance(params.r_sum):
            raise InfeasibleRateError(
                params.r_sum, r_max,
                f"Requested sum-rate {params.r_sum:.6g} bits exceeds R_max = {r_max:.6g} bits",
            )

        gamma_max = solve_gamma_max(sc, params.r_sum, self.spec)
        logger.debug(f"Gamma_max = {gamma_max:.6g} (cap {sc.gamma_cap:.6g}), R_max = {r_max:.6g}")

        g = self.initial_powers(gamma_max)
        nsig_result, note = self.update_nsig(g)
        n_sig = nsig_result.root
        mse = reduced_mse(sc, g, n_sig)

        trace = ConvergenceTrace()
        trace.records.append(self._record(0, g, n_sig, mse, nsig_result, note))
        trace.terminated_by = Termination.MAX_ITERATIONS

        for n in range(1, params.n_max + 1):
            # h and N_sig blocks: h* at (g, N_sig*(g)); N_sig* carried from the MSE update
            pg = PgParams(mu=params.mu)
            g_new = project_halfspace(sc, pg_step(sc, g, n_sig, pg), gamma_max)
            nsig_new, note = self.update_nsig(g_new)
            mse_new = reduced_mse(sc, g_new, nsig_new.root)

            if params.monotone_guard and mse_new > mse:
                g_new, nsig_new, mse_new, note = self._guarded_step(g, n_sig, mse, gamma_max)

            delta = abs(mse_new - mse)
            g, n_sig, mse, nsig_result = g_new, nsig_new.root, mse_new, nsig_new
            trace.records.append(self._record(n, g, n_sig, mse, nsig_result, note))
            logger.debug(
                f"iter {n}: mse={mse:.9g} n_sig={n_sig:.6g} aggregate={oac_aggregate(sc, g):.6g}"
            )

            if delta <= params.eps_ao:
                trace.terminated_by = Termination.TOLERANCE_MET
                break

        logger.info(
            f"AO finished: {trace.terminated_by.value} after {trace.n_iterations} iterations, "
            f"MSE = {mse:.9g}"
        )
        if trace.terminated_by is Termination.TOLERANCE_MET:
            pg_norm = projected_gradient_norm(sc, g, n_sig, gamma_max, params.mu)
            if pg_norm > STATIONARITY_TOL:
                note = (
                    f"Stopped on eps_ao = {params.eps_ao:.3g} with projected-gradient norm "
                    f"{pg_norm:.3g} > {STATIONARITY_TOL:g}; lower eps_ao or raise mu"
                )
                logger.warning(note)
                self.warnings.append(note)

        h = lmmse_coefficient(sc, g, n_sig)
        alloc = Allocation(g=g, n_sig=n_sig, h=h)
        return Solution(
            alloc=alloc,
            mse=reduced_mse(sc, g, n_sig),
            comm_powers=split_comm_powers(sc, min(n_sig, sc.n_sig_max)),
            trace=trace,
            gamma_max=gamma_max,
            r_sum=params.r_sum,
            warnings=list(self.warnings),
        )

    def _guarded_step(self, g: np.ndarray, n_sig: float, mse: float, gamma_max: float):
        """Halve mu until the MSE does not increase; keep g if none works"""
        sc = self.scenario
        mu = self.params.mu
        for _ in range(GUARD_MAX_HALVINGS):
            mu *= 0.5
            g_try = project_halfspace(sc, pg_step(sc, g, n_sig, PgParams(mu=mu)), gamma_max)
            nsig_try, note = self.update_nsig(g_try)
            mse_try = reduced_mse(sc, g_try, nsig_try.root)
            if mse_try <= mse:
                return g_try, nsig_try, mse_try, note
        nsig_keep, note = self.update_nsig(g)
        return g.copy(), nsig_keep, reduced_mse(sc, g, nsig_keep.root), "step rejected by monotone guard"

    def _record(self, n: int, g: np.ndarray, n_sig: float, mse: float,
                nsig_result: RootResult, note: Optional[str]) -> TraceRecord:
        sc = self.scenario
        aggregate = oac_aggregate(sc, g)
        return TraceRecord(
            iteration=n,
            mse=mse,
            g=g.copy(),
            n_sig=n_sig,
            h=lmmse_coefficient(sc, g, n_sig),
            aggregate=aggregate,
            nsig_residual=nsig_result.residual,
            bisection_steps=nsig_result.steps,
            note=note,
        )


def ao_solve(scenario: Scenario, params: SolverParams) -> Solution:
    """Solve the QICC power-allocation problem with the AO algorithm"""
    return AOSolver(scenario, params).solve()


def multi_start(scenario: Scenario, params: SolverParams, starts: int,
                seed: int = 0) -> Solution:
    """
    Run the AO algorithm from the configured start plus starts-1 random
    box-feasible starts and keep the lowest MSE. No global-optimality claim.
    """
    if starts < 1:
        raise ValueError(f"starts must be >= 1, got {starts}")
    rng = np.random.default_rng(seed)
    best = ao_solve(scenario, params)
    for i in range(1, starts):
        g0 = tuple(rng.uniform(0.0, scenario.Pc, size=scenario.K))
        candidate = ao_solve(scenario, replace(params, g_init=g0))
        logger.debug(f"start {i}: mse = {candidate.mse:.9g}")
        if candidate.mse < best.mse:
            best = candidate
    return best
