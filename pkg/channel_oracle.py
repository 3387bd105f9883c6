"""
Monte-Carlo Channel Oracle

Simulates the equivalent classical channel seen after heterodyne detection,

    y = sum_k sqrt(eta_k g_k) s_k + sum_m sqrt(eta_{K+m} P_m) d_m + z,
    z ~ CN(0, N0),

and estimates E|S - h y|^2 with S = sum_k s_k. Gives an independent check
of the analytic MSE expressions.

Samples are drawn in fixed-size batches; batch b uses the generator keyed
by (seed, b), so results do not depend on how batches are scheduled.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from estimator import Allocation, Scenario

logger = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 100_000


class SymbolDistribution(Enum):
    CIRCULAR_GAUSSIAN = 'gaussian'
    UNIFORM_PHASE_QPSK = 'qpsk'


@dataclass(frozen=True)
class SymbolModel:
    """Unit-power, zero-mean symbol distribution plus the 64-bit seed"""
    distribution: SymbolDistribution = SymbolDistribution.CIRCULAR_GAUSSIAN
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class McEstimate:
    mse_hat: float
    std_err: float
    n_samples: int

    def z_score(self, analytic: float) -> float:
        """Deviation from an analytic value in standard errors"""
        if self.std_err == 0:
            return 0.0 if self.mse_hat == analytic else math.inf
        return abs(self.mse_hat - analytic) / self.std_err

    def agrees_with(self, analytic: float, n_sigma: float = 4.0) -> bool:
        return abs(self.mse_hat - analytic) <= n_sigma * self.std_err


@dataclass(frozen=True)
class _Moments:
    """Sufficient statistics of the squared error over one batch"""
    count: int
    total: float
    total_sq: float


def draw_symbols(rng: np.random.Generator, distribution: SymbolDistribution,
                 shape: Tuple[int, ...]) -> np.ndarray:
    """Zero-mean, unit-power, independent complex symbols"""
    if distribution is SymbolDistribution.CIRCULAR_GAUSSIAN:
        re = rng.standard_normal(shape)
        im = rng.standard_normal(shape)
        return (re + 1j * im) / math.sqrt(2.0)
    if distribution is SymbolDistribution.UNIFORM_PHASE_QPSK:
        quadrant = rng.integers(0, 4, size=shape)
        return np.exp(1j * (np.pi / 4 + np.pi / 2 * quadrant))
    raise ValueError(f"Unknown symbol distribution: {distribution}")


def _batch_moments(scenario: Scenario, oac_gains: np.ndarray, comm_gains: np.ndarray,
                   h: complex, model: SymbolModel, batch_index: int,
                   batch_size: int) -> _Moments:
    seq = np.random.SeedSequence(entropy=model.seed, spawn_key=(batch_index,))
    rng = np.random.default_rng(seq)

    s = draw_symbols(rng, model.distribution, (batch_size, scenario.K))
    d = draw_symbols(rng, model.distribution, (batch_size, scenario.M))
    noise_std = math.sqrt(scenario.N0 / 2.0)
    z = noise_std * (rng.standard_normal(batch_size) + 1j * rng.standard_normal(batch_size))

    y = s @ oac_gains + z
    if scenario.M:
        y = y + d @ comm_gains
    target = s.sum(axis=1)
    err = np.abs(target - h * y) ** 2
    return _Moments(count=batch_size, total=float(err.sum()), total_sq=float((err ** 2).sum()))


def _resolve_workers(workers: Optional[int]) -> int:
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return workers


def simulate_mse(scenario: Scenario, alloc: Allocation, comm_powers: Sequence[float],
                 model: SymbolModel = SymbolModel(), n_samples: int = 1_000_000,
                 batch_size: int = DEFAULT_BATCH_SIZE,
                 workers: Optional[int] = 1) -> McEstimate:
    """
    Empirical MSE of the linear estimator S_hat = h y

    Args:
        scenario: Problem instance
        alloc: Allocation (g and h are used; n_sig is checked against comm_powers)
        comm_powers: Communication powers P_m (M,)
        model: Symbol distribution and seed
        n_samples: Number of channel uses
        batch_size: Samples per independently keyed batch
        workers: Batches evaluated concurrently (None or 0 = CPU count)

    Returns:
        McEstimate with sample mean and standard error

    Raises:
        ValueError: infeasible allocation or bad sample count
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")

    alloc.check_feasible(scenario)
    comm_powers = np.asarray(comm_powers, dtype=float)
    if comm_powers.shape != (scenario.M,):
        raise ValueError(f"comm_powers must have M = {scenario.M} entries, got {comm_powers.size}")
    if np.any(comm_powers < 0) or np.any(comm_powers > scenario.Pt * (1 + 1e-12)):
        raise ValueError(f"comm_powers outside [0, Pt = {scenario.Pt}]: {comm_powers}")
    n_sig = float(scenario.eta_comm @ comm_powers) if scenario.M else 0.0
    if abs(n_sig - alloc.n_sig) > 1e-9 * max(1.0, alloc.n_sig):
        raise ValueError(
            f"comm_powers give N_sig = {n_sig:.12g}, allocation says {alloc.n_sig:.12g}"
        )

    oac_gains = np.sqrt(scenario.eta_oac * np.maximum(alloc.g, 0.0))
    comm_gains = np.sqrt(scenario.eta_comm * comm_powers)
    h = complex(alloc.h)

    sizes = [batch_size] * (n_samples // batch_size)
    if n_samples % batch_size:
        sizes.append(n_samples % batch_size)

    def run(index: int) -> _Moments:
        return _batch_moments(scenario, oac_gains, comm_gains, h, model, index, sizes[index])

    n_workers = min(_resolve_workers(workers), len(sizes))
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            moments = list(pool.map(run, range(len(sizes))))
    else:
        moments = [run(i) for i in range(len(sizes))]

    # Combine in batch order so the floating-point result is schedule-independent
    count = sum(m.count for m in moments)
    total = math.fsum(m.total for m in moments)
    total_sq = math.fsum(m.total_sq for m in moments)

    mean = total / count
    if count > 1:
        variance = max(total_sq - count * mean ** 2, 0.0) / (count - 1)
        std_err = math.sqrt(variance / count)
    else:
        std_err = 0.0

    logger.debug(f"Monte-Carlo MSE {mean:.6g} +/- {std_err:.3g} over {count} samples")
    return McEstimate(mse_hat=mean, std_err=std_err, n_samples=count)
