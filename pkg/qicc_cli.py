"""
QICC Power-Allocation Command Line

Subcommands:
    solve     - solve one scenario at one requested sum-rate
    sweep     - MSE vs sum-rate trade-off curve on a uniform grid [0, R_max]
    converge  - per-iteration convergence trace
    validate  - Monte-Carlo check of the analytic MSE at the solution
    reproduce - trade-off curves and traces for all reference configurations
    info      - version, model assumptions and limitations

Exit codes: 0 success, 1 config error, 2 infeasible, 3 validation failure.
Environment: QICC_THREADS caps sweep concurrency (0 or unset = auto).
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from channel_oracle import simulate_mse
from config import (
    HALF_MAX,
    ConfigError,
    QiccConfig,
    config_label,
    load_config,
    reference_configs,
    with_overrides,
)
from entropy import max_sum_rate
from estimator import Allocation, full_mse, mse_min, reduced_mse
from rootfind import InfeasibleRateError
from solver import (
    Solution,
    Termination,
    ao_solve,
    multi_start,
    projected_gradient_norm,
)

logger = logging.getLogger('qicc')

VERSION = '1.0.0'

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_VALIDATION = 3

SWEEP_HEADER = ['r_sum_bits', 'mse', 'iterations', 'status']
CONVERGE_HEADER = ['iter', 'mse', 'n_sig', 'aggregate_oac_power']


def fmt(value: float) -> str:
    """12 significant digits, the CSV number format"""
    return f"{value:.12g}"


@dataclass(frozen=True)
class TradeoffPoint:
    r_sum: float
    mse: float
    iterations: int
    status: str


@dataclass
class SweepResult:
    points: List[TradeoffPoint]
    r_max: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator='\n')
        writer.writerow(SWEEP_HEADER)
        for p in self.points:
            writer.writerow([fmt(p.r_sum), fmt(p.mse), p.iterations, p.status])
        return buf.getvalue()


def resolve_r_sum(config: QiccConfig, r_sum: Union[float, str, None]) -> float:
    """Requested sum-rate from a flag or the config; 'half-max' means R_max/2"""
    value = config.r_sum if r_sum is None else r_sum
    if value == HALF_MAX:
        return 0.5 * max_sum_rate(config.scenario)
    try:
        r = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"--r-sum must be a number or {HALF_MAX!r}, got {value!r}")
    if r < 0:
        raise ConfigError(f"--r-sum must be >= 0, got {r}")
    return r


def sweep_threads() -> Optional[int]:
    """Worker cap from QICC_THREADS (None = auto)"""
    raw = os.environ.get('QICC_THREADS', '0').strip() or '0'
    try:
        n = int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer QICC_THREADS={raw!r}")
        return None
    return n if n > 0 else None


def solve_config(config: QiccConfig, r_sum: float, starts: int = 1) -> Solution:
    params = replace(config.solver, r_sum=r_sum)
    if starts > 1:
        return multi_start(config.scenario, params, starts, seed=config.oracle.seed)
    return ao_solve(config.scenario, params)


def _solve_point(config: QiccConfig, r_sum: float,
                 g_init: Optional[Sequence[float]] = None) -> Tuple[TradeoffPoint, Optional[Solution]]:
    params = replace(config.solver, r_sum=r_sum)
    if g_init is not None:
        params = replace(params, g_init=tuple(g_init))
    try:
        solution = ao_solve(config.scenario, params)
    except InfeasibleRateError:
        return TradeoffPoint(r_sum, float('nan'), 0, Termination.INFEASIBLE.value), None
    except (ValueError, ArithmeticError) as e:
        logger.error(f"Sweep point r_sum={r_sum:.6g} failed: {e}")
        return TradeoffPoint(r_sum, float('nan'), 0, 'Error'), None
    return TradeoffPoint(
        r_sum, solution.mse, solution.iterations, solution.trace.terminated_by.value,
    ), solution


def run_sweep(config: QiccConfig, grid: Optional[int] = None,
              warm_start: Optional[bool] = None,
              threads: Optional[int] = None) -> SweepResult:
    """
    Solve on a uniform r_sum grid over [0, R_max] (or the config's explicit
    list). Points are independent unless warm_start; rows stay in grid order.
    """
    r_max = max_sum_rate(config.scenario)
    if config.sweep.r_sum is not None and grid is None:
        rates = sorted(set(config.sweep.r_sum))
    else:
        n = grid if grid is not None else config.sweep.grid
        if n < 2:
            raise ConfigError(f"grid must be >= 2, got {n}")
        rates = list(np.linspace(0.0, r_max, n))
    warm = config.sweep.warm_start if warm_start is None else warm_start

    if warm:
        points = []
        g_prev = None
        for r in rates:
            point, solution = _solve_point(config, r, g_prev)
            points.append(point)
            if solution is not None:
                g_prev = solution.alloc.g
    else:
        workers = threads if threads is not None else sweep_threads()
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = [p for p, _ in pool.map(lambda r: _solve_point(config, r), rates)]

    return SweepResult(points=points, r_max=r_max)


def trace_csv(solution: Solution) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(CONVERGE_HEADER)
    for rec in solution.trace.records:
        writer.writerow([rec.iteration, fmt(rec.mse), fmt(rec.n_sig), fmt(rec.aggregate)])
    return buf.getvalue()


def solution_record(config: QiccConfig, solution: Solution) -> dict:
    sc = config.scenario
    return {
        'scenario': {'K': sc.K, 'M': sc.M, 'eta': list(sc.eta), 'N0': sc.N0, 'Pc': sc.Pc, 'Pt': sc.Pt},
        'r_sum': solution.r_sum,
        'r_max': max_sum_rate(sc),
        'mse': solution.mse,
        'mse_min': mse_min(sc),
        'mse_max': float(sc.K),
        'g': solution.alloc.g.tolist(),
        'n_sig': solution.alloc.n_sig,
        'h': float(np.real(solution.alloc.h)),
        'comm_powers': solution.comm_powers.tolist(),
        'gamma_max': solution.gamma_max,
        'iterations': solution.iterations,
        'terminated_by': solution.trace.terminated_by.value,
        'warnings': solution.warnings,
    }


def _write_text(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text, encoding='utf-8')
        logger.info(f"Wrote {path}")
    else:
        sys.stdout.write(text)


def cmd_solve(args: argparse.Namespace) -> int:
    config = _load(args)
    r_sum = resolve_r_sum(config, args.r_sum)
    solution = solve_config(config, r_sum, starts=args.starts)
    sc = config.scenario

    print("=" * 60)
    print("QICC Power Allocation - Solution")
    print("=" * 60)
    print(f"Scenario:        K={sc.K}, M={sc.M}, N0={sc.N0:g}, Pc={sc.Pc:g}, Pt={sc.Pt:g}")
    print(f"Requested rate:  {r_sum:.6g} bits (R_max = {max_sum_rate(sc):.6g})")
    print(f"MSE:             {solution.mse:.9g} (MSE_min = {mse_min(sc):.9g}, MSE_max = {sc.K})")
    print(f"g:               {np.array2string(solution.alloc.g, precision=6)}")
    print(f"N_sig:           {solution.alloc.n_sig:.9g}")
    print(f"h:               {float(np.real(solution.alloc.h)):.9g}")
    print(f"P_m:             {np.array2string(solution.comm_powers, precision=6)}")
    print(f"Gamma_max:       {solution.gamma_max:.9g}")
    print(f"Iterations:      {solution.iterations} ({solution.trace.terminated_by.value})")
    pg_norm = projected_gradient_norm(
        sc, solution.alloc.g, solution.alloc.n_sig, solution.gamma_max, config.solver.mu,
    )
    print(f"Stationarity:    {pg_norm:.3g}")
    for w in solution.warnings:
        print(f"WARNING: {w}")

    if args.out:
        Path(args.out).write_text(json.dumps(solution_record(config, solution), indent=2), encoding='utf-8')
        logger.info(f"Wrote {args.out}")
    if args.pdf:
        from report_generator import generate_report
        generate_report(config, solution, args.pdf)
        logger.info(f"Wrote {args.pdf}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load(args)
    result = run_sweep(config, grid=args.grid, warm_start=args.warm_start or None)
    _write_text(args.out, result.to_csv())
    return EXIT_OK


def cmd_converge(args: argparse.Namespace) -> int:
    config = _load(args)
    r_sum = resolve_r_sum(config, args.r_sum)
    solution = solve_config(config, r_sum)
    _write_text(args.out, trace_csv(solution))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    config = _load(args)
    sc = config.scenario
    r_sum = resolve_r_sum(config, args.r_sum)
    solution = solve_config(config, r_sum)

    h = float(np.real(solution.alloc.h)) + args.h_offset
    alloc = Allocation(g=solution.alloc.g, n_sig=solution.alloc.n_sig, h=h)
    model = replace(config.oracle.model, seed=args.seed if args.seed is not None else config.oracle.seed)
    n_samples = args.samples if args.samples is not None else config.oracle.n_samples

    estimate = simulate_mse(
        sc, alloc, solution.comm_powers, model, n_samples,
        batch_size=config.oracle.batch_size, workers=sweep_threads(),
    )
    analytic_reduced = reduced_mse(sc, alloc.g, alloc.n_sig)
    analytic_full = full_mse(sc, alloc)
    reference = analytic_full if args.against == 'full' else analytic_reduced
    passed = estimate.agrees_with(reference, n_sigma=4.0)

    print(f"Analytic MSE (reduced): {analytic_reduced:.9g}")
    print(f"Analytic MSE (full, h={h:.6g}): {analytic_full:.9g}")
    print(f"Empirical MSE:          {estimate.mse_hat:.9g}")
    print(f"Standard error:         {estimate.std_err:.3g} ({estimate.n_samples} samples)")
    print(f"Deviation:              {estimate.z_score(reference):.2f} sigma vs {args.against}")
    print(f"Result:                 {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_VALIDATION


def cmd_reproduce(args: argparse.Namespace) -> int:
    base = _load(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for power in args.power:
        for config in reference_configs(power, base):
            label = config_label(config)
            result = run_sweep(config, grid=args.grid)
            (out_dir / f"tradeoff_{label}.csv").write_text(result.to_csv(), encoding='utf-8')
            solution = solve_config(config, 0.5 * max_sum_rate(config.scenario))
            (out_dir / f"convergence_{label}.csv").write_text(trace_csv(solution), encoding='utf-8')
            logger.info(f"{label}: R_max = {result.r_max:.6g}, trace {solution.iterations} iterations")
    return EXIT_OK


def cmd_info(args: argparse.Namespace) -> int:
    print(json.dumps({
        'name': 'QICC power-allocation solver',
        'version': VERSION,
        'model': 'single-mode bosonic MAC, coherent-state signalling, heterodyne detection',
        'algorithm': 'alternating optimization: LMMSE h, bisection N_sig, projected-gradient g',
        'commands': ['solve', 'sweep', 'converge', 'validate', 'reproduce', 'info'],
        'limitations': [
            'Sum-rate constraint only (no per-user rate region)',
            'Stationary point only; no global-optimality certificate',
            'Classical-equivalent channel after heterodyne detection',
            'No entanglement or squeezing resources',
        ],
    }, indent=2))
    return EXIT_OK


def _load(args: argparse.Namespace) -> QiccConfig:
    config = load_config(args.config)
    return with_overrides(
        config,
        monotone_guard=True if getattr(args, 'monotone_guard', False) else None,
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog='qicc', description="QICC power allocation over a bosonic MAC")
    ap.add_argument('-v', '--verbose', action='store_true', help="Debug logging")
    ap.add_argument('-q', '--quiet', action='store_true', help="Warnings and errors only")
    sub = ap.add_subparsers(dest='cmd', required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument('--config', type=str, default=None, help="JSON config (default.json if omitted)")
        p.add_argument('--monotone-guard', action='store_true', help="Reject MSE-increasing steps")

    aps = sub.add_parser('solve', help="Solve one scenario")
    common(aps)
    aps.add_argument('--r-sum', type=str, default=None, help="Requested sum-rate in bits or 'half-max'")
    aps.add_argument('--out', type=str, default=None, help="Write a JSON solution record")
    aps.add_argument('--pdf', type=str, default=None, help="Write a PDF calculation report")
    aps.add_argument('--starts', type=int, default=1, help="Multi-start count (best MSE kept)")
    aps.set_defaults(func=cmd_solve)

    apw = sub.add_parser('sweep', help="MSE vs sum-rate trade-off curve")
    common(apw)
    apw.add_argument('--grid', type=int, default=None, help="Grid points over [0, R_max] (>= 2)")
    apw.add_argument('--warm-start', action='store_true', help="Start each point from the previous g")
    apw.add_argument('--out', type=str, default=None, help="CSV path (stdout if omitted)")
    apw.set_defaults(func=cmd_sweep)

    apc = sub.add_parser('converge', help="Per-iteration convergence trace")
    common(apc)
    apc.add_argument('--r-sum', type=str, default=None, help="Requested sum-rate in bits or 'half-max'")
    apc.add_argument('--out', type=str, default=None, help="CSV path (stdout if omitted)")
    apc.set_defaults(func=cmd_converge)

    apv = sub.add_parser('validate', help="Monte-Carlo check of the analytic MSE")
    common(apv)
    apv.add_argument('--r-sum', type=str, default=None, help="Requested sum-rate in bits or 'half-max'")
    apv.add_argument('--samples', type=int, default=None, help="Monte-Carlo samples")
    apv.add_argument('--seed', type=int, default=None, help="Unsigned 64-bit seed")
    apv.add_argument('--h-offset', type=float, default=0.0, help="Perturb h before simulating")
    apv.add_argument('--against', choices=['reduced', 'full'], default='reduced',
                     help="Analytic formula used for PASS/FAIL")
    apv.set_defaults(func=cmd_validate)

    apr = sub.add_parser('reproduce', help="Curves and traces for all reference configurations")
    common(apr)
    apr.add_argument('--out', type=str, required=True, help="Output directory")
    apr.add_argument('--power', type=float, nargs='+', default=[5.0, 10.0], help="Pc = Pt values")
    apr.add_argument('--grid', type=int, default=21, help="Grid points per curve")
    apr.set_defaults(func=cmd_reproduce)

    api = sub.add_parser('info', help="Version and model limitations")
    api.set_defaults(func=cmd_info)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s')

    try:
        return args.func(args)
    except ConfigError as e:
        print(f"Config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleRateError as e:
        print(f"Infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as e:
        print(f"Invalid input: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
