"""
Scenario Configuration Files

JSON configuration with four blocks:

    scenario : K, M, eta (list or split rule), N0, Pc, Pt
    solver   : r_sum, mu, eps_ao, eps_mse, n_max, g_init, monotone_guard
    sweep    : grid (point count) or r_sum (explicit list), warm_start
    oracle   : n_samples, seed, distribution, batch_size

Missing keys take the values of the reference simulation setup
(mu = 1e-3, eps = 1e-6, n_max = 1000, N0 = 2, eta = 0.6/K and 0.4/M,
Pc = Pt = 10).
"""

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Tuple, Union

from channel_oracle import DEFAULT_BATCH_SIZE, SymbolDistribution, SymbolModel
from estimator import Scenario
from solver import InitPolicy, SolverParams

HALF_MAX = 'half-max'

DEFAULT_CONFIG_PATH = Path(__file__).with_name('default.json')

REFERENCE_KM = ((2, 2), (2, 4), (4, 2), (4, 4))


class ConfigError(ValueError):
    """Invalid or unreadable configuration"""

    def __init__(self, message: str, source: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[int] = None):
        self.source = source
        self.line = line
        self.column = column
        where = source or '<config>'
        if line is not None:
            where += f":{line}:{column}"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class OracleSettings:
    n_samples: int = 1_000_000
    seed: int = 0
    distribution: SymbolDistribution = SymbolDistribution.CIRCULAR_GAUSSIAN
    batch_size: int = DEFAULT_BATCH_SIZE

    @property
    def model(self) -> SymbolModel:
        return SymbolModel(distribution=self.distribution, seed=self.seed)


@dataclass(frozen=True)
class SweepSettings:
    grid: int = 21
    r_sum: Optional[Tuple[float, ...]] = None
    warm_start: bool = False


@dataclass(frozen=True)
class QiccConfig:
    """Parsed configuration file"""
    scenario: Scenario
    solver: SolverParams
    r_sum: Union[float, str] = 0.0
    sweep: SweepSettings = field(default_factory=SweepSettings)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    eta_rule: Optional[Dict[str, float]] = None
    source: Optional[str] = None


def _require(block: Dict[str, Any], key: str, source: Optional[str], name: str) -> Any:
    if key not in block:
        raise ConfigError(f"Missing required field: {name}.{key}", source)
    return block[key]


def _parse_int(value: Any, name: str, minimum: int, source: Optional[str]) -> int:
    """Integral JSON number >= minimum (2.0 is accepted, 2.5 and true are not)"""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be an integer, got {value!r}", source)
    if isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"{name} must be an integer, got {value!r}", source)
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value!r}", source)
    return int(value)


def _parse_rate_list(values: Any, source: Optional[str]) -> Tuple[float, ...]:
    if not isinstance(values, list) or not values:
        raise ConfigError(f"sweep.r_sum must be a non-empty list, got {values!r}", source)
    rates = tuple(float(r) for r in values)
    if any(r < 0 for r in rates):
        raise ConfigError(f"sweep.r_sum values must be >= 0, got {list(rates)}", source)
    if len(set(rates)) != len(rates):
        raise ConfigError(f"sweep.r_sum has duplicate values: {list(rates)}", source)
    return rates


def _parse_eta(spec: Any, K: int, M: int, source: Optional[str]):
    if spec is None:
        spec = {'rule': 'split'}
    if isinstance(spec, list):
        return tuple(float(e) for e in spec), None
    if isinstance(spec, dict):
        rule = spec.get('rule', 'split')
        if rule != 'split':
            raise ConfigError(f"Unknown eta rule: {rule!r}", source)
        shares = {
            'oac_share': float(spec.get('oac_share', 0.6 if M else 1.0)),
            'comm_share': float(spec.get('comm_share', 0.4 if M else 0.0)),
        }
        eta = [shares['oac_share'] / K] * K
        if M:
            eta += [shares['comm_share'] / M] * M
        return tuple(eta), shares
    raise ConfigError(f"eta must be a list or a rule object, got {type(spec).__name__}", source)


def _parse_g_init(value: Any, source: Optional[str]):
    if isinstance(value, list):
        return tuple(float(x) for x in value)
    try:
        return InitPolicy(value)
    except ValueError:
        raise ConfigError(f"Unknown g_init: {value!r} (use 'full', 'half' or a list)", source)


def _parse_r_sum(value: Any, source: Optional[str]) -> Union[float, str]:
    if value == HALF_MAX:
        return HALF_MAX
    try:
        r = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"r_sum must be a number or {HALF_MAX!r}, got {value!r}", source)
    if r < 0:
        raise ConfigError(f"r_sum must be >= 0, got {r}", source)
    return r


def parse_config(data: Dict[str, Any], source: Optional[str] = None) -> QiccConfig:
    """
    Build a QiccConfig from decoded JSON

    Raises:
        ConfigError: missing or invalid values
    """
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object", source)

    sc = data.get('scenario')
    if not isinstance(sc, dict):
        raise ConfigError("Missing required block: scenario", source)
    sv = data.get('solver', {})
    sw = data.get('sweep', {})
    orc = data.get('oracle', {})

    try:
        K = _parse_int(_require(sc, 'K', source, 'scenario'), 'scenario.K', 1, source)
        M = _parse_int(_require(sc, 'M', source, 'scenario'), 'scenario.M', 0, source)
        eta, eta_rule = _parse_eta(sc.get('eta'), K, M, source)
        scenario = Scenario(
            K=K, M=M, eta=eta,
            N0=float(sc.get('N0', 2.0)),
            Pc=float(sc.get('Pc', 10.0)),
            Pt=float(sc.get('Pt', sc.get('Pc', 10.0))),
        )

        solver = SolverParams(
            mu=float(sv.get('mu', 1e-3)),
            eps_ao=float(sv.get('eps_ao', 1e-6)),
            eps_mse=float(sv.get('eps_mse', 1e-6)),
            n_max=_parse_int(sv.get('n_max', 1000), 'solver.n_max', 1, source),
            g_init=_parse_g_init(sv.get('g_init', 'full'), source),
            monotone_guard=bool(sv.get('monotone_guard', False)),
        )
        r_sum = _parse_r_sum(sv.get('r_sum', 0.0), source)

        grid_r = sw.get('r_sum')
        sweep = SweepSettings(
            grid=_parse_int(sw.get('grid', 21), 'sweep.grid', 0, source),
            r_sum=_parse_rate_list(grid_r, source) if grid_r is not None else None,
            warm_start=bool(sw.get('warm_start', False)),
        )
        if sweep.r_sum is None and sweep.grid < 2:
            raise ConfigError(f"sweep.grid must be >= 2, got {sweep.grid}", source)

        oracle = OracleSettings(
            n_samples=_parse_int(orc.get('n_samples', 1_000_000), 'oracle.n_samples', 1, source),
            seed=_parse_int(orc.get('seed', 0), 'oracle.seed', 0, source),
            distribution=SymbolDistribution(orc.get('distribution', 'gaussian')),
            batch_size=_parse_int(orc.get('batch_size', DEFAULT_BATCH_SIZE), 'oracle.batch_size', 1, source),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e), source) from e

    return QiccConfig(
        scenario=scenario, solver=solver, r_sum=r_sum, sweep=sweep,
        oracle=oracle, eta_rule=eta_rule, source=source,
    )


def load_config(path: Union[str, Path, None] = None) -> QiccConfig:
    """
    Read and parse a JSON configuration file (default.json when path is None)

    Raises:
        ConfigError: unreadable file, JSON syntax error (with line/column)
            or invalid values
    """
    path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    source = str(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"Cannot read config: {e.strerror}", source) from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, source, e.lineno, e.colno) from e
    return parse_config(data, source)


def dump_config(config: QiccConfig) -> Dict[str, Any]:
    """Serialise a parsed configuration back to its JSON form"""
    sc = config.scenario
    eta: Any = dict(rule='split', **config.eta_rule) if config.eta_rule else list(sc.eta)
    sv = config.solver
    g_init = sv.g_init.value if isinstance(sv.g_init, InitPolicy) else list(sv.g_init)
    sweep: Dict[str, Any] = {'grid': config.sweep.grid, 'warm_start': config.sweep.warm_start}
    if config.sweep.r_sum is not None:
        sweep['r_sum'] = list(config.sweep.r_sum)
    return {
        'scenario': {'K': sc.K, 'M': sc.M, 'eta': eta, 'N0': sc.N0, 'Pc': sc.Pc, 'Pt': sc.Pt},
        'solver': {
            'r_sum': config.r_sum,
            'mu': sv.mu,
            'eps_ao': sv.eps_ao,
            'eps_mse': sv.eps_mse,
            'n_max': sv.n_max,
            'g_init': g_init,
            'monotone_guard': sv.monotone_guard,
        },
        'sweep': sweep,
        'oracle': {
            'n_samples': config.oracle.n_samples,
            'seed': config.oracle.seed,
            'distribution': config.oracle.distribution.value,
            'batch_size': config.oracle.batch_size,
        },
    }


def reference_configs(power: float = 10.0, base: Optional[QiccConfig] = None) -> Iterator[QiccConfig]:
    """
    The reference (K, M) configurations at Pc = Pt = power, sharing the
    solver settings of base (defaults when None)
    """
    base = base or parse_config({'scenario': {'K': 2, 'M': 2}})
    for K, M in REFERENCE_KM:
        scenario = Scenario.from_split(K, M, N0=base.scenario.N0, Pc=power, Pt=power)
        yield replace(
            base,
            scenario=scenario,
            eta_rule={'oac_share': 0.6, 'comm_share': 0.4},
            source=f"K={K},M={M},P={power:g}",
        )


def config_label(config: QiccConfig) -> str:
    sc = config.scenario
    return f"K{sc.K}_M{sc.M}_P{sc.Pc:g}"


def with_overrides(config: QiccConfig, **solver_overrides: Any) -> QiccConfig:
    """Replace solver settings, ignoring overrides that are None"""
    updates = {k: v for k, v in solver_overrides.items() if v is not None}
    if not updates:
        return config
    return replace(config, solver=replace(config.solver, **updates))
