"""Experiment configuration loaded from INI-style files."""

import configparser
import logging
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, Union

from .algebra import DEFAULT_TOL
from .certifier import DEFAULT_LAMBDA_GRID, OBJECTIVE_MODES
from .dunford import DEFAULT_DUNFORD_GRID, DEFAULT_NODES
from .exceptions import ConfigurationException
from .generators import CONSTRUCTIONS, GeneratorSpec
from .kk.normalizing import DEFAULT_QUADRATURE_NODES
from .kk.positivity import DEFAULT_KAPPA
from .square_sum import DEFAULT_EPSILON_GRID, DEFAULT_Z_IMAG, DEFAULT_Z_REAL
from .sum_engine import DEFAULT_SUM_GRID

logger = logging.getLogger(__name__)

SUITES = (
    "certify",
    "sum-converge",
    "clifford",
    "square-sum",
    "dunford",
    "kk-check",
    "identities",
)

THREADS_ENV = "WAC_LAB_THREADS"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

Grid = Tuple[float, ...]


@dataclass(frozen=True)
class RunConfig:
    """Section [run]: what to execute and where to write it."""

    suite: Tuple[str, ...] = ("identities",)
    seed: int = 0
    out: str = "reports"
    tol: float = DEFAULT_TOL
    threads: int = 1
    instances: int = 1
    """Seeded instances per suite; instance i uses seed + i."""

    log_level: str = "WARNING"


@dataclass(frozen=True)
class InstanceConfig:
    """Section [instance]: the generator recipe shared by every suite."""

    construction: str = "clifford_tensor"
    k: int = 1
    n: int = 4
    spectral_scale: float = 1.0
    anticommutator_target: float = 0.5
    matrix_s: Optional[str] = None
    matrix_t: Optional[str] = None

    def generator_spec(self, seed: int) -> GeneratorSpec:
        return GeneratorSpec(
            k=self.k,
            n=self.n,
            spectral_scale=self.spectral_scale,
            anticommutator_target=self.anticommutator_target,
            construction=self.construction,
            seed=seed,
            matrix_s=self.matrix_s,
            matrix_t=self.matrix_t,
        )


@dataclass(frozen=True)
class CertifyConfig:
    mode: str = "weighted"
    lambda_grid: Grid = DEFAULT_LAMBDA_GRID


@dataclass(frozen=True)
class SumConfig:
    mu: float = 1.0
    """|mu| of the convergence sweep; mu = i * |mu|."""

    lambda_grid: Grid = DEFAULT_SUM_GRID
    mu_grid: Grid = (1.0, 2.0, 5.0, 10.0)
    """|mu| values searched for the threshold mu0."""


@dataclass(frozen=True)
class SquareSumConfig:
    z_real: Grid = DEFAULT_Z_REAL
    z_imag: Grid = DEFAULT_Z_IMAG
    epsilon_grid: Grid = DEFAULT_EPSILON_GRID
    samples: int = 1000


@dataclass(frozen=True)
class DunfordConfig:
    lambda_grid: Grid = DEFAULT_DUNFORD_GRID
    nodes: int = DEFAULT_NODES
    theta_steps: int = 64
    """The theta grid is k * pi / theta_steps for 0 < k < theta_steps."""

    @property
    def theta_grid(self) -> Grid:
        return tuple(k * math.pi / self.theta_steps for k in range(1, self.theta_steps))


@dataclass(frozen=True)
class KKConfig:
    kappa: float = DEFAULT_KAPPA
    nodes: int = DEFAULT_QUADRATURE_NODES
    mu_grid: Grid = (0.1, 1.0, 10.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Complete experiment description, one experiment per file.

    Example:
        >>> config = load_config("experiment.ini")
        >>> config = config.with_overrides(seed=7)
        >>> config.run.seed
        7
    """

    run: RunConfig = field(default_factory=RunConfig)
    instance: InstanceConfig = field(default_factory=InstanceConfig)
    certify: CertifyConfig = field(default_factory=CertifyConfig)
    sum: SumConfig = field(default_factory=SumConfig)
    square_sum: SquareSumConfig = field(default_factory=SquareSumConfig)
    dunford: DunfordConfig = field(default_factory=DunfordConfig)
    kk: KKConfig = field(default_factory=KKConfig)
    source: Optional[str] = None
    """Path the configuration was read from."""

    def with_overrides(
        self,
        seed: Optional[int] = None,
        out: Optional[str] = None,
        tol: Optional[float] = None,
        suite: Optional[Tuple[str, ...]] = None,
        log_level: Optional[str] = None,
    ) -> "ExperimentConfig":
        """Apply command-line overrides; None leaves the file value in place."""
        changes: Dict[str, Any] = {}
        if seed is not None:
            changes["seed"] = _check_seed(seed)
        if out is not None:
            changes["out"] = out
        if tol is not None:
            changes["tol"] = _check_positive("tol", tol)
        if suite is not None:
            changes["suite"] = _check_suites(suite)
        if log_level is not None:
            changes["log_level"] = _check_log_level(log_level)
        return replace(self, run=replace(self.run, **changes))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "run": {
                "suite": list(self.run.suite),
                "seed": self.run.seed,
                "out": self.run.out,
                "tol": self.run.tol,
                "threads": self.run.threads,
                "instances": self.run.instances,
            },
            "instance": {
                "construction": self.instance.construction,
                "k": self.instance.k,
                "n": self.instance.n,
                "spectral_scale": self.instance.spectral_scale,
                "anticommutator_target": self.instance.anticommutator_target,
                "matrix_s": self.instance.matrix_s,
                "matrix_t": self.instance.matrix_t,
            },
            "certify": {
                "mode": self.certify.mode,
                "lambda_grid": list(self.certify.lambda_grid),
            },
            "sum": {
                "mu": self.sum.mu,
                "lambda_grid": list(self.sum.lambda_grid),
                "mu_grid": list(self.sum.mu_grid),
            },
            "square_sum": {
                "z_real": list(self.square_sum.z_real),
                "z_imag": list(self.square_sum.z_imag),
                "epsilon_grid": list(self.square_sum.epsilon_grid),
                "samples": self.square_sum.samples,
            },
            "dunford": {
                "lambda_grid": list(self.dunford.lambda_grid),
                "nodes": self.dunford.nodes,
                "theta_steps": self.dunford.theta_steps,
            },
            "kk": {
                "kappa": self.kk.kappa,
                "nodes": self.kk.nodes,
                "mu_grid": list(self.kk.mu_grid),
            },
        }


# ---------------------------------------------------------------------------
# Value parsing
# ---------------------------------------------------------------------------


def _check_seed(seed: int) -> int:
    if not 0 <= seed < 2**64:
        raise ConfigurationException("Seed must be an unsigned 64-bit integer", {"seed": seed})
    return seed


def _check_positive(name: str, value: float) -> float:
    if not value > 0 or not math.isfinite(value):
        raise ConfigurationException(f"{name} must be positive and finite", {name: value})
    return value


def _check_suites(suites: Tuple[str, ...]) -> Tuple[str, ...]:
    if not suites:
        raise ConfigurationException("Suite list is empty", {"valid_values": list(SUITES)})
    unknown = [name for name in suites if name not in SUITES]
    if unknown:
        raise ConfigurationException(
            "Unknown suite", {"suite": unknown, "valid_values": list(SUITES)}
        )
    return tuple(suites)


def _check_log_level(level: str) -> str:
    level = level.upper()
    if level not in LOG_LEVELS:
        raise ConfigurationException(
            "Unknown log level", {"log_level": level, "valid_values": list(LOG_LEVELS)}
        )
    return level


def _split(raw: str) -> Tuple[str, ...]:
    return tuple(item.strip() for item in raw.replace("\n", ",").split(",") if item.strip())


def _value(
    parser: configparser.ConfigParser,
    section: str,
    key: str,
    convert: Callable[[str], Any],
    default: Any,
) -> Any:
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key)
    try:
        return convert(raw)
    except ValueError as e:
        raise ConfigurationException(
            "Malformed value", {"section": section, "key": key, "value": raw}
        ) from e


def _grid(raw: str) -> Grid:
    values = tuple(float(item) for item in _split(raw))
    if not values:
        raise ValueError("empty grid")
    return values


def _threads(configured: int) -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return configured
    try:
        threads = int(raw)
    except ValueError as e:
        raise ConfigurationException("Malformed thread count", {THREADS_ENV: raw}) from e
    if threads < 1:
        raise ConfigurationException("Thread count must be >= 1", {THREADS_ENV: raw})
    return threads


def _run_section(parser: configparser.ConfigParser) -> RunConfig:
    defaults = RunConfig()
    suites = _value(parser, "run", "suite", _split, defaults.suite)
    threads = _value(parser, "run", "threads", int, defaults.threads)
    instances = _value(parser, "run", "instances", int, defaults.instances)
    if instances < 1:
        raise ConfigurationException("instances must be >= 1", {"instances": instances})
    if threads < 1:
        raise ConfigurationException("threads must be >= 1", {"threads": threads})
    return RunConfig(
        suite=_check_suites(suites),
        seed=_check_seed(_value(parser, "run", "seed", int, defaults.seed)),
        out=_value(parser, "run", "out", str, defaults.out),
        tol=_check_positive("tol", _value(parser, "run", "tol", float, defaults.tol)),
        threads=_threads(threads),
        instances=instances,
        log_level=_check_log_level(_value(parser, "run", "log_level", str, defaults.log_level)),
    )


def _instance_section(parser: configparser.ConfigParser, base: Path) -> InstanceConfig:
    defaults = InstanceConfig()

    def path(raw: str) -> str:
        return str((base / raw.strip()).resolve())

    instance = InstanceConfig(
        construction=_value(parser, "instance", "construction", str, defaults.construction),
        k=_value(parser, "instance", "k", int, defaults.k),
        n=_value(parser, "instance", "n", int, defaults.n),
        spectral_scale=_value(
            parser, "instance", "spectral_scale", float, defaults.spectral_scale
        ),
        anticommutator_target=_value(
            parser, "instance", "anticommutator_target", float, defaults.anticommutator_target
        ),
        matrix_s=_value(parser, "instance", "matrix_s", path, None),
        matrix_t=_value(parser, "instance", "matrix_t", path, None),
    )
    if instance.construction not in CONSTRUCTIONS:
        raise ConfigurationException(
            "Unknown construction",
            {"construction": instance.construction, "valid_values": list(CONSTRUCTIONS)},
        )
    try:
        instance.generator_spec(0)
    except ValueError as e:
        raise ConfigurationException("Invalid instance recipe", {"error": str(e)}) from e
    return instance


def parse_config(
    text: str, source: Optional[Union[str, Path]] = None
) -> ExperimentConfig:
    """
    Parse configuration text.

    Relative matrix paths resolve against the directory of ``source``.

    Raises:
        ConfigurationException: On syntax errors, unknown suites or constructions, or
            malformed numbers
    """
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigurationException("Cannot parse configuration", {"error": str(e)}) from e
    base = Path(source).parent if source is not None else Path.cwd()

    mode = _value(parser, "certify", "mode", str, CertifyConfig.mode)
    if mode not in OBJECTIVE_MODES:
        raise ConfigurationException(
            "Unknown objective mode", {"mode": mode, "valid_values": list(OBJECTIVE_MODES)}
        )
    kappa = _value(parser, "kk", "kappa", float, DEFAULT_KAPPA)
    nodes = _value(parser, "dunford", "nodes", int, DEFAULT_NODES)
    theta_steps = _value(parser, "dunford", "theta_steps", int, 64)
    if theta_steps < 2:
        raise ConfigurationException("theta_steps must be >= 2", {"theta_steps": theta_steps})

    config = ExperimentConfig(
        run=_run_section(parser),
        instance=_instance_section(parser, base),
        certify=CertifyConfig(
            mode=mode,
            lambda_grid=_value(parser, "certify", "lambda_grid", _grid, DEFAULT_LAMBDA_GRID),
        ),
        sum=SumConfig(
            mu=_check_positive("mu", _value(parser, "sum", "mu", float, SumConfig.mu)),
            lambda_grid=_value(parser, "sum", "lambda_grid", _grid, DEFAULT_SUM_GRID),
            mu_grid=_value(parser, "sum", "mu_grid", _grid, SumConfig.mu_grid),
        ),
        square_sum=SquareSumConfig(
            z_real=_value(parser, "square_sum", "z_real", _grid, DEFAULT_Z_REAL),
            z_imag=_value(parser, "square_sum", "z_imag", _grid, DEFAULT_Z_IMAG),
            epsilon_grid=_value(
                parser, "square_sum", "epsilon_grid", _grid, DEFAULT_EPSILON_GRID
            ),
            samples=_value(parser, "square_sum", "samples", int, SquareSumConfig.samples),
        ),
        dunford=DunfordConfig(
            lambda_grid=_value(parser, "dunford", "lambda_grid", _grid, DEFAULT_DUNFORD_GRID),
            nodes=nodes,
            theta_steps=theta_steps,
        ),
        kk=KKConfig(
            kappa=_check_positive("kappa", kappa),
            nodes=_value(parser, "kk", "nodes", int, DEFAULT_QUADRATURE_NODES),
            mu_grid=_value(parser, "kk", "mu_grid", _grid, KKConfig.mu_grid),
        ),
        source=None if source is None else str(source),
    )
    logger.debug("parsed configuration: %s", config.to_dict())
    return config


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Load an experiment configuration file.

    Raises:
        ConfigurationException: If the file cannot be read or is invalid
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationException("Cannot read configuration", {"path": str(path)}) from e
    return parse_config(text, source=path)
