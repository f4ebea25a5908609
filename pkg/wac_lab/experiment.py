"""Seeded experiment orchestration: suites, instances and the experiment report."""

import logging
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np
import scipy

from .algebra import (
    ResidualReport,
    anticommutator,
    as_array,
    leibniz_residuals,
    operator_norm,
    resolvent_commutator_identities,
)
from .certifier import (
    CertificateObjective,
    certify_wac,
    form_norm_gap,
    graph_norm_constant,
    legacy_wac_check,
    verify_certificate,
)
from .clifford import (
    INDEX_PAIRS,
    clifford_block_operators,
    resolvent_lift_residuals,
    transfer_certificates,
    transform_pair,
    verify_doubling_relations,
)
from .config import ExperimentConfig, load_config
from .dunford import DEFAULT_QUAD_TOL, dunford_residual, dunford_sweep, spectral_angle
from .exceptions import (
    ConfigurationException,
    GenerationException,
    ReportIOException,
    WacLabException,
)
from .generators import Pair, anticommuting_pair, gen_pair
from .kk.identities import (
    k_mu_identities,
    k_mu_sweep,
    r_mu_identity,
    squared_resolvent_commutators,
)
from .kk.normalizing import arctan_bound
from .kk.positivity import kk2_inequality, kk3_bound, rescale_for_kappa
from .registry import get_suite, suite
from .reports import SCHEMA_VERSION, write_report
from .square_sum import interpolation_grid, kato_rellich_margin, square_sum_check
from .sum_engine import (
    CSV_COLUMNS,
    convergence_sweep,
    fitted_rate,
    mu0_threshold,
    resolvent_equation_residual,
    sum_identity_residuals,
)

logger = logging.getLogger(__name__)

Table = Tuple[List[str], List[List[Any]]]

RATE_WINDOW = (-1.15, -0.85)
DUNFORD_CORRECTED_TOL = 1e-6
TRANSFER_RTOL = 1e-9


@dataclass
class SuiteOutcome:
    """Data, pass/fail checks and side-table rows of one suite on one instance."""

    data: Dict[str, Any] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)
    tables: Dict[str, Table] = field(default_factory=dict)

    def check(self, name: str, ok: bool) -> None:
        self.checks[name] = bool(ok)

    @property
    def failures(self) -> List[str]:
        return sorted(name for name, ok in self.checks.items() if not ok)


@dataclass
class SuiteReport:
    name: str
    instances: List[Dict[str, Any]] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        return {"instances": self.instances, "failures": self.failures, "passed": self.passed}


@dataclass
class ExperimentReport:
    """
    Everything one experiment produced.

    All nondeterministic fields live under ``timestamp``; the rest reproduces exactly for the
    same configuration and seed.
    """

    config: Dict[str, Any]
    seed: int
    suites: Dict[str, SuiteReport] = field(default_factory=dict)
    tables: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    versions: Dict[str, str] = field(default_factory=dict)
    timestamp: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.suites.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": SCHEMA_VERSION,
            "config": self.config,
            "seed": self.seed,
            "passed": self.passed,
            "suites": {name: report.to_dict() for name, report in self.suites.items()},
            "tables": self.tables,
            "versions": self.versions,
            "timestamp": self.timestamp,
        }

    def __str__(self) -> str:
        mark = "✓" if self.passed else "✗"
        lines = [f"Experiment seed={self.seed} {mark}"]
        for name, report in self.suites.items():
            status = "passed" if report.passed else f"{len(report.failures)} failed checks"
            lines.append(f"  - {name}: {status}")
        return "\n".join(lines)


def _residual_check(outcome: SuiteOutcome, name: str, report: ResidualReport, tol: float):
    outcome.data[name] = report.to_dict()
    outcome.check(name, report.passed(tol))


def _certificate(S: Any, T: Any, config: ExperimentConfig):
    return certify_wac(
        S,
        T,
        "+",
        CertificateObjective(mode=config.certify.mode),
        lambda_grid=config.certify.lambda_grid,
    )


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


@suite("certify")
def run_certify(S: Any, T: Any, config: ExperimentConfig) -> SuiteOutcome:
    """Certificate, its re-verification, graph norms and the legacy comparison."""
    outcome = SuiteOutcome()
    cert = _certificate(S, T, config)
    verification = verify_certificate(S, T, cert, tol=config.run.tol)
    graph = graph_norm_constant(S, T)
    legacy = legacy_wac_check(S, T, "+", config.certify.lambda_grid)
    form, measured_form = form_norm_gap(S, T, cert)
    outcome.data.update(
        certificate=cert.to_dict(),
        verification=verification.to_dict(),
        graph_norm=graph.to_dict(),
        legacy=legacy.to_dict(),
        form_norm_gap={"certified": form, "measured": measured_form},
    )
    outcome.check("certificate_slack", verification.passed)
    outcome.check("graph_norm_upper", graph.upper_slack >= -1e-8 * graph.scale)
    outcome.check("graph_norm_lower", graph.lower_slack >= -1e-8 * graph.scale)
    outcome.check("graph_norm_easy", graph.easy_slack >= -1e-8 * graph.scale)
    outcome.check("form_norm_gap", measured_form <= form * (1 + 1e-9) + 1e-12)
    return outcome


@suite("sum-converge")
def run_sum_converge(S: Any, T: Any, config: ExperimentConfig) -> SuiteOutcome:
    """Resolvent convergence of the approximants and the threshold mu0."""
    outcome = SuiteOutcome()
    s, t = as_array(S), as_array(T)
    mu = 1j * config.sum.mu
    cert = _certificate(s, t, config)
    threshold = mu0_threshold(s, t, config.sum.mu_grid, config.sum.lambda_grid, cert)
    net = convergence_sweep(s, t, mu, config.sum.lambda_grid)

    # The rate is fitted where |lambda| dominates the operator norms.
    asymptotic = 10 * (operator_norm(s) + operator_norm(t) + config.sum.mu)
    tail = [entry for entry in net.entries if entry.lambda_abs >= asymptotic]
    tail_rate = fitted_rate([e.lambda_abs for e in tail], [e.residual for e in tail])
    outcome.data.update(
        mu0=threshold.mu0,
        mu0_worst_violation=threshold.worst_violation,
        fitted_rate=net.fitted_rate,
        asymptotic_rate=tail_rate,
        exact=net.exact,
    )
    outcome.check("theorem_bound", net.bound_holds())
    if tail_rate is not None and not net.exact:
        outcome.check("fitted_rate", RATE_WINDOW[0] <= tail_rate <= RATE_WINDOW[1])

    lam = 1j * max(config.sum.lambda_grid)
    equation = resolvent_equation_residual(s, t, lam, mu)
    outcome.data["resolvent_equation"] = equation.to_dict()
    outcome.check("resolvent_equation", equation.holds)
    _residual_check(
        outcome, "sum_identities", sum_identity_residuals(s, t, lam, mu), config.run.tol
    )
    outcome.tables["sum_converge"] = (list(CSV_COLUMNS), net.to_csv_rows())
    return outcome


@suite("clifford")
def run_clifford(S: Any, T: Any, config: ExperimentConfig) -> SuiteOutcome:
    """Parity transforms, block operators and certificate transfer."""
    outcome = SuiteOutcome()
    tol = config.run.tol
    _residual_check(outcome, "doubling_relations", verify_doubling_relations(S, T), tol)
    _residual_check(outcome, "block_operators", clifford_block_operators(S, T).report, tol)
    for i, j in INDEX_PAIRS:
        pair = transform_pair(S, T, i, j)
        _residual_check(outcome, f"transform[{i}{j}]", pair.report, tol)

    lifts = resolvent_lift_residuals(S, 1, 1j)
    outcome.data["resolvent_lift"] = lifts.to_dict()
    outcome.check("resolvent_lift", lifts.passed(tol))

    certificates = transfer_certificates(
        S, T, objective=CertificateObjective(mode=config.certify.mode)
    )
    source = certificates["source"]
    outcome.data["certificates"] = {name: cert.to_dict() for name, cert in certificates.items()}
    for i, j in INDEX_PAIRS:
        pair = transform_pair(S, T, i, j)
        carried = replace(source, sign=pair.target_sign)
        check = verify_certificate(pair.s, pair.t, carried, tol=tol)
        gap = abs(check.slack - source.slack) / max(check.scale, 1e-300)
        outcome.data[f"transfer_gap[{i}{j}]"] = gap
        outcome.check(f"transfer[{i}{j}]", gap <= TRANSFER_RTOL and check.passed)
    return outcome


@suite("square-sum")
def run_square_sum(S: Any, T: Any, config: ExperimentConfig) -> SuiteOutcome:
    """Self-adjointness chain of S^2 + T^2, interpolation and relative bounds."""
    outcome = SuiteOutcome()
    cert = _certificate(S, T, config)
    report = square_sum_check(S, T, cert)
    points = interpolation_grid(S, T, config.square_sum.z_real, config.square_sum.z_imag)
    curve = kato_rellich_margin(
        S,
        T,
        config.square_sum.epsilon_grid,
        samples=config.square_sum.samples,
        seed=config.run.seed,
    )
    k_norm = operator_norm(anticommutator(S, T))
    worst = max((point.ratio for point in points), default=0.0)
    outcome.data.update(
        square_sum=report.to_dict(),
        interpolation_max_ratio=worst,
        relative_bound=curve.to_dict(),
    )
    outcome.check("square_sum", report.passed)
    outcome.check("interpolation", worst <= 1 + 1e-10)
    outcome.check("relative_bound_monotone", curve.is_monotone())
    outcome.check("relative_bound_sound", curve.falsification <= 1e-9 * max(k_norm, 1.0))
    outcome.tables["interpolation"] = (
        ["re", "im", "norm", "p0_norm"],
        [[p.z.real, p.z.imag, p.norm, p.p0_norm] for p in points],
    )
    outcome.tables["relative_bound"] = (
        ["epsilon", "c_certified", "c_montecarlo"],
        curve.to_csv_rows(),
    )
    return outcome


@suite("dunford")
def run_dunford(S: Any, T: Any, config: ExperimentConfig) -> SuiteOutcome:
    """Contour approximant sweep and the spectral angle of S^2."""
    outcome = SuiteOutcome()
    s = as_array(S)
    sweep = dunford_sweep(S, T, config.dunford.lambda_grid, config.dunford.nodes)
    profile = spectral_angle(s @ s, config.dunford.theta_grid)
    outcome.data.update(
        dunford=sweep.to_dict(),
        spectral_angle=profile.spectral_angle,
        exact_angle=profile.exact_angle,
    )
    outcome.check("threshold_found", sweep.threshold is not None)
    for row in sweep.rows:
        if row.r_norm < 1.0:
            ok = row.corrected_error is not None and row.corrected_error <= DUNFORD_CORRECTED_TOL
            outcome.check(f"corrected_resolvent[{row.lam:g}]", ok)
        outcome.check(
            f"refinement[{row.lam:g}]",
            row.refinement_change <= DEFAULT_QUAD_TOL and row.refinement_converges(),
        )
    # P_lambda is the exact resolvent of an anticommuting pair
    reference = dunford_residual(*anticommuting_pair(2), 10.0, config.dunford.nodes)
    outcome.data["exact_reference"] = reference.to_dict()
    outcome.check("exact_reference", reference.r_norm <= DEFAULT_QUAD_TOL)
    outcome.check(
        "spectral_angle", profile.spectral_angle <= profile.exact_angle + 2 * profile.resolution
    )
    outcome.tables["dunford"] = (
        ["lambda", "r_norm", "corrected_resolvent_error", "nodes", "refinement"],
        sweep.to_csv_rows(),
    )
    return outcome


@suite("kk-check")
def run_kk_check(S: Any, T: Any, config: ExperimentConfig) -> SuiteOutcome:
    """Form bounds, the arctan bound and the rescaling positivity procedure."""
    outcome = SuiteOutcome()
    s, t = as_array(S), as_array(T)
    kk2 = kk2_inequality(s, t)
    kk3 = kk3_bound(s, t, config.kk.mu_grid)
    bound = arctan_bound(s + t, config.kk.nodes)
    rescale = rescale_for_kappa(s, t, config.kk.kappa)
    sweep = k_mu_sweep(s, t, config.kk.mu_grid)
    outcome.data.update(
        kk2=kk2.to_dict(),
        kk3=kk3.to_dict(),
        arctan_bound=bound.to_dict(),
        rescale=rescale.to_dict(),
        k_mu=sweep.to_dict(),
    )
    outcome.check("kk2", kk2.holds())
    outcome.check("kk3", kk3.holds())
    outcome.check("arctan_bound", bound.holds)
    outcome.check("rescale", rescale.success)
    return outcome


@suite("identities")
def run_identities(S: Any, T: Any, config: ExperimentConfig) -> SuiteOutcome:
    """Exact algebraic identities, every residual against its operand scale."""
    outcome = SuiteOutcome()
    s, t = as_array(S), as_array(T)
    tol = config.run.tol
    report = ResidualReport()
    for sign in ("+", "-"):
        report.merge(resolvent_commutator_identities(s, t, 1j, sign), f"resolvent[{sign}].")
    report.merge(leibniz_residuals(s, t, anticommutator(s, t)), "")
    report.merge(sum_identity_residuals(s, t, 10j, 1j), "sum.")
    report.merge(resolvent_equation_residual(s, t, 10j, 1j).report, "sum.")
    for mu in config.kk.mu_grid:
        report.merge(k_mu_identities(s, t, mu), f"k_mu[{mu:g}].")
        report.merge(r_mu_identity(s, t, mu), f"r_mu[{mu:g}].")
    report.merge(squared_resolvent_commutators(s, t), "squared.")
    report.merge(verify_doubling_relations(s, t), "doubling.")
    for i in (1, 2, 3):
        report.merge(resolvent_lift_residuals(s, i, 1j), f"lift[{i}].")
    for i, j in INDEX_PAIRS:
        report.merge(transform_pair(s, t, i, j).report, f"transform[{i}{j}].")
    outcome.data["max_relative"] = report.max_relative
    _residual_check(outcome, "identities", report, tol)
    return outcome


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------


def instance_seed(base: int, index: int) -> int:
    return (base + index) % 2**64


def generate_instances(config: ExperimentConfig) -> List[Tuple[int, Pair]]:
    """
    Generate the seeded instance pairs of an experiment.

    Raises:
        ConfigurationException: If the generator recipe cannot be realized
    """
    instances = []
    for index in range(config.run.instances):
        seed = instance_seed(config.run.seed, index)
        try:
            pair = gen_pair(config.instance.generator_spec(seed))
        except GenerationException as e:
            raise ConfigurationException(
                "Instance recipe cannot be realized", {"seed": seed, **e.details}
            ) from e
        instances.append((seed, pair))
    return instances


def _run_item(name: str, pair: Pair, config: ExperimentConfig) -> Tuple[SuiteOutcome, float]:
    runner = get_suite(name)
    if runner is None:
        raise ConfigurationException("Unknown suite", {"suite": name})
    started = time.perf_counter()
    try:
        outcome = runner(pair[0], pair[1], config)
    except (ConfigurationException, ReportIOException):
        raise
    except WacLabException as e:
        logger.warning("suite %s failed: %s", name, e)
        outcome = SuiteOutcome(data={"error": str(e)})
        outcome.check("completed", False)
    return outcome, time.perf_counter() - started


def _versions() -> Dict[str, str]:
    from . import __version__

    return {
        "wac_lab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def run_experiment(
    config: Union[ExperimentConfig, str, Path], write: bool = True
) -> ExperimentReport:
    """
    Run every configured suite on every seeded instance.

    Suite items run on ``config.run.threads`` worker threads; results are assembled in
    configuration order, so the report does not depend on the thread count.

    Args:
        config: Configuration or path to a configuration file
        write: Write report.json and the CSV side-tables to ``config.run.out``

    Returns:
        ExperimentReport; ``passed`` is False if any check failed

    Raises:
        ConfigurationException: If the configuration is invalid
        ReportIOException: If the report cannot be written
    """
    if not isinstance(config, ExperimentConfig):
        config = load_config(config)
    started = datetime.now(timezone.utc).isoformat()
    instances = generate_instances(config)
    items = [(name, index) for name in config.run.suite for index in range(len(instances))]
    logger.info(
        "running %d suites on %d instances with %d threads",
        len(config.run.suite),
        len(instances),
        config.run.threads,
    )
    with ThreadPoolExecutor(max_workers=config.run.threads) as pool:
        futures = [
            pool.submit(_run_item, name, instances[index][1], config) for name, index in items
        ]
        results = [future.result() for future in futures]

    report = ExperimentReport(
        config=config.to_dict(), seed=config.run.seed, versions=_versions()
    )
    timings: Dict[str, List[float]] = {}
    for (name, index), (outcome, elapsed) in zip(items, results):
        seed = instances[index][0]
        suite_report = report.suites.setdefault(name, SuiteReport(name))
        suite_report.instances.append(
            {"seed": seed, "data": outcome.data, "checks": outcome.checks}
        )
        suite_report.failures.extend(f"instance {index}: {check}" for check in outcome.failures)
        for table, (columns, rows) in outcome.tables.items():
            merged = report.tables.setdefault(
                table, {"columns": ["instance", *columns], "rows": []}
            )
            merged["rows"].extend([index, *row] for row in rows)
        timings.setdefault(name, []).append(elapsed)
        logger.debug("%s on instance %d took %.3fs", name, index, elapsed)

    report.timestamp = {"started": started, "timings": timings}
    for name, suite_report in report.suites.items():
        logger.info("suite %s: %d failures", name, len(suite_report.failures))
    if write:
        write_report(config.run.out, report.to_dict())
    return report
