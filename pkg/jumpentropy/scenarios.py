"""Scenario runners behind the command line.

This module provides:

- `ScenarioResult`: Verdict, margins, records and artifacts of one run.
- `run_simulate`: Simulate an ensemble and dump it.
- `run_entropy_bound`: Compare the semigroup Φ-entropy with its bound.
- `run_decay_curve`: Compare the entropy decay under the invariant law with its envelope.
- `run_lyapunov_check`: Classify the coefficients against the drift criteria.
- `run_poisson_check`: Run the Mecke, Girsanov and Φ-entropy checks on Poisson space.
- `run_sharpness_demo`: Contrast log-integrable and log-divergent tails.
- `run`: Dispatch a configuration and write its verdict and manifest.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import typing_extensions

from jumpentropy import artifacts
from jumpentropy.common import ExplosionSuspected, NotDissipativeEnough
from jumpentropy.config import Scenario
from jumpentropy.lyapunov import (
    SharpnessMode,
    classify,
    default_grid,
    sharpness_scenario,
    tightness_check,
)
from jumpentropy.phi_entropy import check_entropy_bound, entropy_decay_curve, parse_phi
from jumpentropy.poisson_space import (
    FiniteIntensity,
    TimeTiltDensity,
    check_permutation_invariance,
    functional_corpus,
    girsanov_density_check,
    mecke_check,
    mecke_constant,
    mecke_count,
    mecke_time_fraction,
    sample_configuration,
    wu_entropy_check,
)
from jumpentropy.rng import stream
from jumpentropy.sde_engine import invariant_ensemble, simulate

if TYPE_CHECKING:
    from concurrent.futures import Executor

    from jumpentropy.config import ExperimentConfig

logger = logging.getLogger(__name__)


@dataclass
class ScenarioResult:
    r"""Outcome of a scenario.

    Attributes
    ----------
    passed : `bool`
        overall verdict
    margins : `dict`\[`str`, `float`\]
        signed margin of every assertion, negative when violated
    records : `list`\[`dict`\[`str`, `object`\]\]
        detailed records
    artifacts : `list`\[`pathlib.Path`\]
        files written so far
    failures : `list`\[`str`\]
        names of the failed assertions
    """

    passed: bool = True
    margins: dict[str, float] = field(default_factory=dict)
    records: list[dict[str, object]] = field(default_factory=list)
    artifacts: list[Path] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    def assert_that(self, name: str, *, holds: bool, margin: float) -> None:
        """Record one assertion."""
        self.margins[name] = margin
        if not holds:
            self.passed = False
            self.failures.append(name)
            logger.warning("assertion %s failed with margin %.6g", name, margin)


def run_simulate(config: ExperimentConfig, out: Path, executor: Executor | None = None) -> ScenarioResult:
    """Simulate ``simulation.n_paths`` paths and write the ensemble.

    Parameters
    ----------
    config : `ExperimentConfig`
        configuration
    out : `pathlib.Path`
        output directory
    executor : `concurrent.futures.Executor` | None, optional
        pool running path blocks

    Returns
    -------
    `ScenarioResult`
        passes unless a path left the overflow guard
    """
    result = ScenarioResult()
    sim = config.simulation
    measure = config.measure.build()
    plan = config.measure.plan(measure)
    coeffs = config.coefficients.build(measure.dim)
    x0 = sim.start(measure.dim)
    try:
        ens = simulate(
            coeffs, plan, x0, sim.T, sim.dt, sim.n_paths, config.seed, checkpoints=sim.checkpoints, executor=executor
        )
    except ExplosionSuspected as exc:
        result.records.append({"name": "simulate", "error": str(exc)})
        result.assert_that("no_explosion", holds=False, margin=-math.inf)
        return result
    result.artifacts.extend(artifacts.write_ensemble(out, ens, x0, {"measure": measure.to_dict()}))
    result.records.append({"name": "simulate", "n_paths": ens.n_paths, "dt": ens.dt, "scheme": ens.scheme})
    result.assert_that("no_explosion", holds=True, margin=0.0)
    return result


def run_entropy_bound(config: ExperimentConfig, out: Path, executor: Executor | None = None) -> ScenarioResult:
    """Simulate from ``simulation.x0`` up to T and check the entropy bound there.

    Parameters
    ----------
    config : `ExperimentConfig`
        configuration
    out : `pathlib.Path`
        output directory
    executor : `concurrent.futures.Executor` | None, optional
        pool running path blocks

    Returns
    -------
    `ScenarioResult`
        passes when the entropy is below the bound up to three standard errors
    """
    result = ScenarioResult()
    sim = config.simulation
    measure = config.measure.build()
    plan = config.measure.plan(measure)
    coeffs = config.coefficients.build(measure.dim)
    phi = config.phi.phi()
    f = config.phi.function(measure.dim)
    x0 = sim.start(measure.dim)
    ens = simulate(coeffs, plan, x0, sim.T, sim.dt, sim.n_paths, config.seed, executor=executor)
    check = check_entropy_bound(phi, f, coeffs, measure, ens, sim.T, config.phi.inner_radius)
    record = {
        "name": "entropy_bound",
        "phi": phi.name,
        "test_function": f.name,
        "x0": x0,
        "T": sim.T,
        "entropy": check.entropy.value,
        "entropy_stderr": check.entropy.stderr,
        "gamma": check.gamma.value,
        "gamma_stderr": check.gamma.stderr,
        "constant": check.constant,
        "rhs": check.rhs,
        "margin": check.margin,
        "stderr": check.stderr,
    }
    result.records.append(record)
    result.assert_that("entropy_bound", holds=check.holds(), margin=check.margin)
    result.artifacts.append(artifacts.write_json(out / "entropy_bound.json", record))
    return result


def run_decay_curve(config: ExperimentConfig, out: Path, executor: Executor | None = None) -> ScenarioResult:
    """Estimate the entropy decay curve and compare it with the exponential envelope.

    Parameters
    ----------
    config : `ExperimentConfig`
        configuration
    out : `pathlib.Path`
        output directory
    executor : `concurrent.futures.Executor` | None, optional
        pool running path blocks

    Returns
    -------
    `ScenarioResult`
        passes when every checkpoint lies below the slackened envelope
    """
    result = ScenarioResult()
    decay = config.decay
    measure = config.measure.build()
    plan = config.measure.plan(measure)
    coeffs = config.coefficients.build(measure.dim)
    f = config.phi.function(measure.dim)
    try:
        curve = entropy_decay_curve(
            config.phi.phi(),
            f,
            coeffs,
            plan,
            times=decay.times,
            n_outer=decay.n_outer,
            n_inner=decay.n_inner,
            seed=config.seed,
            burn_in=decay.burn_in,
            dt=config.simulation.dt,
            executor=executor,
        )
    except NotDissipativeEnough as exc:
        result.records.append({"name": "decay_rate", "error": str(exc)})
        result.assert_that("decay_rate", holds=False, margin=-math.inf)
        return result
    result.artifacts.append(artifacts.write_decay_curve(out / "decay_curve.csv", curve))
    for t, margin in zip(curve.times, curve.margins(decay.slack)):
        result.margins[f"t={t:.6g}"] = float(margin)
    result.records.append({
        "name": "decay_envelope",
        "rate": curve.rate,
        "initial": curve.initial.value,
        "initial_stderr": curve.initial.stderr,
        "slack": decay.slack,
    })
    holds = curve.holds(decay.slack)
    result.assert_that("decay_envelope", holds=holds, margin=float(np.min(curve.margins(decay.slack))))
    return result


def run_lyapunov_check(config: ExperimentConfig, out: Path, executor: Executor | None = None) -> ScenarioResult:
    """Classify the coefficients and optionally run a tightness simulation.

    Without ``lyapunov.expect`` the run only reports; with it, the verdict must match.

    Parameters
    ----------
    config : `ExperimentConfig`
        configuration
    out : `pathlib.Path`
        output directory
    executor : `concurrent.futures.Executor` | None, optional
        pool evaluating grid radii and path blocks

    Returns
    -------
    `ScenarioResult`
        classification records
    """
    result = ScenarioResult()
    lyap = config.lyapunov
    measure = config.measure.build()
    coeffs = config.coefficients.build(measure.dim)
    grid = default_grid(lyap.grid_points, lyap.r_max)
    report = classify(
        coeffs, measure, lyap.weight(), lyap.eps, grid, lyap.theta, seed=config.seed, executor=executor
    )
    record: dict[str, object] = {"name": "classify", **report.to_dict()}
    result.artifacts.append(artifacts.write_json(out / "analysis.json", report.to_dict()))
    result.artifacts.append(artifacts.write_bracket_profile(out / "bracket.csv", report))
    result.records.append(record)
    margin = -report.limsup.value
    if lyap.expect is not None:
        expected = lyap.expect == "pass"
        result.assert_that("verdict", holds=report.passed == expected, margin=margin if expected else -margin)
    else:
        result.margins["verdict"] = margin
    if lyap.tightness_steps > 0:
        tight = tightness_check(
            coeffs,
            config.measure.plan(measure),
            n_steps=lyap.tightness_steps,
            dt=config.simulation.dt,
            n_paths=lyap.tightness_paths,
            seed=config.seed,
            executor=executor,
        )
        result.records.append({"name": "tightness", **tight.to_dict()})
        if lyap.expect is not None:
            result.assert_that("tightness", holds=tight.tight == (lyap.expect == "pass"), margin=0.0)
    return result


def run_poisson_check(config: ExperimentConfig, out: Path, executor: Executor | None = None) -> ScenarioResult:  # noqa: ARG001
    """Run the Poisson-space suite on the jumps above ``poisson.delta`` of the configured measure.

    Parameters
    ----------
    config : `ExperimentConfig`
        configuration
    out : `pathlib.Path`
        output directory
    executor : `concurrent.futures.Executor` | None, optional
        unused; the suite is vectorised

    Returns
    -------
    `ScenarioResult`
        Mecke, Girsanov, permutation and Φ-entropy records
    """
    result = ScenarioResult()
    pc = config.poisson
    measure = config.measure.build()
    intensity = FiniteIntensity.from_levy_tail(measure, pc.delta, pc.window)
    corpus = functional_corpus()
    selected = {name: corpus[name] for name in pc.functionals}

    mecke = {"constant": mecke_constant(), "time_fraction": mecke_time_fraction(), "count": mecke_count()}
    for name, func in mecke.items():
        check = mecke_check(func, intensity, pc.n_samples, config.seed, n_points=pc.n_points)
        result.records.append({
            "name": f"mecke/{name}",
            "lhs": check.lhs.value,
            "rhs": check.rhs.value,
            "difference": check.difference,
            "stderr": check.stderr,
        })
        result.assert_that(f"mecke/{name}", holds=check.holds(), margin=-abs(check.difference))

    density = TimeTiltDensity(intensity, pc.tilt) if intensity.total_mass > 0 else None
    config_rng = stream(config.seed, 2)
    for fname, functional in selected.items():
        girsanov = girsanov_density_check(density, functional, intensity, pc.n_samples, config.seed)
        result.records.append({
            "name": f"girsanov/{fname}",
            "reweighted": girsanov.reweighted.value,
            "nonempty": girsanov.nonempty.value,
            "direct": girsanov.direct.value,
            "empty_mass": girsanov.empty_mass,
            "relative_error": girsanov.relative_error,
            "stderr": girsanov.stderr,
        })
        result.assert_that(f"girsanov/{fname}", holds=girsanov.holds(), margin=-abs(girsanov.relative_error))
        invariant = check_permutation_invariance(functional, sample_configuration(intensity, config_rng), config_rng)
        result.assert_that(f"permutation/{fname}", holds=invariant, margin=0.0 if invariant else -math.inf)

    for fname, functional in selected.items():
        for phi_name in pc.phis:
            phi = parse_phi(phi_name)
            if phi.requires_positive and functional.lower <= 0:
                logger.info("skipping %s with %s: functional is not positive", phi.name, fname)
                continue
            wu = wu_entropy_check(
                phi, functional, intensity, pc.n_samples, config.seed, n_points=pc.n_points, density=density
            )
            record: dict[str, object] = {"name": f"entropy/{fname}/{phi.name}", **wu.to_dict()}
            result.records.append(record)
            result.assert_that(f"entropy/{fname}/{phi.name}", holds=wu.holds(), margin=wu.margin)

    result.artifacts.append(artifacts.write_json(out / "poisson_records.json", result.records))
    return result


def run_sharpness_demo(config: ExperimentConfig, out: Path, executor: Executor | None = None) -> ScenarioResult:
    """Run the Ornstein-Uhlenbeck model under both tail families.

    The log-integrable family must reach a stationary law. The log-divergent family is
    only recorded: the radius quantiles along the run are written as CSV.

    Parameters
    ----------
    config : `ExperimentConfig`
        configuration
    out : `pathlib.Path`
        output directory
    executor : `concurrent.futures.Executor` | None, optional
        pool running path blocks

    Returns
    -------
    `ScenarioResult`
        stationarity assertion of the log-integrable family
    """
    result = ScenarioResult()
    sharp = config.sharpness
    for mode in sharp.mode_list():
        scenario = sharpness_scenario(mode, alpha=config.measure.alpha, dim=config.measure.dim)
        label = mode.name.lower()
        if mode == SharpnessMode.LOG_FINITE:
            inv = invariant_ensemble(
                scenario.coeffs,
                scenario.plan,
                sharp.burn_in,
                sharp.n_samples,
                config.seed,
                dt=config.simulation.dt,
                executor=executor,
            )
            diag = inv.diagnostic
            result.records.append({
                "name": label,
                **scenario.to_dict(),
                "ks_statistic": diag.ks_statistic,
                "p_value": diag.p_value,
                "growth_ratio": diag.growth_ratio,
                "stationary": diag.stationary,
            })
            result.assert_that(label, holds=diag.stationary, margin=diag.p_value)
        elif mode == SharpnessMode.LOG_INFINITE:
            horizon = 2.0 * sharp.burn_in
            times = np.linspace(horizon / sharp.n_checkpoints, horizon, sharp.n_checkpoints)
            try:
                ens = simulate(
                    scenario.coeffs,
                    scenario.plan,
                    np.zeros(scenario.coeffs.dim),
                    horizon,
                    config.simulation.dt,
                    sharp.n_samples,
                    config.seed,
                    checkpoints=times,
                    executor=executor,
                )
            except ExplosionSuspected as exc:
                result.records.append({"name": label, **scenario.to_dict(), "error": str(exc)})
                continue
            radii = np.linalg.norm(ens.checkpoint_states, axis=2)
            rows = np.column_stack([
                ens.checkpoint_times,
                np.quantile(radii, 0.5, axis=1),
                np.quantile(radii, 0.9, axis=1),
                radii.max(axis=1),
            ])
            result.artifacts.append(artifacts.write_table(out / f"{label}.csv", ["t", "q50", "q90", "max"], rows))
            result.records.append({"name": label, **scenario.to_dict(), "final_q90": float(rows[-1, 2])})
        else:
            typing_extensions.assert_never(mode)
    return result


def run(config: ExperimentConfig, out: Path | None = None, executor: Executor | None = None) -> ScenarioResult:
    """Run the configured scenario and write ``verdict.json`` and ``manifest.json``.

    Parameters
    ----------
    config : `ExperimentConfig`
        configuration
    out : `pathlib.Path` | None, optional
        output directory, by default ``config.out``
    executor : `concurrent.futures.Executor` | None, optional
        worker pool

    Returns
    -------
    `ScenarioResult`
        outcome with every written artifact
    """
    directory = Path(config.out) if out is None else out
    directory.mkdir(parents=True, exist_ok=True)
    scenario = config.scenario
    logger.info("running %s with seed %d into %s", scenario.value, config.seed, directory)
    if scenario == Scenario.SIMULATE:
        result = run_simulate(config, directory, executor)
    elif scenario == Scenario.ENTROPY_BOUND:
        result = run_entropy_bound(config, directory, executor)
    elif scenario == Scenario.DECAY_CURVE:
        result = run_decay_curve(config, directory, executor)
    elif scenario == Scenario.LYAPUNOV_CHECK:
        result = run_lyapunov_check(config, directory, executor)
    elif scenario == Scenario.POISSON_CHECK:
        result = run_poisson_check(config, directory, executor)
    elif scenario == Scenario.SHARPNESS_DEMO:
        result = run_sharpness_demo(config, directory, executor)
    else:
        typing_extensions.assert_never(scenario)
    result.artifacts.append(
        artifacts.write_verdict(
            directory, scenario.value, passed=result.passed, margins=result.margins, records=result.records
        )
    )
    result.artifacts.append(artifacts.write_manifest(directory, config.to_dict(), result.artifacts))
    logger.info("%s: %s", scenario.value, "PASS" if result.passed else "FAIL")
    return result
