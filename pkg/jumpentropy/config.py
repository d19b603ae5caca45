"""Experiment configuration.

This module provides:

- `Scenario`: Scenario kinds run by the command line.
- `MeasureConfig`, `CoefficientConfig`, `PhiConfig`, `SimulationConfig`, `DecayConfig`,
  `LyapunovConfig`, `PoissonConfig`, `SharpnessConfig`: Configuration sections.
- `ExperimentConfig`: Validated configuration tree of one run.
- `load_config`: Read a configuration (or a run manifest) from a YAML or JSON file.

Every section rejects unknown keys and validates its values on construction, raising
`jumpentropy.common.ConfigError`.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any, TypeVar

import numpy as np
import yaml

from jumpentropy.common import ConfigError, Monotonicity
from jumpentropy.levy_measure import (
    RadialLevyMeasure,
    TabulatedProfile,
    constant_profile,
    large_jump_profile,
    small_jump_profile,
)
from jumpentropy.lyapunov import BSpec, PowerB, SharpnessMode, log_divergent_profile
from jumpentropy.phi_entropy import (
    constant_function,
    cosine_bump,
    inverse_quadratic,
    parse_phi,
    shifted_tanh,
)
from jumpentropy.sde_engine import (
    expanding_field,
    linear_field,
    ou_field,
    power_drift_field,
    radial_drift_field,
)
from jumpentropy.stochastic_kernels import NoiseIncrementPlan, SmallJumpMode

if TYPE_CHECKING:
    from collections.abc import Mapping

    from jumpentropy.levy_measure import RadialProfile
    from jumpentropy.phi_entropy import PhiSpec, TestFunction
    from jumpentropy.sde_engine import CoefficientField

# key of the run metadata inside a manifest
MANIFEST_KEY = "manifest"
MAX_SEED = 2**64


class Scenario(str, Enum):
    """Scenario kinds; the value is the subcommand name."""

    SIMULATE = "simulate"
    ENTROPY_BOUND = "entropy-bound"
    DECAY_CURVE = "decay-curve"
    LYAPUNOV_CHECK = "lyapunov-check"
    POISSON_CHECK = "poisson-check"
    SHARPNESS_DEMO = "sharpness-demo"


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


@dataclass(frozen=True)
class MeasureConfig:
    """Lévy measure and noise plan.

    ``profile`` is one of ``constant``, ``small``, ``large``, ``log_divergent`` or
    ``table``; the table is a two-column text file given by ``table``.
    """

    dim: int = 1
    alpha: float = 1.5
    kappa1: float = 1.0
    kappa2: float = 1.0
    profile: str = "constant"
    table: str | None = None
    monotonicity: str = "none"
    cutoff: float = 1e-3
    small_jump_mode: str = "gaussian_surrogate"

    def __post_init__(self) -> None:
        _require(self.dim >= 1, f"measure.dim must be positive, got {self.dim}.")
        _require(0 < self.alpha < 2, f"measure.alpha must lie in (0, 2), got {self.alpha}.")  # noqa: PLR2004
        _require(0 < self.kappa1 <= self.kappa2, f"measure needs 0 < kappa1 <= kappa2, got {self.kappa1}, {self.kappa2}.")
        _require(
            self.profile in {"constant", "small", "large", "log_divergent", "table"},
            f"Unknown measure.profile {self.profile!r}.",
        )
        _require(self.profile != "table" or self.table is not None, "measure.profile 'table' needs measure.table.")
        _require(self.monotonicity.upper() in Monotonicity.__members__, f"Unknown monotonicity {self.monotonicity!r}.")
        _require(self.cutoff > 0, f"measure.cutoff must be positive, got {self.cutoff}.")
        _require(
            self.small_jump_mode.upper() in SmallJumpMode.__members__,
            f"Unknown measure.small_jump_mode {self.small_jump_mode!r}.",
        )

    def rho(self) -> RadialProfile:
        """Return the radial profile."""
        if self.profile == "constant":
            return constant_profile()
        if self.profile == "small":
            return small_jump_profile()
        if self.profile == "large":
            return large_jump_profile()
        if self.profile == "log_divergent":
            return log_divergent_profile(self.alpha)
        return TabulatedProfile.from_file(str(self.table), monotonicity=Monotonicity[self.monotonicity.upper()])

    def build(self) -> RadialLevyMeasure:
        """Return the Lévy measure."""
        try:
            return RadialLevyMeasure(self.dim, self.alpha, self.kappa1, self.kappa2, self.rho())
        except (ValueError, OSError) as exc:
            msg = f"Invalid measure: {exc}"
            raise ConfigError(msg) from exc

    def plan(self, measure: RadialLevyMeasure | None = None) -> NoiseIncrementPlan:
        """Return the noise plan of the measure."""
        try:
            return NoiseIncrementPlan(
                self.build() if measure is None else measure,
                cutoff=self.cutoff,
                small_jump_mode=SmallJumpMode[self.small_jump_mode.upper()],
            )
        except ValueError as exc:
            msg = f"Invalid noise plan: {exc}"
            raise ConfigError(msg) from exc


@dataclass(frozen=True)
class CoefficientConfig:
    """Coefficient preset: ``ou``, ``linear``, ``expanding``, ``power-drift`` or ``radial-drift``."""

    preset: str = "ou"
    theta: float = 1.0
    matrix: tuple[tuple[float, ...], ...] | None = None
    sigma: float | None = None
    radii: tuple[float, ...] | None = None
    speeds: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        _require(
            self.preset in {"ou", "linear", "expanding", "power-drift", "radial-drift"},
            f"Unknown coefficients.preset {self.preset!r}.",
        )
        _require(self.preset != "power-drift" or self.theta > 0, f"power-drift needs theta > 0, got {self.theta}.")
        _require(self.preset != "linear" or self.matrix is not None, "linear preset needs coefficients.matrix.")
        _require(
            self.preset != "radial-drift" or (self.radii is not None and self.speeds is not None),
            "radial-drift preset needs coefficients.radii and coefficients.speeds.",
        )
        _require(self.sigma is None or self.sigma > 0, f"coefficients.sigma must be positive, got {self.sigma}.")

    def build(self, dim: int) -> CoefficientField:
        """Return the coefficient field in dimension ``dim``."""
        sigma = None if self.sigma is None else self.sigma * np.eye(dim)
        try:
            if self.preset == "ou":
                return ou_field(dim, sigma=sigma)
            if self.preset == "linear":
                return linear_field(np.asarray(self.matrix, dtype=np.float64), sigma=sigma)
            if self.preset == "expanding":
                return expanding_field(dim)
            if self.preset == "power-drift":
                return power_drift_field(self.theta, dim, sigma2=sigma)
            return radial_drift_field(np.asarray(self.radii), np.asarray(self.speeds), dim)
        except ValueError as exc:
            msg = f"Invalid coefficients: {exc}"
            raise ConfigError(msg) from exc


@dataclass(frozen=True)
class PhiConfig:
    """Convex function and test function.

    ``test_function`` is one of ``shifted_tanh``, ``inverse_quadratic``, ``cosine_bump``
    or ``constant``; ``shift`` is its additive constant.
    """

    name: str = "xlogx"
    test_function: str = "shifted_tanh"
    shift: float = 1.5
    inner_radius: float = 1e-3

    def __post_init__(self) -> None:
        try:
            parse_phi(self.name)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        _require(
            self.test_function in {"shifted_tanh", "inverse_quadratic", "cosine_bump", "constant"},
            f"Unknown phi.test_function {self.test_function!r}.",
        )
        _require(self.inner_radius > 0, f"phi.inner_radius must be positive, got {self.inner_radius}.")

    def phi(self) -> PhiSpec:
        """Return the convex function."""
        return parse_phi(self.name)

    def function(self, dim: int) -> TestFunction:
        """Return the test function in dimension ``dim``."""
        if self.test_function == "shifted_tanh":
            return shifted_tanh(dim, self.shift)
        if self.test_function == "inverse_quadratic":
            return inverse_quadratic(dim)
        if self.test_function == "cosine_bump":
            return cosine_bump(dim, self.shift)
        return constant_function(self.shift, dim)


@dataclass(frozen=True)
class SimulationConfig:
    """Horizon, step, paths and starting point."""

    T: float = 1.0  # noqa: N815
    dt: float | None = None
    n_paths: int = 10_000
    x0: tuple[float, ...] = (0.0,)
    checkpoints: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        _require(self.T > 0 and math.isfinite(self.T), f"simulation.T must be positive, got {self.T}.")
        _require(self.dt is None or self.dt > 0, f"simulation.dt must be positive, got {self.dt}.")
        _require(self.n_paths >= 0, f"simulation.n_paths must be non-negative, got {self.n_paths}.")
        if self.checkpoints is not None:
            _require(
                all(0 <= t <= self.T for t in self.checkpoints), "simulation.checkpoints must lie in [0, T]."
            )

    def start(self, dim: int) -> np.ndarray[Any, np.dtype[np.float64]]:
        """Return the starting point in dimension ``dim``; a single value is broadcast."""
        x0 = np.asarray(self.x0, dtype=np.float64)
        if x0.size == 1:
            return np.full(dim, float(x0[0]))
        if x0.size != dim:
            msg = f"simulation.x0 has {x0.size} entries, expected {dim}."
            raise ConfigError(msg)
        return x0


@dataclass(frozen=True)
class DecayConfig:
    """Nested simulation sizes of the decay curve."""

    times: tuple[float, ...] | None = None
    n_outer: int = 512
    n_inner: int = 256
    burn_in: float | None = None
    slack: float = 0.15

    def __post_init__(self) -> None:
        _require(self.n_outer >= 2 and self.n_inner >= 2, "decay sample sizes must be at least 2.")  # noqa: PLR2004
        _require(self.times is None or all(t > 0 for t in self.times), "decay.times must be positive.")
        _require(self.burn_in is None or self.burn_in > 0, "decay.burn_in must be positive.")
        _require(self.slack >= 0, "decay.slack must be non-negative.")


@dataclass(frozen=True)
class LyapunovConfig:
    """Weight, grid and explicit-case exponent of the Lyapunov check.

    ``b_theta`` selects :math:`B(r) = (1+r)^{b\\_theta}`; ``expect`` (``pass`` or
    ``reject``) turns the verdict into an assertion; ``tightness_steps > 0`` adds a
    follow-up simulation from the origin.
    """

    b_theta: float = 1.0
    eps: float = 1.0
    theta: float | None = None
    grid_points: int = 81
    r_max: float = 1e4
    expect: str | None = None
    tightness_steps: int = 0
    tightness_paths: int = 64

    def __post_init__(self) -> None:
        _require(0 < self.eps <= 1, f"lyapunov.eps must lie in (0, 1], got {self.eps}.")
        _require(self.grid_points >= 10, "lyapunov.grid_points must be at least 10.")  # noqa: PLR2004
        _require(self.r_max >= 1e4, f"lyapunov.r_max must be at least 1e4, got {self.r_max}.")  # noqa: PLR2004
        _require(self.expect in {None, "pass", "reject"}, f"Unknown lyapunov.expect {self.expect!r}.")
        _require(self.tightness_steps >= 0 and self.tightness_paths >= 1, "Invalid tightness settings.")

    def weight(self) -> BSpec:
        """Return the weight B."""
        return PowerB(self.b_theta)


@dataclass(frozen=True)
class PoissonConfig:
    """Settings of the Poisson-space suite."""

    delta: float = 1.0
    window: float = 1.0
    n_samples: int = 100_000
    n_points: int = 4
    functionals: tuple[str, ...] = ("count", "linear", "laplace", "shifted_laplace", "max_mark")
    phis: tuple[str, ...] = ("power:2", "xlogx")
    tilt: float = 0.0

    def __post_init__(self) -> None:
        _require(self.delta > 0 and self.window > 0, "poisson.delta and poisson.window must be positive.")
        _require(self.n_samples >= 2 and self.n_points >= 1, "poisson sample sizes are too small.")  # noqa: PLR2004
        _require(self.tilt > -1, f"poisson.tilt must exceed -1, got {self.tilt}.")
        known = {"count", "linear", "laplace", "shifted_laplace", "max_mark"}
        unknown = sorted(set(self.functionals) - known)
        _require(not unknown, f"Unknown poisson.functionals {unknown}.")
        for name in self.phis:
            try:
                parse_phi(name)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class SharpnessConfig:
    """Settings of the sharpness demonstration."""

    modes: tuple[str, ...] = ("log_finite", "log_infinite")
    n_samples: int = 2000
    burn_in: float = 10.0
    n_checkpoints: int = 10

    def __post_init__(self) -> None:
        unknown = sorted({m.upper() for m in self.modes} - set(SharpnessMode.__members__))
        _require(not unknown, f"Unknown sharpness.modes {unknown}.")
        _require(self.n_samples >= 2 and self.burn_in > 0, "Invalid sharpness settings.")  # noqa: PLR2004
        _require(self.n_checkpoints >= 2, "sharpness.n_checkpoints must be at least 2.")  # noqa: PLR2004

    def mode_list(self) -> list[SharpnessMode]:
        """Return the modes as enum members."""
        return [SharpnessMode[m.upper()] for m in self.modes]


_SECTIONS: dict[str, type[Any]] = {
    "measure": MeasureConfig,
    "coefficients": CoefficientConfig,
    "phi": PhiConfig,
    "simulation": SimulationConfig,
    "decay": DecayConfig,
    "lyapunov": LyapunovConfig,
    "poisson": PoissonConfig,
    "sharpness": SharpnessConfig,
}

_T = TypeVar("_T")


def _freeze(value: object) -> object:
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


def _section(cls: type[_T], data: object, label: str) -> _T:
    if data is None:
        return cls()
    if not isinstance(data, dict):
        msg = f"Section {label!r} must be a mapping."
        raise ConfigError(msg)
    names = {f.name for f in dataclasses.fields(cls)}  # type: ignore[arg-type]
    unknown = sorted(set(data) - names)
    if unknown:
        msg = f"Unknown keys in {label!r}: {unknown}."
        raise ConfigError(msg)
    try:
        return cls(**{k: _freeze(v) for k, v in data.items()})
    except TypeError as exc:
        msg = f"Invalid section {label!r}: {exc}"
        raise ConfigError(msg) from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration tree of one run."""

    scenario: Scenario = Scenario.SIMULATE
    seed: int = 0
    out: str = "runs"
    measure: MeasureConfig = field(default_factory=MeasureConfig)
    coefficients: CoefficientConfig = field(default_factory=CoefficientConfig)
    phi: PhiConfig = field(default_factory=PhiConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    decay: DecayConfig = field(default_factory=DecayConfig)
    lyapunov: LyapunovConfig = field(default_factory=LyapunovConfig)
    poisson: PoissonConfig = field(default_factory=PoissonConfig)
    sharpness: SharpnessConfig = field(default_factory=SharpnessConfig)

    def __post_init__(self) -> None:
        _require(0 <= self.seed < MAX_SEED, f"seed must lie in [0, 2^64), got {self.seed}.")

    @classmethod
    def from_mapping(cls, data: Mapping[str, object] | None) -> ExperimentConfig:
        """Build a configuration from a parsed document.

        A ``manifest`` entry written by a previous run is ignored, so manifests load as
        configurations.

        Parameters
        ----------
        data : `collections.abc.Mapping` | None
            parsed document, `None` for all defaults

        Returns
        -------
        `ExperimentConfig`
            validated configuration

        Raises
        ------
        ConfigError
            on unknown keys or invalid values
        """
        raw = dict(data or {})
        raw.pop(MANIFEST_KEY, None)
        top = {"scenario", "seed", "out", *_SECTIONS}
        unknown = sorted(set(raw) - top)
        if unknown:
            msg = f"Unknown configuration keys: {unknown}."
            raise ConfigError(msg)
        try:
            scenario = Scenario(raw.get("scenario", Scenario.SIMULATE.value))
        except ValueError as exc:
            msg = f"Unknown scenario {raw.get('scenario')!r}."
            raise ConfigError(msg) from exc
        seed = raw.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            msg = f"seed must be an integer, got {seed!r}."
            raise ConfigError(msg)
        sections = {name: _section(kind, raw.get(name), name) for name, kind in _SECTIONS.items()}
        return cls(scenario=scenario, seed=seed, out=str(raw.get("out", "runs")), **sections)

    def with_overrides(
        self, *, scenario: Scenario | None = None, seed: int | None = None, out: str | None = None
    ) -> ExperimentConfig:
        """Return a copy with the command-line overrides applied."""
        changes: dict[str, object] = {}
        if scenario is not None:
            changes["scenario"] = scenario
        if seed is not None:
            changes["seed"] = seed
        if out is not None:
            changes["out"] = out
        return dataclasses.replace(self, **changes)  # type: ignore[arg-type]

    def to_dict(self) -> dict[str, object]:
        r"""Return the configuration as plain data.

        Returns
        -------
        `dict`\[`str`, `object`\]
            nested mapping accepted by `from_mapping`
        """
        data = dataclasses.asdict(self)
        data["scenario"] = self.scenario.value
        return data


def load_config(path: str | Path, scenario: Scenario | None = None) -> ExperimentConfig:
    """Read a configuration from a YAML (or JSON) file.

    Parameters
    ----------
    path : `str` | `pathlib.Path`
        file path
    scenario : `Scenario` | None, optional
        scenario requested by the caller; fills a missing ``scenario`` entry and must
        match a present one

    Returns
    -------
    `ExperimentConfig`
        validated configuration

    Raises
    ------
    ConfigError
        if the file cannot be read or parsed, or the content is invalid
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
        data = yaml.safe_load(text)
    except (OSError, yaml.YAMLError) as exc:
        msg = f"Cannot read configuration {path}: {exc}"
        raise ConfigError(msg) from exc
    if data is not None and not isinstance(data, dict):
        msg = f"Configuration {path} must be a mapping at the top level."
        raise ConfigError(msg)
    data = dict(data or {})
    if scenario is not None:
        declared = data.setdefault("scenario", scenario.value)
        if declared != scenario.value:
            msg = f"Configuration {path} is for {declared!r}, not {scenario.value!r}."
            raise ConfigError(msg)
    return ExperimentConfig.from_mapping(data)


def scenario_from_name(name: str) -> Scenario:
    """Return the scenario of a subcommand name.

    Raises
    ------
    ConfigError
        if the name is unknown
    """
    try:
        return Scenario(name)
    except ValueError as exc:
        msg = f"Unknown scenario {name!r}."
        raise ConfigError(msg) from exc
