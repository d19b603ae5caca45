r"""Driving-noise increments.

This module provides:

- `SmallJumpMode`: Treatment of jumps below the cutoff.
- `NoiseIncrementPlan`: Noise description used by the SDE engine.
- `JumpStream`: Marked Poisson arrivals of the jumps above the cutoff.
- `stable_constant`: Constant :math:`c_{d,\alpha}` linking the stable scale to :math:`\kappa`.
- `stable_kappa`, `stable_scale`: Conversion between scale and Lévy density constant.
- `stable_tail_constant`: Limit of :math:`x^\alpha P(|L_1|>x)`.
- `positive_stable`: Totally skewed positive stable variates.
- `stable_increment`: Exact isotropic stable increments.
- `brownian_increment`: Brownian increments.
- `small_jump_increment`: Increment of the jumps below the cutoff.
- `jump_counts`: Poisson arrival counts above the cutoff per path.
- `levy_increment`: Full additive Lévy increment per path.
- `compensation_drift`: Drift compensating the jumps with cutoff < |z| <= 1.
- `jump_stream`: Jump arrivals on a time window.

The stable scale convention is fixed once: a scale :math:`\gamma` means
:math:`E e^{i\langle\xi, L_t\rangle} = \exp(-t\gamma^\alpha|\xi|^\alpha)`, whose Lévy measure
is :math:`\kappa|z|^{-d-\alpha}dz` with :math:`\kappa = \gamma^\alpha c_{d,\alpha}` and
:math:`c_{d,\alpha} = \alpha 2^{\alpha-1}\Gamma((d+\alpha)/2)/(\pi^{d/2}\Gamma(1-\alpha/2))`.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np
import typing_extensions
from scipy import special

from jumpentropy.common import uniform_directions, unit_sphere_area
from jumpentropy.levy_measure import RadialLevyMeasure, sample_jump_above, small_sq, tail_mass
from jumpentropy.rng import ensure_rng, stream

if TYPE_CHECKING:
    from numpy.random import Generator
    from numpy.typing import NDArray

logger = logging.getLogger(__name__)

DEFAULT_CUTOFF = 1e-3


class SmallJumpMode(Enum):
    """Treatment of jumps below the cutoff."""

    GAUSSIAN_SURROGATE = enum.auto()
    DROP_WITH_COMPENSATION = enum.auto()
    EXACT_STABLE = enum.auto()


def stable_constant(alpha: float, dim: int) -> float:
    r"""Return :math:`c_{d,\alpha}`.

    Parameters
    ----------
    alpha : `float`
        stability index
    dim : `int`
        dimension

    Returns
    -------
    `float`
        constant such that :math:`\kappa = \gamma^\alpha c_{d,\alpha}`
    """
    return float(
        alpha
        * 2 ** (alpha - 1)
        * special.gamma((dim + alpha) / 2)
        / (math.pi ** (dim / 2) * special.gamma(1 - alpha / 2))
    )


def stable_kappa(scale: float, alpha: float, dim: int) -> float:
    r"""Return the Lévy density constant :math:`\kappa` of the stable law with scale :math:`\gamma`.

    Parameters
    ----------
    scale : `float`
        scale :math:`\gamma`
    alpha : `float`
        stability index
    dim : `int`
        dimension

    Returns
    -------
    `float`
        :math:`\gamma^\alpha c_{d,\alpha}`
    """
    return scale**alpha * stable_constant(alpha, dim)


def stable_scale(kappa: float, alpha: float, dim: int) -> float:
    r"""Return the scale :math:`\gamma` of the stable law with Lévy density :math:`\kappa|z|^{-d-\alpha}`.

    Parameters
    ----------
    kappa : `float`
        Lévy density constant
    alpha : `float`
        stability index
    dim : `int`
        dimension

    Returns
    -------
    `float`
        :math:`(\kappa/c_{d,\alpha})^{1/\alpha}`
    """
    return float((kappa / stable_constant(alpha, dim)) ** (1 / alpha))


def stable_tail_constant(alpha: float, dim: int, scale: float) -> float:
    r"""Return :math:`\lim_{x\to\infty} x^\alpha P(|L_1| > x)`.

    The limit equals :math:`\nu(|z|>1) = |S^{d-1}|\kappa/\alpha`.

    Parameters
    ----------
    alpha : `float`
        stability index
    dim : `int`
        dimension
    scale : `float`
        scale :math:`\gamma`

    Returns
    -------
    `float`
        tail constant
    """
    return unit_sphere_area(dim) * stable_kappa(scale, alpha, dim) / alpha


def positive_stable(beta: float, rng: Generator, size: int) -> NDArray[np.float64]:
    r"""Sample positive :math:`\beta`-stable variables with :math:`E e^{-\lambda A} = e^{-\lambda^\beta}`.

    Uses Kanter's representation
    :math:`A = \sin(\beta\pi U)\sin(\pi U)^{-1/\beta}(\sin((1-\beta)\pi U)/E)^{(1-\beta)/\beta}`.

    Parameters
    ----------
    beta : `float`
        index in (0, 1)
    rng : `numpy.random.Generator`
        random-number generator
    size : `int`
        number of samples

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.float64`\]
        positive samples

    Raises
    ------
    ValueError
        if beta is outside (0, 1)
    """
    if not 0 < beta < 1:
        msg = f"Positive stable index must lie in (0, 1), got {beta}."
        raise ValueError(msg)
    u = np.pi * (1.0 - rng.random(size))
    e = rng.exponential(1.0, size)
    return np.asarray(
        np.sin(beta * u) / np.sin(u) ** (1 / beta) * (np.sin((1 - beta) * u) / e) ** ((1 - beta) / beta),
        dtype=np.float64,
    )


def stable_increment(
    alpha: float,
    dt: float,
    dim: int,
    scale: float,
    rng: Generator | None = None,
    size: int | None = None,
) -> NDArray[np.float64]:
    r"""Sample increments of the isotropic stable process over a time step.

    d=1 uses the Chambers-Mallows-Stuck construction; d>=2 uses
    :math:`\sqrt{A}\,N(0, 2I)` with A positive :math:`(\alpha/2)`-stable.

    Parameters
    ----------
    alpha : `float`
        stability index in (0, 2)
    dt : `float`
        time step, non-negative
    dim : `int`
        dimension
    scale : `float`
        scale :math:`\gamma`, see the module docstring
    rng : `numpy.random.Generator` | None, optional
        random-number generator, by default None
    size : `int` | None, optional
        number of increments, by default a single one

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.float64`\]
        one increment of shape (d,) or an array of shape (size, d)

    Raises
    ------
    ValueError
        if alpha or dt is out of range
    """
    if not 0 < alpha < 2:  # noqa: PLR2004
        msg = f"Stability index must lie in (0, 2), got {alpha}."
        raise ValueError(msg)
    if dt < 0:
        msg = f"Time step must be non-negative, got {dt}."
        raise ValueError(msg)
    n = 1 if size is None else int(size)
    if dt == 0:
        out = np.zeros((n, dim), dtype=np.float64)
        return out[0] if size is None else out
    rng = ensure_rng(rng)
    factor = scale * dt ** (1 / alpha)
    if dim == 1:
        v = rng.uniform(-np.pi / 2, np.pi / 2, n)
        w = rng.exponential(1.0, n)
        x = np.sin(alpha * v) / np.cos(v) ** (1 / alpha) * (np.cos((1 - alpha) * v) / w) ** ((1 - alpha) / alpha)
        out = factor * x[:, None]
    else:
        a = positive_stable(alpha / 2, rng, n)
        out = factor * np.sqrt(a)[:, None] * rng.normal(0.0, math.sqrt(2.0), (n, dim))
    return out[0] if size is None else out


def brownian_increment(dt: float, dim: int, rng: Generator, size: int) -> NDArray[np.float64]:
    r"""Sample Brownian increments.

    Parameters
    ----------
    dt : `float`
        time step
    dim : `int`
        dimension
    rng : `numpy.random.Generator`
        random-number generator
    size : `int`
        number of increments

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.float64`\]
        array of shape (size, d)
    """
    return rng.normal(0.0, math.sqrt(dt), (size, dim))


@dataclass(frozen=True)
class JumpStream:
    r"""Jump arrivals above the cutoff on a time window.

    Attributes
    ----------
    times : `numpy.typing.NDArray`\[`numpy.float64`\]
        sorted arrival times
    jumps : `numpy.typing.NDArray`\[`numpy.float64`\]
        jump vectors of shape (n, d)
    compensation_drift : `numpy.typing.NDArray`\[`numpy.float64`\]
        :math:`-(t_1-t_0)\int_{\delta<|z|\le 1} z\,\nu(dz)`, zero for isotropic measures
    """

    times: NDArray[np.float64]
    jumps: NDArray[np.float64]
    compensation_drift: NDArray[np.float64]

    def __len__(self) -> int:
        return int(self.times.size)


@dataclass(frozen=True)
class NoiseIncrementPlan:
    r"""Noise description used by the SDE engine.

    Jumps above ``cutoff`` arrive as a compound Poisson stream with rate
    :math:`\nu(|z|>\delta)`; jumps below are replaced by a centred Gaussian with
    per-coordinate variance :math:`\int_{|z|\le\delta}|z|^2\nu(dz)/d` per unit time,
    dropped, or (for a genuine stable measure) the whole increment is sampled exactly.
    Only jumps with :math:`|z|\le 1` are compensated, and the compensation vanishes by isotropy.

    Attributes
    ----------
    measure : `RadialLevyMeasure`
        Lévy measure of the driving process
    cutoff : `float`
        cutoff :math:`\delta > 0`, by default 1e-3
    small_jump_mode : `SmallJumpMode`
        treatment of small jumps, by default `SmallJumpMode.GAUSSIAN_SURROGATE`
    brownian : `bool`
        whether an independent Brownian motion drives the :math:`\sigma_1` term
    jumps : `bool`
        whether the Lévy noise is active, by default True
    """

    measure: RadialLevyMeasure
    cutoff: float = DEFAULT_CUTOFF
    small_jump_mode: SmallJumpMode = SmallJumpMode.GAUSSIAN_SURROGATE
    brownian: bool = False
    jumps: bool = True
    jump_rate: float = field(init=False)
    surrogate_variance: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.cutoff > 0:
            msg = f"Cutoff must be positive, got {self.cutoff}."
            raise ValueError(msg)
        if self.small_jump_mode == SmallJumpMode.EXACT_STABLE and not self.measure.is_stable:
            msg = "Exact stable increments need rho = 1, kappa1 = kappa2 and no modulation."
            raise ValueError(msg)
        if self.small_jump_mode == SmallJumpMode.EXACT_STABLE or not self.jumps:
            rate, variance = 0.0, 0.0
        else:
            rate = tail_mass(self.measure, self.cutoff)
            variance = small_sq(self.measure, self.cutoff) / self.measure.dim
            if self.small_jump_mode == SmallJumpMode.GAUSSIAN_SURROGATE and variance == 0:
                logger.info("Profile vanishes below cutoff %g; the small-jump surrogate is degenerate.", self.cutoff)
        object.__setattr__(self, "jump_rate", rate)
        object.__setattr__(self, "surrogate_variance", variance)

    @property
    def dim(self) -> int:
        """Return the dimension of the noise."""
        return self.measure.dim

    @property
    def stable_scale(self) -> float:
        r"""Return the scale :math:`\gamma` of the exact stable law."""
        return stable_scale(self.measure.kappa2, self.measure.alpha, self.measure.dim)

    def to_dict(self) -> dict[str, object]:
        r"""Return a serializable description of the plan.

        Returns
        -------
        `dict`\[`str`, `object`\]
            parameters of the plan
        """
        return {
            "measure": self.measure.to_dict(),
            "cutoff": self.cutoff,
            "small_jump_mode": self.small_jump_mode.name.lower(),
            "brownian": self.brownian,
            "jumps": self.jumps,
        }


def small_jump_increment(plan: NoiseIncrementPlan, dt: float, rng: Generator, size: int) -> NDArray[np.float64]:
    r"""Sample the increment carried by jumps below the cutoff.

    In `SmallJumpMode.EXACT_STABLE` mode this is the full stable increment.

    Parameters
    ----------
    plan : `NoiseIncrementPlan`
        noise plan
    dt : `float`
        time step
    rng : `numpy.random.Generator`
        random-number generator
    size : `int`
        number of increments

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.float64`\]
        array of shape (size, d)
    """
    dim = plan.dim
    mode = plan.small_jump_mode
    if not plan.jumps:
        return np.zeros((size, dim), dtype=np.float64)
    if mode == SmallJumpMode.GAUSSIAN_SURROGATE:
        if plan.surrogate_variance == 0:
            return np.zeros((size, dim), dtype=np.float64)
        return rng.normal(0.0, math.sqrt(plan.surrogate_variance * dt), (size, dim))
    if mode == SmallJumpMode.DROP_WITH_COMPENSATION:
        return np.zeros((size, dim), dtype=np.float64)
    if mode == SmallJumpMode.EXACT_STABLE:
        return stable_increment(plan.measure.alpha, dt, dim, plan.stable_scale, rng, size)
    typing_extensions.assert_never(mode)


def jump_counts(plan: NoiseIncrementPlan, dt: float, rng: Generator, size: int) -> NDArray[np.int64]:
    r"""Sample the number of arrivals above the cutoff during a step, per path.

    Parameters
    ----------
    plan : `NoiseIncrementPlan`
        noise plan
    dt : `float`
        time step
    rng : `numpy.random.Generator`
        random-number generator
    size : `int`
        number of paths

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.int64`\]
        Poisson counts
    """
    if plan.jump_rate == 0:
        return np.zeros(size, dtype=np.int64)
    return rng.poisson(plan.jump_rate * dt, size).astype(np.int64)


def levy_increment(plan: NoiseIncrementPlan, dt: float, rng: Generator, size: int) -> NDArray[np.float64]:
    r"""Sample the full Lévy increment over a step for additive noise.

    Parameters
    ----------
    plan : `NoiseIncrementPlan`
        noise plan
    dt : `float`
        time step
    rng : `numpy.random.Generator`
        random-number generator
    size : `int`
        number of paths

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.float64`\]
        array of shape (size, d)
    """
    out = small_jump_increment(plan, dt, rng, size)
    counts = jump_counts(plan, dt, rng, size)
    total = int(counts.sum())
    if total:
        jumps = sample_jump_above(plan.measure, plan.cutoff, rng, size=total)
        np.add.at(out, np.repeat(np.arange(size), counts), jumps)
    return out


def compensation_drift(plan: NoiseIncrementPlan, n_probes: int = 64) -> NDArray[np.float64]:
    r"""Return :math:`-\int_{\delta<|z|\le 1} z\,\nu(dz)` per unit time.

    The integral vanishes when the density is even. Evenness is checked on
    ``n_probes`` fixed directions at radii spread over :math:`(\delta, 1]`.

    Parameters
    ----------
    plan : `NoiseIncrementPlan`
        noise plan
    n_probes : `int`, optional
        number of probe directions, by default 64

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.float64`\]
        zero vector of shape (d,)

    Raises
    ------
    ValueError
        if the density is not even on the compensated shell
    """
    drift = np.zeros(plan.dim, dtype=np.float64)
    if plan.cutoff >= 1:
        return drift
    radii = np.geomspace(plan.cutoff, 1.0, 9)[1:]
    directions = uniform_directions(stream(0, 0), n_probes, plan.dim)
    points = (radii[:, None, None] * directions[None]).reshape(-1, plan.dim)
    forward = plan.measure.density(points)
    backward = plan.measure.density(-points)
    if not np.allclose(forward, backward, rtol=1e-12, atol=0.0):
        msg = "Compensation drift requires a Lévy density that is even on cutoff < |z| <= 1."
        raise ValueError(msg)
    return drift


def jump_stream(plan: NoiseIncrementPlan, t0: float, t1: float, rng: Generator | None = None) -> JumpStream:
    r"""Sample the jumps above the cutoff on :math:`(t_0, t_1]`.

    Parameters
    ----------
    plan : `NoiseIncrementPlan`
        noise plan
    t0 : `float`
        window start
    t1 : `float`
        window end, greater than t0
    rng : `numpy.random.Generator` | None, optional
        random-number generator, by default None

    Returns
    -------
    `JumpStream`
        sorted arrivals with their marks and the (zero) compensation drift

    Raises
    ------
    ValueError
        if t1 <= t0 or the Lévy density is not even
    """
    if not t1 > t0:
        msg = f"Window must satisfy t0 < t1, got ({t0}, {t1})."
        raise ValueError(msg)
    rng = ensure_rng(rng)
    dim = plan.dim
    rate = tail_mass(plan.measure, plan.cutoff) if plan.jumps else 0.0
    count = int(rng.poisson(rate * (t1 - t0))) if rate > 0 else 0
    times = np.sort(t0 + (t1 - t0) * (1.0 - rng.random(count)))
    jumps = sample_jump_above(plan.measure, plan.cutoff, rng, size=count) if count else np.zeros((0, dim))
    drift = (t1 - t0) * compensation_drift(plan)
    return JumpStream(times, jumps, drift)
