r"""Finite Poisson point configurations on :math:`[0,T]\times\mathbb{R}^d`.

This module provides:

- `Configuration`: Finite list of marked points in a time window.
- `ConfigurationBatch`: Many configurations stored in flat arrays.
- `FiniteIntensity`: Finite intensity :math:`\lambda(ds, dz) = 1_{[0,T]}(s)ds\,\bar\nu(dz)`.
- `PointFunction`: Function h(s, z) of one marked point, optionally radial.
- `PointDensity`, `TimeTiltDensity`: Probability densities g with respect to the intensity.
- `Functional`: Bounded functional of configurations, with the named corpus
  `count_functional`, `linear_functional`, `laplace_functional`, `shifted_laplace_functional`,
  `max_mark_functional`, `functional_corpus`.
- `campbell_mean`, `campbell_variance`, `laplace_transform`: Exact moments of linear statistics.
- `sample_configuration`, `sample_batch`: Poisson sampling.
- `check_permutation_invariance`: Evaluate a functional on shuffled point lists.
- `mecke_check`: Both sides of the Mecke identity.
- `girsanov_density_check`: Add-one-point reweighting with the density :math:`1/(g(\tau,\xi)+N_T(g))`.
- `wu_entropy_check`: Both sides of the Φ-entropy inequality on Poisson space.
"""

from __future__ import annotations

import abc
import logging
import math
from abc import ABC
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np
import typing_extensions

from jumpentropy.common import DegenerateDensity, Estimate, combined_stderr
from jumpentropy.levy_measure import radial_integral, sample_jump_above, tail_mass
from jumpentropy.phi_entropy import entropy_estimate
from jumpentropy.rng import ensure_rng, stream

if TYPE_CHECKING:
    from collections.abc import Iterator

    from numpy.random import Generator
    from numpy.typing import ArrayLike, NDArray

    from jumpentropy.levy_measure import RadialLevyMeasure
    from jumpentropy.phi_entropy import PhiSpec

logger = logging.getLogger(__name__)

# smallest accepted m * g on sampled points
DENSITY_FLOOR = 1e-8

MarkSampler = Callable[["Generator", int], "NDArray[np.float64]"]
PointFunctionLike = Callable[["NDArray[np.float64]", "NDArray[np.float64]"], "NDArray[np.float64]"]


@dataclass(frozen=True)
class Configuration:
    r"""Finite configuration :math:`\gamma = \sum_i \delta_{(s_i, z_i)}` on :math:`[0, T]`.

    Attributes
    ----------
    times : `numpy.typing.NDArray`\[`numpy.float64`\]
        arrival times of shape (n,)
    marks : `numpy.typing.NDArray`\[`numpy.float64`\]
        marks of shape (n, d)
    window : `float`
        horizon T
    """

    times: NDArray[np.float64]
    marks: NDArray[np.float64]
    window: float

    def __post_init__(self) -> None:
        if self.times.ndim != 1 or self.marks.ndim != 2 or self.marks.shape[0] != self.times.size:  # noqa: PLR2004
            msg = "Configuration needs times of shape (n,) and marks of shape (n, d)."
            raise ValueError(msg)
        if self.times.size and (self.times.min() < 0 or self.times.max() > self.window):
            msg = f"Arrival times must lie in [0, {self.window}]."
            raise ValueError(msg)

    def __len__(self) -> int:
        """Return the number of points."""
        return int(self.times.size)

    @property
    def dim(self) -> int:
        """Return the mark dimension."""
        return int(self.marks.shape[1])

    def add(self, time: float, mark: ArrayLike) -> Configuration:
        r"""Return :math:`\gamma + \delta_{(s, z)}`."""
        return Configuration(
            np.append(self.times, time), np.vstack([self.marks, np.asarray(mark, dtype=np.float64)]), self.window
        )

    def remove(self, index: int) -> Configuration:
        r"""Return :math:`\gamma - \delta_{(s_i, z_i)}`."""
        keep = np.arange(len(self)) != index
        return Configuration(self.times[keep], self.marks[keep], self.window)

    def shuffled(self, rng: Generator | None = None) -> Configuration:
        """Return the same configuration with its points in random order."""
        order = ensure_rng(rng).permutation(len(self))
        return Configuration(self.times[order], self.marks[order], self.window)


class ConfigurationBatch:
    r"""Batch of configurations stored as flat point arrays with an owner index.

    Parameters
    ----------
    times : `numpy.typing.NDArray`\[`numpy.float64`\]
        arrival times of all points, shape (P,)
    marks : `numpy.typing.NDArray`\[`numpy.float64`\]
        marks of all points, shape (P, d)
    owner : `numpy.typing.NDArray`\[`numpy.int64`\]
        configuration index of every point, non-decreasing
    size : `int`
        number of configurations
    window : `float`
        horizon T
    """

    def __init__(
        self,
        times: NDArray[np.float64],
        marks: NDArray[np.float64],
        owner: NDArray[np.int64],
        size: int,
        window: float,
    ) -> None:
        self.__times = times
        self.__marks = marks
        self.__owner = owner
        self.__size = int(size)
        self.__window = float(window)
        self.__counts = np.bincount(owner, minlength=self.__size).astype(np.int64)

    @classmethod
    def from_configurations(cls, configs: list[Configuration], window: float, dim: int) -> ConfigurationBatch:
        """Pack configurations into a batch.

        Parameters
        ----------
        configs : `list`\\[`Configuration`\\]
            configurations
        window : `float`
            horizon
        dim : `int`
            mark dimension

        Returns
        -------
        `ConfigurationBatch`
            packed batch
        """
        counts = np.asarray([len(c) for c in configs], dtype=np.int64)
        times = np.concatenate([c.times for c in configs]) if configs else np.zeros(0)
        marks = np.concatenate([c.marks for c in configs]) if configs else np.zeros((0, dim))
        owner = np.repeat(np.arange(len(configs)), counts)
        return cls(times, marks.reshape(-1, dim), owner, len(configs), window)

    def __len__(self) -> int:
        """Return the number of configurations."""
        return self.__size

    @property
    def times(self) -> NDArray[np.float64]:
        """Return the arrival times of all points."""
        return self.__times

    @property
    def marks(self) -> NDArray[np.float64]:
        """Return the marks of all points."""
        return self.__marks

    @property
    def owner(self) -> NDArray[np.int64]:
        """Return the configuration index of every point."""
        return self.__owner

    @property
    def counts(self) -> NDArray[np.int64]:
        """Return the number of points of every configuration."""
        return self.__counts

    @property
    def offsets(self) -> NDArray[np.int64]:
        """Return the index of the first point of every configuration."""
        return np.concatenate([[0], np.cumsum(self.__counts)[:-1]]).astype(np.int64)

    @property
    def window(self) -> float:
        """Return the horizon."""
        return self.__window

    @property
    def dim(self) -> int:
        """Return the mark dimension."""
        return int(self.__marks.shape[1])

    def __getitem__(self, index: int) -> Configuration:
        """Return one configuration."""
        lo = int(self.offsets[index])
        hi = lo + int(self.__counts[index])
        return Configuration(self.__times[lo:hi], self.__marks[lo:hi], self.__window)

    def __iter__(self) -> Iterator[Configuration]:
        """Iterate over configurations."""
        for i in range(self.__size):
            yield self[i]

    def sum_per_configuration(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        r"""Return :math:`\sum_{x\in\gamma} v(x)` for every configuration from point values."""
        return np.bincount(self.__owner, weights=values, minlength=self.__size)

    def select(self, indices: NDArray[np.int64]) -> ConfigurationBatch:
        """Return the batch of the configurations at ``indices``, duplicates allowed.

        Parameters
        ----------
        indices : `numpy.typing.NDArray`\\[`numpy.int64`\\]
            configuration indices

        Returns
        -------
        `ConfigurationBatch`
            selected configurations in the given order
        """
        idx = np.asarray(indices, dtype=np.int64)
        lengths = self.__counts[idx]
        starts = np.repeat(self.offsets[idx], lengths)
        local = np.arange(int(lengths.sum())) - np.repeat(np.cumsum(lengths) - lengths, lengths)
        members = starts + local
        owner = np.repeat(np.arange(idx.size), lengths)
        return ConfigurationBatch(self.__times[members], self.__marks[members], owner, idx.size, self.__window)

    def with_points(self, times: NDArray[np.float64], marks: NDArray[np.float64]) -> ConfigurationBatch:
        r"""Return :math:`\gamma_i + \delta_{(s_i, z_i)}` for every configuration.

        Parameters
        ----------
        times : `numpy.typing.NDArray`\\[`numpy.float64`\\]
            one time per configuration
        marks : `numpy.typing.NDArray`\\[`numpy.float64`\\]
            one mark per configuration

        Returns
        -------
        `ConfigurationBatch`
            enlarged configurations
        """
        owner = np.concatenate([self.__owner, np.arange(self.__size)])
        order = np.argsort(owner, kind="stable")
        all_times = np.concatenate([self.__times, times])[order]
        all_marks = np.concatenate([self.__marks, marks.reshape(-1, self.dim)])[order]
        return ConfigurationBatch(all_times, all_marks, owner[order], self.__size, self.__window)

    def without_each_point(self) -> ConfigurationBatch:
        r"""Return :math:`\gamma - \delta_x` for every point x of every configuration, in point order."""
        n_points = self.__times.size
        lengths = self.__counts[self.__owner]
        starts = np.repeat(self.offsets[self.__owner], lengths)
        local = np.arange(int(lengths.sum())) - np.repeat(np.cumsum(lengths) - lengths, lengths)
        members = starts + local
        removed = np.repeat(np.arange(n_points), lengths)
        keep = members != removed
        owner = removed[keep]
        return ConfigurationBatch(self.__times[members[keep]], self.__marks[members[keep]], owner, n_points, self.__window)


@dataclass(frozen=True)
class PointFunction:
    r"""Function :math:`h(s, z)` of a marked point.

    Attributes
    ----------
    func : `collections.abc.Callable`
        vectorized map from times (n,) and marks (n, d) to values (n,)
    radial : `collections.abc.Callable` | None
        :math:`r \mapsto h(s, z)` when h only depends on :math:`|z|`
    name : `str`
        label
    """

    func: PointFunctionLike
    radial: Callable[[float], float] | None = None
    name: str = "custom"

    def __call__(self, times: NDArray[np.float64], marks: NDArray[np.float64]) -> NDArray[np.float64]:
        """Evaluate h."""
        return np.asarray(self.func(times, marks), dtype=np.float64)


def truncated_norm(cap: float = 1.0) -> PointFunction:
    r"""Return :math:`h(s, z) = |z| \wedge c`.

    Parameters
    ----------
    cap : `float`, optional
        truncation level c, by default 1

    Returns
    -------
    `PointFunction`
        radial point function
    """
    return PointFunction(
        lambda _, marks: np.minimum(np.linalg.norm(marks, axis=1), cap),
        radial=lambda r: min(r, cap),
        name=f"norm^{cap:g}",
    )


def time_weighted_norm(window: float, cap: float = 1.0) -> PointFunction:
    r"""Return :math:`h(s, z) = (s/T)(|z| \wedge c)`.

    Parameters
    ----------
    window : `float`
        horizon T
    cap : `float`, optional
        truncation level c, by default 1

    Returns
    -------
    `PointFunction`
        time-dependent point function
    """
    return PointFunction(
        lambda times, marks: times / window * np.minimum(np.linalg.norm(marks, axis=1), cap),
        name=f"time*norm^{cap:g}",
    )


class FiniteIntensity:
    r"""Intensity :math:`\lambda = 1_{[0,T]}ds \otimes \bar\nu` with :math:`\bar\nu(\mathbb{R}^d) < \infty`.

    Parameters
    ----------
    window : `float`
        horizon T > 0
    mark_mass : `float`
        total mass of the mark measure, non-negative
    dim : `int`
        mark dimension
    sampler : `collections.abc.Callable`
        draws (n, d) marks from the normalized mark measure
    measure : `RadialLevyMeasure` | None, optional
        Lévy measure whose restriction to :math:`\{|z|>\delta\}` is the mark measure
    delta : `float`, optional
        cutoff of that restriction, by default 0
    name : `str`, optional
        label, by default "custom"
    """

    def __init__(  # noqa: PLR0913
        self,
        window: float,
        mark_mass: float,
        dim: int,
        sampler: MarkSampler,
        *,
        measure: RadialLevyMeasure | None = None,
        delta: float = 0.0,
        name: str = "custom",
    ) -> None:
        if not window > 0:
            msg = f"Window must be positive, got {window}."
            raise ValueError(msg)
        if not 0 <= mark_mass < math.inf:
            msg = f"Mark mass must be finite and non-negative, got {mark_mass}."
            raise ValueError(msg)
        self.__window = float(window)
        self.__mark_mass = float(mark_mass)
        self.__dim = int(dim)
        self.__sampler = sampler
        self.__measure = measure
        self.__delta = float(delta)
        self.__name = name

    @classmethod
    def from_levy_tail(cls, measure: RadialLevyMeasure, delta: float, window: float) -> FiniteIntensity:
        r"""Return the intensity of the jumps above :math:`\delta` of a Lévy process on [0, T].

        Parameters
        ----------
        measure : `RadialLevyMeasure`
            Lévy measure
        delta : `float`
            cutoff
        window : `float`
            horizon

        Returns
        -------
        `FiniteIntensity`
            intensity with mark measure :math:`\nu|_{\{|z|>\delta\}}`
        """
        mass = tail_mass(measure, delta)

        def sampler(rng: Generator, n: int) -> NDArray[np.float64]:
            if n == 0:
                return np.zeros((0, measure.dim))
            return sample_jump_above(measure, delta, rng, size=n)

        return cls(window, mass, measure.dim, sampler, measure=measure, delta=delta, name=f"levy-tail({delta:g})")

    @classmethod
    def uniform_ball(cls, rate: float, radius: float, dim: int, window: float) -> FiniteIntensity:
        """Return marks uniform in a ball with total mark mass ``rate``.

        Parameters
        ----------
        rate : `float`
            mark mass
        radius : `float`
            ball radius
        dim : `int`
            mark dimension
        window : `float`
            horizon

        Returns
        -------
        `FiniteIntensity`
            intensity
        """

        def sampler(rng: Generator, n: int) -> NDArray[np.float64]:
            g = rng.standard_normal((n, dim))
            g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
            return g * (radius * rng.random(n) ** (1.0 / dim))[:, None]

        return cls(window, rate, dim, sampler, name=f"ball({radius:g})")

    @property
    def window(self) -> float:
        """Return the horizon."""
        return self.__window

    @property
    def mark_mass(self) -> float:
        """Return the mass of the mark measure."""
        return self.__mark_mass

    @property
    def total_mass(self) -> float:
        r"""Return :math:`m = T\bar\nu(\mathbb{R}^d)`."""
        return self.__window * self.__mark_mass

    @property
    def dim(self) -> int:
        """Return the mark dimension."""
        return self.__dim

    @property
    def name(self) -> str:
        """Return the label."""
        return self.__name

    def sample_marks(self, rng: Generator, n: int) -> NDArray[np.float64]:
        """Draw n marks from the normalized mark measure."""
        if n == 0:
            return np.zeros((0, self.__dim))
        return np.asarray(self.__sampler(rng, n), dtype=np.float64).reshape(n, self.__dim)

    def sample_points(self, rng: Generator, n: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Draw n points from the normalized intensity."""
        return self.__window * rng.random(n), self.sample_marks(rng, n)

    def integrate(self, h: PointFunction, *, rng: Generator | None = None, n_samples: int = 200_000) -> Estimate:
        r"""Return :math:`\int h\,d\lambda`.

        Radial h on a Lévy-tail intensity is integrated by quadrature, anything else by
        Monte Carlo from the normalized intensity.

        Parameters
        ----------
        h : `PointFunction`
            integrand
        rng : `numpy.random.Generator` | None, optional
            generator for the Monte Carlo path
        n_samples : `int`, optional
            Monte Carlo samples, by default 200000

        Returns
        -------
        `Estimate`
            value with error estimate
        """
        m = self.total_mass
        if m == 0:
            return Estimate(0.0)
        if h.radial is not None and self.__measure is not None:
            est = radial_integral(self.__measure, h.radial, self.__delta)
            return Estimate(self.__window * est.value, self.__window * est.stderr)
        times, marks = self.sample_points(ensure_rng(rng), n_samples)
        values = h(times, marks)
        return Estimate(m * float(values.mean()), m * float(values.std(ddof=1)) / math.sqrt(n_samples))

    def to_dict(self) -> dict[str, object]:
        r"""Return a serializable description.

        Returns
        -------
        `dict`\[`str`, `object`\]
            description
        """
        return {"name": self.__name, "window": self.__window, "mark_mass": self.__mark_mass, "dim": self.__dim}


def sample_configuration(intensity: FiniteIntensity, rng: Generator | None = None) -> Configuration:
    r"""Sample a Poisson configuration with intensity :math:`\lambda`.

    Parameters
    ----------
    intensity : `FiniteIntensity`
        intensity
    rng : `numpy.random.Generator` | None, optional
        random-number generator

    Returns
    -------
    `Configuration`
        configuration with Poisson(m) points drawn i.i.d. from :math:`\lambda/m`
    """
    rng = ensure_rng(rng)
    n = int(rng.poisson(intensity.total_mass))
    times, marks = intensity.sample_points(rng, n)
    return Configuration(times, marks, intensity.window)


def sample_batch(intensity: FiniteIntensity, size: int, rng: Generator | None = None) -> ConfigurationBatch:
    """Sample ``size`` independent configurations.

    Parameters
    ----------
    intensity : `FiniteIntensity`
        intensity
    size : `int`
        number of configurations
    rng : `numpy.random.Generator` | None, optional
        random-number generator

    Returns
    -------
    `ConfigurationBatch`
        batch of configurations
    """
    rng = ensure_rng(rng)
    counts = rng.poisson(intensity.total_mass, size)
    times, marks = intensity.sample_points(rng, int(counts.sum()))
    owner = np.repeat(np.arange(size), counts)
    return ConfigurationBatch(times, marks, owner, size, intensity.window)


class PointDensity(ABC):
    r"""Density g with :math:`\int g\,d\lambda = 1`, strictly positive on the window."""

    @abc.abstractmethod
    def __call__(self, times: NDArray[np.float64], marks: NDArray[np.float64]) -> NDArray[np.float64]:
        """Evaluate g."""
        raise NotImplementedError

    @abc.abstractmethod
    def sample(self, rng: Generator, n: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        r"""Draw n points from :math:`g\,d\lambda`."""
        raise NotImplementedError


class TimeTiltDensity(PointDensity):
    r"""Density :math:`g(s, z) = (1 + c\,s/T)/(m(1 + c/2))`; c = 0 gives :math:`\lambda/m`.

    Parameters
    ----------
    intensity : `FiniteIntensity`
        intensity with positive total mass
    tilt : `float`, optional
        tilt c > -1, by default 0
    """

    def __init__(self, intensity: FiniteIntensity, tilt: float = 0.0) -> None:
        if intensity.total_mass == 0:
            msg = "No density exists for an intensity of zero mass."
            raise DegenerateDensity(msg)
        if not tilt > -1:
            msg = f"Tilt must exceed -1, got {tilt}."
            raise ValueError(msg)
        self.__intensity = intensity
        self.__tilt = float(tilt)

    @property
    def tilt(self) -> float:
        """Return the tilt."""
        return self.__tilt

    @typing_extensions.override
    def __call__(self, times: NDArray[np.float64], marks: NDArray[np.float64]) -> NDArray[np.float64]:
        c = self.__tilt
        return (1.0 + c * times / self.__intensity.window) / (self.__intensity.total_mass * (1.0 + c / 2))

    @typing_extensions.override
    def sample(self, rng: Generator, n: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        c = self.__tilt
        u = rng.random(n)
        # inverse CDF of y + c y^2 / 2 on [0, 1]
        y = u if c == 0 else (np.sqrt(1.0 + 2.0 * c * u * (1.0 + c / 2)) - 1.0) / c
        return self.__intensity.window * y, self.__intensity.sample_marks(rng, n)


class Functional(ABC):
    """Bounded functional of configurations, evaluated batch-wise."""

    @property
    @abc.abstractmethod
    def name(self) -> str:
        """Return the label used on the command line."""
        raise NotImplementedError

    @abc.abstractmethod
    def evaluate(self, batch: ConfigurationBatch) -> NDArray[np.float64]:
        r"""Return the functional of every configuration of a batch.

        Parameters
        ----------
        batch : `ConfigurationBatch`
            configurations

        Returns
        -------
        `numpy.typing.NDArray`\[`numpy.float64`\]
            values of shape (len(batch),)
        """
        raise NotImplementedError

    @property
    def lower(self) -> float:
        """Return a lower bound of the functional."""
        return 0.0

    def expected(self, intensity: FiniteIntensity) -> float | None:  # noqa: ARG002, PLR6301
        """Return the exact mean under the Poisson law when known."""
        return None

    def __call__(self, config: Configuration) -> float:
        """Evaluate a single configuration."""
        batch = ConfigurationBatch.from_configurations([config], config.window, config.dim)
        return float(self.evaluate(batch)[0])


class _CountFunctional(Functional):
    @property
    @typing_extensions.override
    def name(self) -> str:
        return "count"

    @typing_extensions.override
    def evaluate(self, batch: ConfigurationBatch) -> NDArray[np.float64]:
        return batch.counts.astype(np.float64)

    @typing_extensions.override
    def expected(self, intensity: FiniteIntensity) -> float | None:
        return intensity.total_mass


class _LinearFunctional(Functional):
    def __init__(self, h: PointFunction, shift: float) -> None:
        self.__h = h
        self.__shift = shift

    @property
    @typing_extensions.override
    def name(self) -> str:
        return "linear"

    @property
    @typing_extensions.override
    def lower(self) -> float:
        return self.__shift

    @typing_extensions.override
    def evaluate(self, batch: ConfigurationBatch) -> NDArray[np.float64]:
        return batch.sum_per_configuration(self.__h(batch.times, batch.marks)) + self.__shift

    @typing_extensions.override
    def expected(self, intensity: FiniteIntensity) -> float | None:
        return campbell_mean(intensity, self.__h).value + self.__shift


class _LaplaceFunctional(Functional):
    def __init__(self, h: PointFunction, shift: float) -> None:
        self.__h = h
        self.__shift = shift

    @property
    @typing_extensions.override
    def name(self) -> str:
        return "laplace" if self.__shift == 0 else "shifted_laplace"

    @property
    @typing_extensions.override
    def lower(self) -> float:
        return self.__shift

    @typing_extensions.override
    def evaluate(self, batch: ConfigurationBatch) -> NDArray[np.float64]:
        return np.exp(-batch.sum_per_configuration(self.__h(batch.times, batch.marks))) + self.__shift

    @typing_extensions.override
    def expected(self, intensity: FiniteIntensity) -> float | None:
        return laplace_transform(intensity, self.__h).value + self.__shift


class _MaxMarkFunctional(Functional):
    def __init__(self, cap: float, shift: float) -> None:
        self.__cap = cap
        self.__shift = shift

    @property
    @typing_extensions.override
    def name(self) -> str:
        return "max_mark"

    @property
    @typing_extensions.override
    def lower(self) -> float:
        return self.__shift

    @typing_extensions.override
    def evaluate(self, batch: ConfigurationBatch) -> NDArray[np.float64]:
        out = np.zeros(len(batch))
        np.maximum.at(out, batch.owner, np.minimum(np.linalg.norm(batch.marks, axis=1), self.__cap))
        return out + self.__shift


def count_functional() -> Functional:
    r"""Return :math:`\gamma \mapsto \gamma(1)`, the number of points."""
    return _CountFunctional()


def linear_functional(h: PointFunction | None = None, shift: float = 0.0) -> Functional:
    r"""Return :math:`\gamma \mapsto \gamma(h) + c`.

    Parameters
    ----------
    h : `PointFunction` | None, optional
        non-negative point function, by default `truncated_norm`
    shift : `float`, optional
        constant c, by default 0

    Returns
    -------
    `Functional`
        linear functional
    """
    return _LinearFunctional(truncated_norm() if h is None else h, shift)


def laplace_functional(h: PointFunction | None = None) -> Functional:
    r"""Return :math:`\gamma \mapsto e^{-\gamma(h)}`, by default with :math:`h = |z| \wedge 1`."""
    return _LaplaceFunctional(truncated_norm() if h is None else h, 0.0)


def shifted_laplace_functional(h: PointFunction | None = None, shift: float = 1.0) -> Functional:
    r"""Return :math:`\gamma \mapsto e^{-\gamma(h)} + c`, bounded away from 0."""
    return _LaplaceFunctional(truncated_norm() if h is None else h, shift)


def max_mark_functional(cap: float = 10.0, shift: float = 1.0) -> Functional:
    r"""Return :math:`\gamma \mapsto c + \max_i (|z_i| \wedge K)`, with 0 for the empty configuration.

    Parameters
    ----------
    cap : `float`, optional
        truncation K, by default 10
    shift : `float`, optional
        constant c, by default 1

    Returns
    -------
    `Functional`
        max-mark statistic
    """
    return _MaxMarkFunctional(cap, shift)


def functional_corpus(h: PointFunction | None = None) -> dict[str, Functional]:
    r"""Return the named corpus of functionals.

    Parameters
    ----------
    h : `PointFunction` | None, optional
        point function of the linear and Laplace entries, by default `truncated_norm`

    Returns
    -------
    `dict`\[`str`, `Functional`\]
        functionals by name
    """
    return {
        "count": count_functional(),
        "linear": linear_functional(h, shift=1.0),
        "laplace": laplace_functional(h),
        "shifted_laplace": shifted_laplace_functional(h),
        "max_mark": max_mark_functional(),
    }


def campbell_mean(intensity: FiniteIntensity, h: PointFunction, rng: Generator | None = None) -> Estimate:
    r"""Return :math:`E\,\gamma(h) = \int h\,d\lambda`."""
    return intensity.integrate(h, rng=rng)


def campbell_variance(intensity: FiniteIntensity, h: PointFunction, rng: Generator | None = None) -> Estimate:
    r"""Return :math:`\mathrm{Var}\,\gamma(h) = \int h^2\,d\lambda`."""
    radial = None if h.radial is None else (lambda r: h.radial(r) ** 2)  # type: ignore[misc]
    square = PointFunction(lambda t, z: h(t, z) ** 2, radial=radial, name=f"{h.name}^2")
    return intensity.integrate(square, rng=rng)


def laplace_transform(intensity: FiniteIntensity, h: PointFunction, rng: Generator | None = None) -> Estimate:
    r"""Return :math:`E\,e^{-\gamma(h)} = \exp(-\int(1-e^{-h})\,d\lambda)`."""
    radial = None if h.radial is None else (lambda r: -math.expm1(-h.radial(r)))  # type: ignore[misc]
    one_minus = PointFunction(lambda t, z: -np.expm1(-h(t, z)), radial=radial, name=f"1-exp(-{h.name})")
    integral = intensity.integrate(one_minus, rng=rng)
    value = math.exp(-integral.value)
    return Estimate(value, value * integral.stderr)


def check_permutation_invariance(
    functional: Functional, config: Configuration, rng: Generator | None = None, n_shuffles: int = 8
) -> bool:
    """Check that a functional does not depend on the order of the points.

    Parameters
    ----------
    functional : `Functional`
        functional
    config : `Configuration`
        configuration
    rng : `numpy.random.Generator` | None, optional
        random-number generator
    n_shuffles : `int`, optional
        number of random orders, by default 8

    Returns
    -------
    `bool`
        whether all orders give the same value up to round-off
    """
    rng = ensure_rng(rng)
    reference = functional(config)
    return all(
        math.isclose(functional(config.shuffled(rng)), reference, rel_tol=1e-12, abs_tol=1e-15)
        for _ in range(n_shuffles)
    )


# F(gamma, (s, z)) for every configuration of a batch paired with one point each
MeckeFunctional = Callable[[ConfigurationBatch, "NDArray[np.float64]", "NDArray[np.float64]"], "NDArray[np.float64]"]


def mecke_constant(value: float = 1.0) -> MeckeFunctional:
    r"""Return :math:`F(\gamma, x) = c`."""
    return lambda batch, _times, _marks: np.full(len(batch), value)


def mecke_time_fraction() -> MeckeFunctional:
    r"""Return :math:`F(\gamma, (s, z)) = s/T`."""
    return lambda batch, times, _marks: times / batch.window


def mecke_count() -> MeckeFunctional:
    r"""Return :math:`F(\gamma, x) = \gamma(1)`."""
    return lambda batch, _times, _marks: batch.counts.astype(np.float64)


@dataclass(frozen=True)
class IdentityCheck:
    r"""Two Monte Carlo estimates of quantities that should agree.

    Attributes
    ----------
    lhs : `Estimate`
        left-hand side
    rhs : `Estimate`
        right-hand side
    stderr : `float`
        standard error of the difference
    """

    lhs: Estimate
    rhs: Estimate
    stderr: float

    @property
    def difference(self) -> float:
        """Return lhs minus rhs."""
        return self.lhs.value - self.rhs.value

    def holds(self, n_sigma: float = 3.0) -> bool:
        """Return whether the sides agree within ``n_sigma`` standard errors."""
        return abs(self.difference) <= n_sigma * self.stderr + 1e-12 * max(1.0, abs(self.rhs.value))


def _mean_estimate(values: NDArray[np.float64]) -> Estimate:
    n = values.size
    if n < 2:  # noqa: PLR2004
        return Estimate(float(values.mean()) if n else 0.0)
    return Estimate(float(values.mean()), float(values.std(ddof=1)) / math.sqrt(n))


def mecke_check(
    functional: MeckeFunctional,
    intensity: FiniteIntensity,
    n_samples: int = 100_000,
    seed: int = 0,
    *,
    n_points: int = 4,
) -> IdentityCheck:
    r"""Compare :math:`E\sum_{x\in\gamma}F(\gamma-\delta_x, x)` with :math:`E\int F(\gamma, x)\lambda(dx)`.

    The inner integral is estimated from ``n_points`` draws of :math:`\lambda/m` per
    configuration.

    Parameters
    ----------
    functional : `MeckeFunctional`
        bounded F
    intensity : `FiniteIntensity`
        intensity
    n_samples : `int`, optional
        number of configurations, by default 100000
    seed : `int`, optional
        seed, by default 0
    n_points : `int`, optional
        intensity draws per configuration, by default 4

    Returns
    -------
    `IdentityCheck`
        both sides
    """
    batch = sample_batch(intensity, n_samples, stream(seed, 0))
    reduced = batch.without_each_point()
    lhs_values = batch.sum_per_configuration(functional(reduced, batch.times, batch.marks))
    m = intensity.total_mass
    repeated = batch.select(np.repeat(np.arange(n_samples), n_points))
    times, marks = intensity.sample_points(stream(seed, 1), n_samples * n_points)
    rhs_values = m * functional(repeated, times, marks).reshape(n_samples, n_points).mean(axis=1)
    lhs = _mean_estimate(lhs_values)
    rhs = _mean_estimate(rhs_values)
    stderr = _mean_estimate(lhs_values - rhs_values).stderr
    logger.info("mecke: lhs %.6g, rhs %.6g, stderr %.2g", lhs.value, rhs.value, stderr)
    return IdentityCheck(lhs, rhs, stderr)


@dataclass(frozen=True)
class GirsanovCheck:
    r"""Add-one-point reweighting against the direct mean.

    For a finite intensity the identity :math:`E[R\,F(N+\delta_{(\tau,\xi)})] = E[F(N); N\neq\emptyset]`
    holds; the empty configuration has probability :math:`e^{-m}`.

    Attributes
    ----------
    reweighted : `Estimate`
        :math:`E[R\,F(N+\delta_{(\tau,\xi)})]`
    direct : `Estimate`
        :math:`E[F(N)]`
    nonempty : `Estimate`
        :math:`E[F(N); N\neq\emptyset]`
    weight : `Estimate`
        :math:`E[R]`
    empty_mass : `float`
        :math:`e^{-m}`
    stderr : `float`
        standard error of reweighted minus nonempty
    """

    reweighted: Estimate
    direct: Estimate
    nonempty: Estimate
    weight: Estimate
    empty_mass: float
    stderr: float

    @property
    def relative_error(self) -> float:
        """Return the relative gap of the reweighted and the non-empty mean."""
        return abs(self.reweighted.value - self.nonempty.value) / max(abs(self.nonempty.value), 1e-300)

    def holds(self, n_sigma: float = 3.0) -> bool:
        """Return whether the reweighted and non-empty means agree within ``n_sigma`` errors."""
        return abs(self.reweighted.value - self.nonempty.value) <= n_sigma * self.stderr + 1e-12


def girsanov_density_check(
    density: PointDensity | None,
    functional: Functional,
    intensity: FiniteIntensity,
    n_samples: int = 100_000,
    seed: int = 0,
) -> GirsanovCheck:
    r"""Reweight :math:`N+\delta_{(\tau,\xi)}` by :math:`R = 1/(g(\tau,\xi)+N_T(g))` and compare with N.

    Parameters
    ----------
    density : `PointDensity` | None
        density g, by default the uniform `TimeTiltDensity`
    functional : `Functional`
        bounded functional F
    intensity : `FiniteIntensity`
        intensity
    n_samples : `int`, optional
        number of samples, by default 100000
    seed : `int`, optional
        seed, by default 0

    Returns
    -------
    `GirsanovCheck`
        reweighted and direct means

    Raises
    ------
    DegenerateDensity
        if g is not bounded away from 0 on the sampled points or the weights are not finite
    """
    g = TimeTiltDensity(intensity) if density is None else density
    m = intensity.total_mass
    batch = sample_batch(intensity, n_samples, stream(seed, 0))
    tau, xi = g.sample(stream(seed, 1), n_samples)
    g_added = g(tau, xi)
    g_points = g(batch.times, batch.marks)
    floor = DENSITY_FLOOR / m
    if np.min(g_added, initial=np.inf) <= floor or np.min(g_points, initial=np.inf) <= floor:
        msg = f"The density g drops below {floor:g} on sampled points."
        raise DegenerateDensity(msg)
    weights = 1.0 / (g_added + batch.sum_per_configuration(g_points))
    if not np.all(np.isfinite(weights)):
        msg = "Reweighting produced non-finite weights."
        raise DegenerateDensity(msg)
    reweighted = weights * functional.evaluate(batch.with_points(tau, xi))
    direct = functional.evaluate(batch)
    nonempty = np.where(batch.counts > 0, direct, 0.0)
    return GirsanovCheck(
        _mean_estimate(reweighted),
        _mean_estimate(direct),
        _mean_estimate(nonempty),
        _mean_estimate(weights),
        math.exp(-m),
        _mean_estimate(reweighted - nonempty).stderr,
    )


@dataclass(frozen=True)
class WuCheck:
    r"""Both sides of :math:`E\Phi(F) - \Phi(EF) \le E\int\Psi_\Phi(F(N+\delta_x), F(N))\lambda(dx)`.

    Attributes
    ----------
    functional : `str`
        functional name
    phi : `str`
        Φ name
    entropy : `Estimate`
        left-hand side
    rhs : `Estimate`
        right-hand side
    """

    functional: str
    phi: str
    entropy: Estimate
    rhs: Estimate

    @property
    def margin(self) -> float:
        """Return rhs minus entropy."""
        return self.rhs.value - self.entropy.value

    @property
    def stderr(self) -> float:
        """Return the combined standard error of the margin."""
        return combined_stderr(self.entropy.stderr, self.rhs.stderr)

    def holds(self, n_sigma: float = 3.0) -> bool:
        """Return whether the entropy is below the rhs up to ``n_sigma`` errors."""
        return self.margin >= -n_sigma * self.stderr

    def to_dict(self) -> dict[str, object]:
        r"""Return the JSON record of the check.

        Returns
        -------
        `dict`\[`str`, `object`\]
            record with functional, phi, entropy, rhs, margin and stderr
        """
        return {
            "functional": self.functional,
            "phi": self.phi,
            "entropy": self.entropy.value,
            "rhs": self.rhs.value,
            "margin": self.margin,
            "stderr": self.stderr,
        }


def wu_entropy_check(  # noqa: PLR0913
    phi: PhiSpec,
    functional: Functional,
    intensity: FiniteIntensity,
    n_samples: int = 100_000,
    seed: int = 0,
    *,
    n_points: int = 4,
    density: PointDensity | None = None,
) -> WuCheck:
    r"""Estimate both sides of the Φ-entropy inequality on Poisson space.

    The add-point integral uses ``n_points`` draws of :math:`g\,d\lambda` per configuration
    with importance weights 1/g.

    Parameters
    ----------
    phi : `PhiSpec`
        convex function
    functional : `Functional`
        positive bounded functional
    intensity : `FiniteIntensity`
        intensity
    n_samples : `int`, optional
        number of configurations, by default 100000
    seed : `int`, optional
        seed, by default 0
    n_points : `int`, optional
        added points per configuration, by default 4
    density : `PointDensity` | None, optional
        proposal g, by default :math:`\lambda/m`

    Returns
    -------
    `WuCheck`
        entropy and right-hand side
    """
    batch = sample_batch(intensity, n_samples, stream(seed, 0))
    values = functional.evaluate(batch)
    entropy = entropy_estimate(phi, values)
    if intensity.total_mass == 0:
        return WuCheck(functional.name, phi.name, entropy, Estimate(0.0))
    g = TimeTiltDensity(intensity) if density is None else density
    index = np.repeat(np.arange(n_samples), n_points)
    tau, xi = g.sample(stream(seed, 1), index.size)
    enlarged = functional.evaluate(batch.select(index).with_points(tau, xi))
    terms = phi.remainder(enlarged, values[index]) / g(tau, xi)
    rhs = _mean_estimate(terms.reshape(n_samples, n_points).mean(axis=1))
    logger.info("wu %s/%s: entropy %.6g, rhs %.6g", functional.name, phi.name, entropy.value, rhs.value)
    return WuCheck(functional.name, phi.name, entropy, rhs)
