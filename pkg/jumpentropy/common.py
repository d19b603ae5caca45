r"""Common classes and functions.

This module provides:

- `Monotonicity`: Monotonicity flag of a radial profile.
- `MomentKind`: Kinds of radial moment integrals against a Lévy measure.
- `IntegrationMethod`: Closed-form or quadrature evaluation of moment integrals.
- `Estimate`: Monte Carlo or quadrature value with its standard error.
- `JumpEntropyError`: Base class of the library errors.
- `DivergentIntegral`, `InvalidRegion`, `EmptyTail`, `ExplosionSuspected`, `UnstableStep`,
  `NotAdditiveNoise`, `NonPositiveInput`, `NoFiniteLimit`, `NotDissipativeEnough`,
  `DegenerateDensity`, `InconclusiveLimit`, `ConfigError`: Domain errors.
- `unit_sphere_area`: Surface measure of the unit sphere in :math:`\mathbb{R}^d`.
- `uniform_directions`: Sample directions uniformly on the unit sphere.
- `combined_stderr`: Combine independent standard errors.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np
from scipy import special

if TYPE_CHECKING:
    from numpy.random import Generator
    from numpy.typing import NDArray


class Monotonicity(Enum):
    """Monotonicity flag of a radial profile."""

    DECREASING = enum.auto()
    INCREASING = enum.auto()
    NONE = enum.auto()


class MomentKind(Enum):
    r"""Kinds of radial moment integrals.

    - SMALL_SQ: :math:`\int_{|z|\le\varepsilon}|z|^2\nu(dz)`
    - MID_ABS: :math:`\int_{\varepsilon<|z|\le 1}|z|\nu(dz)`
    - TAIL_MASS: :math:`\int_{|z|>\varepsilon}\nu(dz)`
    - TAIL_LOG: :math:`\int_{|z|>\varepsilon}\log(1+c|z|)\nu(dz)`
    - TAIL_POWER: :math:`\int_{|z|>\varepsilon}|z|^p\nu(dz)`
    """

    SMALL_SQ = enum.auto()
    MID_ABS = enum.auto()
    TAIL_MASS = enum.auto()
    TAIL_LOG = enum.auto()
    TAIL_POWER = enum.auto()


class IntegrationMethod(Enum):
    """Evaluation method of moment integrals."""

    AUTO = enum.auto()
    CLOSED_FORM = enum.auto()
    QUADRATURE = enum.auto()


@dataclass(frozen=True)
class Estimate:
    """Value with a standard error.

    Attributes
    ----------
    value : `float`
        point estimate
    stderr : `float`
        standard error, 0 for exact values
    """

    value: float
    stderr: float = 0.0


class JumpEntropyError(Exception):
    """Base class of the library errors."""


class DivergentIntegral(JumpEntropyError, ArithmeticError):
    """An integral against a Lévy measure is infinite."""


class InvalidRegion(JumpEntropyError, ValueError):
    """An integration region is empty or ill-defined."""


class EmptyTail(JumpEntropyError, ValueError):
    """A Lévy measure carries no mass above the requested cutoff."""


class ExplosionSuspected(JumpEntropyError, RuntimeError):
    """A simulated state left the overflow guard."""


class UnstableStep(JumpEntropyError, ValueError):
    """The time step violates the explicit Euler stability guard."""


class NotAdditiveNoise(JumpEntropyError, ValueError):
    """An operation requires state-independent noise coefficients."""


class NonPositiveInput(JumpEntropyError, ValueError):
    """A strictly positive argument was expected."""


class NoFiniteLimit(JumpEntropyError, ArithmeticError):
    """A long-time constant does not exist for the given parameters."""


class NotDissipativeEnough(JumpEntropyError, ValueError):
    """The dissipativity window does not yield exponential decay."""


class DegenerateDensity(JumpEntropyError, RuntimeError):
    """Importance weights are unstable because a density is close to zero."""


class InconclusiveLimit(JumpEntropyError, RuntimeError):
    """A limsup estimate on a finite grid is not trustworthy."""


class ConfigError(JumpEntropyError, ValueError):
    """An experiment configuration is invalid."""


def unit_sphere_area(dim: int) -> float:
    r"""Return the surface measure of the unit sphere :math:`S^{d-1}`.

    :math:`|S^{d-1}| = 2\pi^{d/2}/\Gamma(d/2)`, so 2 for d=1 and :math:`2\pi` for d=2.

    Parameters
    ----------
    dim : `int`
        dimension d of the ambient space

    Returns
    -------
    `float`
        surface measure

    Raises
    ------
    ValueError
        if dim is not positive
    """
    if dim < 1:
        msg = f"Dimension must be positive, got {dim}."
        raise ValueError(msg)
    return float(2 * math.pi ** (dim / 2) / special.gamma(dim / 2))


def uniform_directions(rng: Generator, size: int, dim: int) -> NDArray[np.float64]:
    r"""Sample directions uniformly on the unit sphere.

    Parameters
    ----------
    rng : `numpy.random.Generator`
        random-number generator
    size : `int`
        number of directions
    dim : `int`
        dimension d

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.float64`\]
        array of shape (size, dim)
    """
    if dim == 1:
        return rng.choice(np.asarray([-1.0, 1.0]), size=(size, 1))
    gauss = rng.standard_normal((size, dim))
    norms = np.linalg.norm(gauss, axis=1, keepdims=True)
    # redraw exact zeros
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        gauss[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(gauss, axis=1, keepdims=True)
    return np.asarray(gauss / norms, dtype=np.float64)


def combined_stderr(*stderrs: float) -> float:
    """Combine standard errors of independent estimates.

    Parameters
    ----------
    *stderrs : `float`
        standard errors

    Returns
    -------
    `float`
        square root of the sum of squares
    """
    return math.sqrt(sum(s * s for s in stderrs))
