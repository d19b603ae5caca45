r"""Euler simulation of jump SDEs.

This module provides:

- `CoefficientField`: Drift and noise coefficients with their dissipativity window.
- `DissipativityReport`: Result of a dissipativity spot-check.
- `ou_field`, `linear_field`, `power_drift_field`, `radial_drift_field`, `expanding_field`: Preset fields.
- `TrajectoryEnsemble`: Seeded batch of simulated paths.
- `simulate`: Euler scheme for :math:`dX = b(X)dt + \sigma_1(X)dW + \sigma_2(X_-)dL`.
- `CouplingStatistics`, `synchronous_coupling`: Distance of two solutions driven by the same noise.
- `StationarityDiagnostic`, `InvariantEnsemble`, `invariant_ensemble`: Samples approximating the invariant law.
- `JacobianCheck`, `flow_jacobian_check`: Frozen-noise flow Jacobian and its determinant and norm bounds.

Paths are simulated in blocks of `jumpentropy.rng.BLOCK_SIZE`; block ``b`` draws from
``stream(seed, b)``, so ensembles do not depend on the number of worker threads and two
runs with the same seed and path count share their noise.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Union

import numpy as np
from scipy import stats

from jumpentropy.common import ExplosionSuspected, NotAdditiveNoise, UnstableStep, uniform_directions
from jumpentropy.matrix import conjugated_jacobian, is_invertible, operator_norm
from jumpentropy.rng import BLOCK_SIZE, block_count, ensure_rng, stream
from jumpentropy.stochastic_kernels import (
    brownian_increment,
    jump_counts,
    levy_increment,
    sample_jump_above,
    small_jump_increment,
)

if TYPE_CHECKING:
    from collections.abc import Sequence
    from concurrent.futures import Executor

    from numpy.random import Generator
    from numpy.typing import ArrayLike, NDArray

    from jumpentropy.stochastic_kernels import NoiseIncrementPlan

logger = logging.getLogger(__name__)

OVERFLOW_GUARD = 1e150
DEFAULT_MAX_DT = 1e-3
KS_LEVEL = 1e-3
DIVERGENCE_RATIO = 2.0

VectorField = Callable[["NDArray[np.float64]"], "NDArray[np.float64]"]
MatrixCoefficient = Union["NDArray[np.float64]", VectorField, None]


@dataclass(frozen=True)
class DissipativityReport:
    r"""Result of a dissipativity spot-check.

    Attributes
    ----------
    min_ratio : `float`
        smallest observed :math:`\langle\sigma^{-1}\nabla b(x)\sigma v, v\rangle` over unit v
    max_ratio : `float`
        largest observed value
    holds : `bool`
        whether all values lie in :math:`[\lambda_1, \lambda_2]` up to the tolerance
    """

    min_ratio: float
    max_ratio: float
    holds: bool


class CoefficientField:
    r"""Coefficients of :math:`dX = b(X)dt + \sigma_1(X)dW + \sigma_2(X_-)dL`.

    The pure-jump equation :math:`dX = b(X)dt + \sigma dL` is the case ``sigma_const=sigma``.
    Callables are vectorized: the drift maps (n, d) to (n, d), matrix coefficients map
    (n, d) to (n, d, d).

    Parameters
    ----------
    drift : `collections.abc.Callable`
        vectorized drift b
    dim : `int`
        dimension d
    lambda1 : `float`
        lower dissipativity constant
    lambda2 : `float`
        upper dissipativity constant, at least ``lambda1``
    lipschitz_b : `float`
        Lipschitz constant of b, positive
    sigma_const : `numpy.typing.ArrayLike` | None, optional
        constant invertible jump coefficient
    sigma1 : array or callable or None, optional
        Brownian coefficient
    sigma2 : array or callable or None, optional
        jump coefficient, exclusive with ``sigma_const``
    drift_jacobian : `collections.abc.Callable` | None, optional
        Jacobian of b at a single point, by default central finite differences
    name : `str`, optional
        label used in artifacts, by default "custom"
    """

    def __init__(  # noqa: PLR0913
        self,
        drift: VectorField,
        dim: int,
        lambda1: float,
        lambda2: float,
        lipschitz_b: float,
        *,
        sigma_const: ArrayLike | None = None,
        sigma1: MatrixCoefficient = None,
        sigma2: MatrixCoefficient = None,
        drift_jacobian: Callable[[NDArray[np.float64]], NDArray[np.float64]] | None = None,
        name: str = "custom",
    ) -> None:
        if dim < 1:
            msg = f"Dimension must be positive, got {dim}."
            raise ValueError(msg)
        if lambda1 > lambda2:
            msg = f"Dissipativity window must satisfy lambda1 <= lambda2, got {lambda1}, {lambda2}."
            raise ValueError(msg)
        if not lipschitz_b > 0:
            msg = f"Lipschitz constant must be positive, got {lipschitz_b}."
            raise ValueError(msg)
        if sigma_const is not None and sigma2 is not None:
            msg = "Give either sigma_const or sigma2, not both."
            raise ValueError(msg)
        self.__drift = drift
        self.__dim = int(dim)
        self.__lambda1 = float(lambda1)
        self.__lambda2 = float(lambda2)
        self.__lipschitz_b = float(lipschitz_b)
        self.__sigma_const = None if sigma_const is None else self._as_matrix(sigma_const, "sigma_const")
        if self.__sigma_const is not None and not is_invertible(self.__sigma_const):
            msg = "sigma_const must be invertible."
            raise ValueError(msg)
        self.__sigma1 = sigma1 if sigma1 is None or callable(sigma1) else self._as_matrix(sigma1, "sigma1")
        self.__sigma2 = sigma2 if sigma2 is None or callable(sigma2) else self._as_matrix(sigma2, "sigma2")
        self.__drift_jacobian = drift_jacobian
        self.__name = name

    def _as_matrix(self, value: ArrayLike, label: str) -> NDArray[np.float64]:
        mat = np.atleast_2d(np.asarray(value, dtype=np.float64))
        if mat.shape != (self.__dim, self.__dim):
            msg = f"{label} must have shape ({self.__dim}, {self.__dim}), got {mat.shape}."
            raise ValueError(msg)
        return mat

    @property
    def dim(self) -> int:
        """Return the dimension."""
        return self.__dim

    @property
    def lambda1(self) -> float:
        """Return the lower dissipativity constant."""
        return self.__lambda1

    @property
    def lambda2(self) -> float:
        """Return the upper dissipativity constant."""
        return self.__lambda2

    @property
    def lipschitz_b(self) -> float:
        """Return the Lipschitz constant of the drift."""
        return self.__lipschitz_b

    @property
    def name(self) -> str:
        """Return the label of the field."""
        return self.__name

    @property
    def has_brownian(self) -> bool:
        """Return whether a Brownian coefficient is set."""
        return self.__sigma1 is not None

    @property
    def is_additive(self) -> bool:
        """Return whether all noise coefficients are state independent."""
        return not callable(self.__sigma1) and not callable(self.__sigma2)

    @property
    def sigma(self) -> NDArray[np.float64]:
        r"""Return the constant jump coefficient used to conjugate :math:`\nabla b`.

        Raises
        ------
        NotAdditiveNoise
            if the jump coefficient depends on the state
        """
        if self.__sigma_const is not None:
            return self.__sigma_const
        if callable(self.__sigma2):
            msg = "The jump coefficient depends on the state."
            raise NotAdditiveNoise(msg)
        if self.__sigma2 is not None:
            return self.__sigma2
        return np.eye(self.__dim)

    def drift(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        r"""Evaluate the drift.

        Parameters
        ----------
        x : `numpy.typing.NDArray`\[`numpy.float64`\]
            states of shape (n, d)

        Returns
        -------
        `numpy.typing.NDArray`\[`numpy.float64`\]
            drift values of shape (n, d)
        """
        return np.asarray(self.__drift(x), dtype=np.float64)

    def _matrix_at(self, coef: MatrixCoefficient, x: NDArray[np.float64]) -> NDArray[np.float64]:
        if coef is None:
            return np.zeros((x.shape[0], self.__dim, self.__dim))
        if callable(coef):
            return np.asarray(coef(x), dtype=np.float64)
        return np.broadcast_to(coef, (x.shape[0], self.__dim, self.__dim))

    def sigma1_at(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        r"""Return :math:`\sigma_1` at states of shape (n, d) as an (n, d, d) array."""
        return self._matrix_at(self.__sigma1, x)

    def sigma2_at(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        r"""Return the jump coefficient at states of shape (n, d) as an (n, d, d) array."""
        if self.__sigma_const is not None:
            return self._matrix_at(self.__sigma_const, x)
        if self.__sigma2 is None:
            return self._matrix_at(np.eye(self.__dim), x)
        return self._matrix_at(self.__sigma2, x)

    def apply_sigma1(self, x: NDArray[np.float64], dw: NDArray[np.float64]) -> NDArray[np.float64]:
        r"""Return :math:`\sigma_1(x)\,dw` row by row."""
        if self.__sigma1 is None:
            return np.zeros_like(x)
        if callable(self.__sigma1):
            return np.einsum("nij,nj->ni", self.sigma1_at(x), dw)
        return dw @ self.__sigma1.T

    def apply_sigma2(self, x: NDArray[np.float64], z: NDArray[np.float64]) -> NDArray[np.float64]:
        r"""Return :math:`\sigma_2(x)\,z` row by row."""
        if callable(self.__sigma2):
            return np.einsum("nij,nj->ni", self.sigma2_at(x), z)
        if self.__sigma_const is None and self.__sigma2 is None:
            return z
        return z @ self.sigma.T

    def jacobian(self, x: ArrayLike, h: float = 1e-5) -> NDArray[np.float64]:
        r"""Return :math:`\nabla b` at a single point.

        Parameters
        ----------
        x : `numpy.typing.ArrayLike`
            point of shape (d,)
        h : `float`, optional
            central finite-difference step, by default 1e-5

        Returns
        -------
        `numpy.typing.NDArray`\[`numpy.float64`\]
            matrix with entries :math:`\partial_j b_i(x)`
        """
        point = np.asarray(x, dtype=np.float64)
        if self.__drift_jacobian is not None:
            return np.asarray(self.__drift_jacobian(point), dtype=np.float64)
        shifts = h * np.eye(self.__dim)
        plus = self.drift(point[None, :] + shifts)
        minus = self.drift(point[None, :] - shifts)
        return np.asarray(((plus - minus) / (2 * h)).T, dtype=np.float64)

    def check_dissipativity(
        self,
        rng: Generator | None = None,
        n_points: int = 64,
        radius: float = 10.0,
        rtol: float = 1e-4,
    ) -> DissipativityReport:
        r"""Spot-check :math:`\lambda_1|v|^2 \le \langle\sigma^{-1}\nabla b(x)\sigma v, v\rangle \le \lambda_2|v|^2`.

        Parameters
        ----------
        rng : `numpy.random.Generator` | None, optional
            random-number generator, by default None
        n_points : `int`, optional
            number of sampled (x, v) pairs, by default 64
        radius : `float`, optional
            standard deviation of the sampled states, by default 10
        rtol : `float`, optional
            relative tolerance, by default 1e-4

        Returns
        -------
        `DissipativityReport`
            observed range and verdict
        """
        rng = ensure_rng(rng)
        sigma = self.sigma
        xs = radius * rng.standard_normal((n_points, self.__dim))
        vs = uniform_directions(rng, n_points, self.__dim)
        values = np.asarray(
            [float(v @ conjugated_jacobian(self.jacobian(x), sigma) @ v) for x, v in zip(xs, vs)],
        )
        lo, hi = float(values.min()), float(values.max())
        tol_lo = rtol * max(1.0, abs(self.__lambda1))
        tol_hi = rtol * max(1.0, abs(self.__lambda2))
        holds = lo >= self.__lambda1 - tol_lo and hi <= self.__lambda2 + tol_hi
        return DissipativityReport(lo, hi, holds)

    def to_dict(self) -> dict[str, object]:
        r"""Return a serializable description of the field.

        Returns
        -------
        `dict`\[`str`, `object`\]
            parameters of the field
        """

        def describe(coef: MatrixCoefficient) -> object:
            if coef is None:
                return None
            if callable(coef):
                return "callable"
            return np.asarray(coef).tolist()

        return {
            "name": self.__name,
            "dim": self.__dim,
            "lambda1": self.__lambda1,
            "lambda2": self.__lambda2,
            "lipschitz_b": self.__lipschitz_b,
            "sigma_const": describe(self.__sigma_const),
            "sigma1": describe(self.__sigma1),
            "sigma2": describe(self.__sigma2),
        }


def _conjugated_window(a: NDArray[np.float64], sigma: NDArray[np.float64]) -> tuple[float, float]:
    m = conjugated_jacobian(a, sigma)
    eig = np.linalg.eigvalsh((m + m.T) / 2)
    return float(eig.min()), float(eig.max())


def linear_field(
    a: ArrayLike,
    *,
    sigma: ArrayLike | None = None,
    sigma1: ArrayLike | None = None,
    name: str = "linear",
) -> CoefficientField:
    r"""Return the field :math:`b(x) = Ax` with an exact dissipativity window.

    Parameters
    ----------
    a : `numpy.typing.ArrayLike`
        drift matrix A
    sigma : `numpy.typing.ArrayLike` | None, optional
        constant jump coefficient, by default the identity
    sigma1 : `numpy.typing.ArrayLike` | None, optional
        constant Brownian coefficient
    name : `str`, optional
        label, by default "linear"

    Returns
    -------
    `CoefficientField`
        linear field
    """
    mat = np.atleast_2d(np.asarray(a, dtype=np.float64))
    dim = mat.shape[0]
    sig = np.eye(dim) if sigma is None else np.atleast_2d(np.asarray(sigma, dtype=np.float64))
    lam1, lam2 = _conjugated_window(mat, sig)
    return CoefficientField(
        lambda x: x @ mat.T,
        dim,
        lam1,
        lam2,
        max(operator_norm(mat), 1e-12),
        sigma_const=sig,
        sigma1=sigma1,
        drift_jacobian=lambda _: mat,
        name=name,
    )


def ou_field(dim: int = 1, *, sigma: ArrayLike | None = None, sigma1: ArrayLike | None = None) -> CoefficientField:
    r"""Return the Ornstein-Uhlenbeck field :math:`b(x) = -x`.

    Parameters
    ----------
    dim : `int`, optional
        dimension, by default 1
    sigma : `numpy.typing.ArrayLike` | None, optional
        constant jump coefficient, by default the identity
    sigma1 : `numpy.typing.ArrayLike` | None, optional
        constant Brownian coefficient

    Returns
    -------
    `CoefficientField`
        field with :math:`\lambda_1 = \lambda_2 = -1`
    """
    return linear_field(-np.eye(dim), sigma=sigma, sigma1=sigma1, name="ou")


def expanding_field(dim: int = 1) -> CoefficientField:
    r"""Return the field :math:`b(x) = x`, which has no invariant probability measure.

    Parameters
    ----------
    dim : `int`, optional
        dimension, by default 1

    Returns
    -------
    `CoefficientField`
        field with :math:`\lambda_1 = \lambda_2 = 1`
    """
    return linear_field(np.eye(dim), name="expanding")


def power_drift_field(theta: float, dim: int = 1, *, sigma2: ArrayLike | None = None) -> CoefficientField:
    r"""Return :math:`b(x) = -x(1+|x|^2)^{(\theta-1)/2}`, smooth and equal to :math:`-x|x|^{\theta-1}` at infinity.

    For :math:`\theta \le 1` the drift is globally 1-Lipschitz with window :math:`[-1, 0]`;
    for :math:`\theta > 1` the constants are those of the ball :math:`|x| \le 10`.

    Parameters
    ----------
    theta : `float`
        growth exponent, positive
    dim : `int`, optional
        dimension, by default 1
    sigma2 : `numpy.typing.ArrayLike` | None, optional
        constant jump coefficient, by default the identity

    Returns
    -------
    `CoefficientField`
        power drift field

    Raises
    ------
    ValueError
        if theta is not positive
    """
    if not theta > 0:
        msg = f"Growth exponent must be positive, got {theta}."
        raise ValueError(msg)

    def drift(x: NDArray[np.float64]) -> NDArray[np.float64]:
        sq = np.sum(x * x, axis=-1, keepdims=True)
        return -x * (1.0 + sq) ** ((theta - 1) / 2)

    def jac(x: NDArray[np.float64]) -> NDArray[np.float64]:
        sq = float(x @ x)
        base = (1.0 + sq) ** ((theta - 1) / 2)
        return -base * np.eye(dim) - (theta - 1) * (1.0 + sq) ** ((theta - 3) / 2) * np.outer(x, x)

    if theta <= 1:
        lam1, lam2, lip = -1.0, 0.0, 1.0
    else:
        big = (1.0 + 100.0) ** ((theta - 1) / 2)
        lam1, lam2, lip = -theta * big, -1.0, theta * big
    return CoefficientField(
        drift, dim, lam1, lam2, lip, sigma2=sigma2, drift_jacobian=jac, name=f"power-drift({theta:g})"
    )


def radial_drift_field(radii: ArrayLike, speeds: ArrayLike, dim: int = 1) -> CoefficientField:
    r"""Return the radial field :math:`b(x) = -g(|x|)x/|x|` with g tabulated.

    g is interpolated linearly, continued linearly beyond the last node with the last
    slope, and forced to :math:`g(0) = 0`.

    Parameters
    ----------
    radii : `numpy.typing.ArrayLike`
        strictly increasing positive radii
    speeds : `numpy.typing.ArrayLike`
        non-negative radial speeds g at the radii
    dim : `int`, optional
        dimension, by default 1

    Returns
    -------
    `CoefficientField`
        radial field with window and Lipschitz constant read off the table

    Raises
    ------
    ValueError
        if the table is malformed
    """
    r = np.concatenate([[0.0], np.asarray(radii, dtype=np.float64)])
    g = np.concatenate([[0.0], np.asarray(speeds, dtype=np.float64)])
    if r.size < 3 or np.any(np.diff(r) <= 0) or np.any(g < 0):  # noqa: PLR2004
        msg = "Radial drift table needs increasing positive radii and non-negative speeds."
        raise ValueError(msg)
    slopes = np.diff(g) / np.diff(r)
    last_slope = float(slopes[-1])

    def speed(rad: NDArray[np.float64]) -> NDArray[np.float64]:
        inner = np.interp(rad, r, g)
        return np.where(rad > r[-1], g[-1] + last_slope * (rad - r[-1]), inner)

    def drift(x: NDArray[np.float64]) -> NDArray[np.float64]:
        rad = np.linalg.norm(x, axis=-1, keepdims=True)
        safe = np.where(rad > 0, rad, 1.0)
        return -speed(rad) * x / safe

    ratios = g[1:] / r[1:]
    lip = float(max(np.abs(slopes).max(), ratios.max(), 1e-12))
    lam2 = -float(min(slopes.min(), ratios.min()))
    lam1 = -float(max(slopes.max(), ratios.max()))
    return CoefficientField(drift, dim, lam1, lam2, lip, name="radial-drift")


@dataclass(frozen=True)
class TrajectoryEnsemble:
    r"""Seeded batch of simulated paths.

    Attributes
    ----------
    terminal : `numpy.typing.NDArray`\[`numpy.float64`\]
        terminal states of shape (n_paths, d)
    checkpoint_times : `numpy.typing.NDArray`\[`numpy.float64`\]
        checkpoint times of shape (k,)
    checkpoint_states : `numpy.typing.NDArray`\[`numpy.float64`\]
        states of shape (k, n_paths, d)
    seed : `int`
        batch seed
    n_paths : `int`
        number of paths
    dt : `float`
        step size actually used
    scheme : `str`
        scheme identifier
    """

    terminal: NDArray[np.float64]
    checkpoint_times: NDArray[np.float64]
    checkpoint_states: NDArray[np.float64]
    seed: int
    n_paths: int
    dt: float
    scheme: str
    metadata: dict[str, object] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        """Return the dimension of the states."""
        return int(self.terminal.shape[1])

    def states_at(self, time: float) -> NDArray[np.float64]:
        r"""Return the states at a checkpoint time.

        Parameters
        ----------
        time : `float`
            checkpoint time

        Returns
        -------
        `numpy.typing.NDArray`\[`numpy.float64`\]
            states of shape (n_paths, d)

        Raises
        ------
        KeyError
            if ``time`` is not a checkpoint
        """
        hits = np.flatnonzero(np.isclose(self.checkpoint_times, time, rtol=1e-9, atol=1e-12))
        if hits.size == 0:
            msg = f"No checkpoint at time {time}."
            raise KeyError(msg)
        return self.checkpoint_states[hits[0]]


def _scheme_name(plan: NoiseIncrementPlan | None) -> str:
    if plan is None:
        return "euler-deterministic"
    return f"euler-{plan.small_jump_mode.name.lower().replace('_', '-')}"


def _euler_block(  # noqa: PLR0913
    coeffs: CoefficientField,
    plan: NoiseIncrementPlan | None,
    x: NDArray[np.float64],
    n_steps: int,
    dt: float,
    rng: Generator,
    record: dict[int, list[int]],
    out: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Advance one block of paths; fill ``out[k]`` at the steps listed in ``record``."""
    n, dim = x.shape
    additive = coeffs.is_additive
    for k in record.get(0, []):
        out[k] = x
    for step in range(1, n_steps + 1):
        increment = coeffs.drift(x) * dt
        if plan is not None:
            if plan.brownian:
                increment += coeffs.apply_sigma1(x, brownian_increment(dt, dim, rng, n))
            if additive:
                increment += coeffs.apply_sigma2(x, levy_increment(plan, dt, rng, n))
                x = x + increment
            else:
                increment += coeffs.apply_sigma2(x, small_jump_increment(plan, dt, rng, n))
                x = x + increment
                x = _apply_large_jumps(coeffs, plan, x, dt, rng)
        else:
            x = x + increment
        if not np.all(np.isfinite(x)) or np.max(np.abs(x), initial=0.0) > OVERFLOW_GUARD:
            msg = f"State left the overflow guard {OVERFLOW_GUARD:g} at step {step} (t={step * dt:g})."
            raise ExplosionSuspected(msg)
        for k in record.get(step, []):
            out[k] = x
    return x


def _apply_large_jumps(
    coeffs: CoefficientField,
    plan: NoiseIncrementPlan,
    x: NDArray[np.float64],
    dt: float,
    rng: Generator,
) -> NDArray[np.float64]:
    """Apply the arrivals of one step one after another, feeding the pre-jump state to sigma2."""
    counts = jump_counts(plan, dt, rng, x.shape[0])
    total = int(counts.sum())
    if total == 0:
        return x
    jumps = sample_jump_above(plan.measure, plan.cutoff, rng, size=total)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    x = x.copy()
    for j in range(int(counts.max())):
        rows = np.flatnonzero(counts > j)
        x[rows] = x[rows] + coeffs.apply_sigma2(x[rows], jumps[offsets[rows] + j])
    return x


def default_dt(coeffs: CoefficientField) -> float:
    r"""Return :math:`\min(10^{-3}, 1/(10 L_b))`.

    Parameters
    ----------
    coeffs : `CoefficientField`
        coefficient field

    Returns
    -------
    `float`
        default step size
    """
    return min(DEFAULT_MAX_DT, 1.0 / (10.0 * coeffs.lipschitz_b))


def simulate(  # noqa: PLR0913, PLR0917
    coeffs: CoefficientField,
    plan: NoiseIncrementPlan | None,
    x0: ArrayLike,
    T: float,  # noqa: N803
    dt: float | None = None,
    n_paths: int = 1,
    seed: int = 0,
    *,
    checkpoints: Sequence[float] | None = None,
    executor: Executor | None = None,
    stream_offset: int = 0,
) -> TrajectoryEnsemble:
    r"""Simulate paths with the Euler scheme.

    Each step adds the drift, the Brownian increment and the small-jump increment
    evaluated at the current state, then applies the arrivals above the cutoff of that
    step one after another with :math:`\sigma_2` evaluated at the pre-jump state.
    For additive noise the whole Lévy increment of a step is added at once; in
    exact-stable mode it is sampled exactly.

    Parameters
    ----------
    coeffs : `CoefficientField`
        coefficients
    plan : `NoiseIncrementPlan` | None
        noise plan, `None` for the deterministic flow
    x0 : `numpy.typing.ArrayLike`
        initial state of shape (d,) or initial ensemble of shape (n_paths, d)
    T : `float`
        horizon, positive
    dt : `float` | None, optional
        step size, by default `default_dt`; shrunk so that T/dt is an integer
    n_paths : `int`, optional
        number of paths, by default 1
    seed : `int`, optional
        batch seed, by default 0
    checkpoints : `collections.abc.Sequence`\[`float`\] | None, optional
        times in [0, T] at which states are recorded, snapped to the step grid
    executor : `concurrent.futures.Executor` | None, optional
        pool running the path blocks, by default sequential
    stream_offset : `int`, optional
        index of the first block stream, by default 0; disjoint offsets give independent noise

    Returns
    -------
    `TrajectoryEnsemble`
        simulated ensemble

    Raises
    ------
    UnstableStep
        if dt > 1/(2 lipschitz_b)
    ExplosionSuspected
        if a state leaves the overflow guard
    ValueError
        if the arguments are inconsistent
    """
    if not T > 0:
        msg = f"Horizon must be positive, got {T}."
        raise ValueError(msg)
    if n_paths < 0:
        msg = f"Number of paths must be non-negative, got {n_paths}."
        raise ValueError(msg)
    step = default_dt(coeffs) if dt is None else float(dt)
    if not step > 0:
        msg = f"Step size must be positive, got {step}."
        raise ValueError(msg)
    if step > 1.0 / (2.0 * coeffs.lipschitz_b):
        msg = f"Step size {step:g} exceeds the stability guard 1/(2 L) = {1.0 / (2.0 * coeffs.lipschitz_b):g}."
        raise UnstableStep(msg)
    if plan is not None and plan.dim != coeffs.dim:
        msg = f"Noise dimension {plan.dim} does not match coefficient dimension {coeffs.dim}."
        raise ValueError(msg)
    # integrated step <= requested step
    n_steps = max(1, math.ceil(T / step * (1.0 - 1e-12)))
    step = T / n_steps

    start = np.asarray(x0, dtype=np.float64)
    if start.ndim == 1:
        start = np.broadcast_to(start, (n_paths, coeffs.dim))
    if start.shape != (n_paths, coeffs.dim):
        msg = f"Initial states must have shape ({coeffs.dim},) or ({n_paths}, {coeffs.dim}), got {start.shape}."
        raise ValueError(msg)

    times = np.asarray([] if checkpoints is None else sorted(checkpoints), dtype=np.float64)
    if times.size and (times[0] < 0 or times[-1] > T * (1 + 1e-12)):
        msg = "Checkpoints must lie in [0, T]."
        raise ValueError(msg)
    record: dict[int, list[int]] = {}
    for k, t in enumerate(times):
        record.setdefault(round(t / step), []).append(k)
    times = np.asarray([round(t / step) * step for t in times], dtype=np.float64)

    n_blocks = block_count(n_paths)
    terminal = np.empty((n_paths, coeffs.dim), dtype=np.float64)
    states = np.empty((times.size, n_paths, coeffs.dim), dtype=np.float64)

    def run_block(b: int) -> None:
        lo, hi = b * BLOCK_SIZE, min((b + 1) * BLOCK_SIZE, n_paths)
        out = np.empty((times.size, hi - lo, coeffs.dim), dtype=np.float64)
        rng = stream(seed, stream_offset + b)
        terminal[lo:hi] = _euler_block(coeffs, plan, start[lo:hi].copy(), n_steps, step, rng, record, out)
        states[:, lo:hi] = out

    logger.debug("simulate: %d paths in %d blocks, %d steps of %g", n_paths, n_blocks, n_steps, step)
    if executor is None:
        for b in range(n_blocks):
            run_block(b)
    else:
        # list() re-raises worker exceptions
        list(executor.map(run_block, range(n_blocks)))

    metadata: dict[str, object] = {"coefficients": coeffs.to_dict(), "T": T}
    if plan is not None:
        metadata["plan"] = plan.to_dict()
    return TrajectoryEnsemble(terminal, times, states, seed, n_paths, step, _scheme_name(plan), metadata)


@dataclass(frozen=True)
class CouplingStatistics:
    r"""Distances :math:`|X_t(x)-X_t(y)|` under synchronous coupling.

    Attributes
    ----------
    times : `numpy.typing.NDArray`\[`numpy.float64`\]
        checkpoint times
    max_distance : `numpy.typing.NDArray`\[`numpy.float64`\]
        maximum over paths at each time
    mean_distance : `numpy.typing.NDArray`\[`numpy.float64`\]
        mean over paths at each time
    bound : `numpy.typing.NDArray`\[`numpy.float64`\]
        :math:`|x-y|e^{\lambda_2 t}(1+10\,dt\,L_b)`
    """

    times: NDArray[np.float64]
    max_distance: NDArray[np.float64]
    mean_distance: NDArray[np.float64]
    bound: NDArray[np.float64]

    @property
    def holds(self) -> bool:
        """Return whether every maximum distance respects the bound."""
        return bool(np.all(self.max_distance <= self.bound))


def synchronous_coupling(  # noqa: PLR0913, PLR0917
    coeffs: CoefficientField,
    plan: NoiseIncrementPlan | None,
    x: ArrayLike,
    y: ArrayLike,
    T: float,  # noqa: N803
    dt: float | None = None,
    n_paths: int = 1,
    seed: int = 0,
    *,
    n_checkpoints: int = 10,
    executor: Executor | None = None,
) -> CouplingStatistics:
    r"""Drive solutions from x and y with identical noise and record their distance.

    Parameters
    ----------
    coeffs : `CoefficientField`
        coefficients with additive noise
    plan : `NoiseIncrementPlan` | None
        noise plan
    x : `numpy.typing.ArrayLike`
        first initial state
    y : `numpy.typing.ArrayLike`
        second initial state
    T : `float`
        horizon
    dt : `float` | None, optional
        step size, by default `default_dt`
    n_paths : `int`, optional
        number of coupled pairs, by default 1
    seed : `int`, optional
        batch seed, by default 0
    n_checkpoints : `int`, optional
        number of equally spaced checkpoints in (0, T], by default 10
    executor : `concurrent.futures.Executor` | None, optional
        pool running the path blocks

    Returns
    -------
    `CouplingStatistics`
        distance statistics and the contraction bound

    Raises
    ------
    NotAdditiveNoise
        if a noise coefficient depends on the state
    """
    if not coeffs.is_additive:
        msg = "Synchronous coupling needs state-independent noise coefficients."
        raise NotAdditiveNoise(msg)
    times = np.linspace(T / n_checkpoints, T, n_checkpoints)
    ex = simulate(coeffs, plan, x, T, dt, n_paths, seed, checkpoints=times, executor=executor)
    ey = simulate(coeffs, plan, y, T, dt, n_paths, seed, checkpoints=times, executor=executor)
    dist = np.linalg.norm(ex.checkpoint_states - ey.checkpoint_states, axis=2)
    gap = float(np.linalg.norm(np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)))
    tol = 10.0 * ex.dt * coeffs.lipschitz_b
    bound = gap * np.exp(coeffs.lambda2 * ex.checkpoint_times) * (1.0 + tol)
    max_d = dist.max(axis=1) if n_paths else np.zeros(times.size)
    mean_d = dist.mean(axis=1) if n_paths else np.zeros(times.size)
    return CouplingStatistics(ex.checkpoint_times, max_d, mean_d, bound)


@dataclass(frozen=True)
class StationarityDiagnostic:
    r"""Convergence diagnostic of an invariant ensemble.

    Attributes
    ----------
    ks_statistic : `float`
        two-sample KS distance of the radii at the burn-in and at twice the burn-in
    p_value : `float`
        p-value of the KS test
    growth_ratio : `float`
        ratio of the median radii at twice the burn-in and at the burn-in
    stationary : `bool`
        whether the KS test passes at level 0.001 without radial growth
    """

    ks_statistic: float
    p_value: float
    growth_ratio: float
    stationary: bool

    @property
    def diverging(self) -> bool:
        """Return whether the radii keep growing."""
        return self.growth_ratio > DIVERGENCE_RATIO


@dataclass(frozen=True)
class InvariantEnsemble:
    r"""Samples approximating the invariant probability measure.

    Attributes
    ----------
    samples : `numpy.typing.NDArray`\[`numpy.float64`\]
        states of shape (n_samples, d) at the burn-in time
    burn_in : `float`
        burn-in time
    diagnostic : `StationarityDiagnostic`
        convergence diagnostic
    ensemble : `TrajectoryEnsemble`
        the extended run
    """

    samples: NDArray[np.float64]
    burn_in: float
    diagnostic: StationarityDiagnostic
    ensemble: TrajectoryEnsemble


def invariant_ensemble(  # noqa: PLR0913
    coeffs: CoefficientField,
    plan: NoiseIncrementPlan | None,
    burn_in: float | None = None,
    n_samples: int = 10_000,
    seed: int = 0,
    *,
    x0: ArrayLike | None = None,
    dt: float | None = None,
    executor: Executor | None = None,
) -> InvariantEnsemble:
    r"""Sample the invariant law by running independent paths for a burn-in time.

    The run is extended to twice the burn-in; the radii at both times are compared by a
    two-sample KS test.

    Parameters
    ----------
    coeffs : `CoefficientField`
        coefficients, preferably with :math:`\lambda_2 < 0`
    plan : `NoiseIncrementPlan` | None
        noise plan
    burn_in : `float` | None, optional
        burn-in time, by default :math:`10/|\lambda_2|`
    n_samples : `int`, optional
        number of samples, by default 10000
    seed : `int`, optional
        batch seed, by default 0
    x0 : `numpy.typing.ArrayLike` | None, optional
        initial state, by default the origin
    dt : `float` | None, optional
        step size, by default `default_dt`
    executor : `concurrent.futures.Executor` | None, optional
        pool running the path blocks

    Returns
    -------
    `InvariantEnsemble`
        samples with their diagnostic

    Raises
    ------
    ExplosionSuspected
        if a state leaves the overflow guard
    """
    if coeffs.lambda2 >= 0:
        message = f"lambda2 = {coeffs.lambda2} >= 0: an invariant measure is not guaranteed."
        logger.warning(message)
        warnings.warn(message, RuntimeWarning, stacklevel=2)
    if burn_in is None:
        burn_in = 10.0 / abs(coeffs.lambda2) if coeffs.lambda2 != 0 else 10.0
    start = np.zeros(coeffs.dim) if x0 is None else np.asarray(x0, dtype=np.float64)
    ens = simulate(
        coeffs, plan, start, 2 * burn_in, dt, n_samples, seed, checkpoints=[burn_in, 2 * burn_in], executor=executor
    )
    first, second = ens.checkpoint_states[0], ens.checkpoint_states[1]
    r1 = np.linalg.norm(first, axis=1)
    r2 = np.linalg.norm(second, axis=1)
    if n_samples:
        ks = stats.ks_2samp(r1, r2)
        stat, p_value = float(ks.statistic), float(ks.pvalue)
        growth = float(np.median(r2) / max(float(np.median(r1)), 1e-300))
    else:
        stat, p_value, growth = 0.0, 1.0, 1.0
    diag = StationarityDiagnostic(stat, p_value, growth, p_value > KS_LEVEL and growth <= DIVERGENCE_RATIO)
    logger.info("invariant ensemble: KS=%.4g p=%.4g growth=%.4g", stat, p_value, growth)
    return InvariantEnsemble(first, float(ens.checkpoint_times[0]), diag, ens)


@dataclass(frozen=True)
class JacobianCheck:
    r"""Frozen-noise flow Jacobian with its determinant and norm bounds.

    Attributes
    ----------
    jacobian : `numpy.typing.NDArray`\[`numpy.float64`\]
        central finite-difference Jacobian of :math:`x \mapsto X_T(x)`
    determinant : `float`
        its determinant
    norm : `float`
        operator norm of :math:`\sigma^{-1}J\sigma`
    det_bounds : `tuple`\[`float`, `float`\]
        :math:`(e^{\lambda_1\tau d}, e^{\lambda_2\tau d})` with :math:`\tau = T-s`
    norm_bound : `float`
        :math:`e^{\lambda_2\tau}`
    tolerance : `float`
        multiplicative tolerance :math:`1+10\,dt\,L_b+10h`
    det_ok : `bool`
        whether the determinant lies within the tolerated bounds
    norm_ok : `bool`
        whether the norm lies below the tolerated bound
    """

    jacobian: NDArray[np.float64]
    determinant: float
    norm: float
    det_bounds: tuple[float, float]
    norm_bound: float
    tolerance: float
    det_ok: bool
    norm_ok: bool


def flow_jacobian_check(  # noqa: PLR0913, PLR0917
    coeffs: CoefficientField,
    plan: NoiseIncrementPlan | None,
    x: ArrayLike,
    s: float,
    T: float,  # noqa: N803
    dt: float | None = None,
    seed: int = 0,
    h: float = 1e-4,
) -> JacobianCheck:
    r"""Differentiate the flow on [s, T] under frozen noise and check its bounds.

    The 2d+1 runs from x and :math:`x \pm h e_i` share one noise path.

    Parameters
    ----------
    coeffs : `CoefficientField`
        coefficients with additive noise
    plan : `NoiseIncrementPlan` | None
        noise plan
    x : `numpy.typing.ArrayLike`
        starting point at time s
    s : `float`
        start time
    T : `float`
        end time, at least s
    dt : `float` | None, optional
        step size, by default `default_dt`
    seed : `int`, optional
        noise seed, by default 0
    h : `float`, optional
        finite-difference step, by default 1e-4

    Returns
    -------
    `JacobianCheck`
        Jacobian, determinant, norm and flags

    Raises
    ------
    NotAdditiveNoise
        if a noise coefficient depends on the state
    ValueError
        if T < s
    """
    if not coeffs.is_additive:
        msg = "Flow Jacobians are only available for state-independent noise coefficients."
        raise NotAdditiveNoise(msg)
    if T < s:
        msg = f"End time {T} precedes start time {s}."
        raise ValueError(msg)
    point = np.asarray(x, dtype=np.float64)
    dim = coeffs.dim
    tau = T - s
    if tau == 0:
        jac = np.eye(dim)
        used_dt = 0.0
    else:
        starts = np.concatenate([point[None, :], point + h * np.eye(dim), point - h * np.eye(dim)])
        ends = np.empty_like(starts)
        used_dt = 0.0
        for i, start in enumerate(starts):
            ens = simulate(coeffs, plan, start, tau, dt, 1, seed)
            ends[i] = ens.terminal[0]
            used_dt = ens.dt
        jac = ((ends[1 : dim + 1] - ends[dim + 1 :]) / (2 * h)).T
    det = float(np.linalg.det(jac))
    norm = operator_norm(conjugated_jacobian(jac, coeffs.sigma))
    tol = 1.0 + 10.0 * used_dt * coeffs.lipschitz_b + 10.0 * h
    lo = math.exp(coeffs.lambda1 * tau * dim)
    hi = math.exp(coeffs.lambda2 * tau * dim)
    norm_bound = math.exp(coeffs.lambda2 * tau)
    det_ok = lo / tol <= det <= hi * tol
    norm_ok = norm <= norm_bound * tol
    return JacobianCheck(jac, det, norm, (lo, hi), norm_bound, tol, det_ok, norm_ok)
