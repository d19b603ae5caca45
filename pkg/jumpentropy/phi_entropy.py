r"""Φ-entropy, jump energy and entropy bounds.

This module provides:

- `PhiSpec`: Abstract convex function :math:`\Phi` with its derivatives and Bregman remainder.
- `XLogXPhi`, `PowerPhi`: :math:`u\log u` and :math:`u^p` for :math:`p \in [1, 2]`.
- `parse_phi`: Build a `PhiSpec` from its name.
- `psi`: Bregman remainder :math:`\Psi_\Phi(u, v)`.
- `TestFunction`: Bounded positive function with optional derivatives.
- `shifted_tanh`, `inverse_quadratic`, `cosine_bump`, `constant_function`: Named test functions.
- `gamma_phi`: Jump energy :math:`\Gamma_{\Phi,\nu}(f)(x)` at one point.
- `generator_apply`: Generator applied to a test function at one point.
- `radial_rule`: Fixed quadrature rule for radial integrals against a Lévy measure.
- `gamma_values`, `mean_gamma`: Jump energy over a batch of states.
- `generator_values`, `generator_residual`: Generator over a batch of states.
- `semigroup_entropy`, `invariant_entropy`: Plug-in Φ-entropy estimators.
- `bound_constant`, `decay_rate`: Constants of the entropy inequality and of the entropy decay.
- `EntropyBoundCheck`, `check_entropy_bound`: Compare the entropy with its bound along an ensemble.
- `DecayCurve`, `entropy_decay_curve`: Entropy of :math:`P_t f` under the invariant law.
- `dirichlet_form_gap`: Difference of :math:`\mathcal{E}(\Phi'(f), f)` and :math:`\mu(\Gamma_{\Phi,\nu}(f))`.
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

from jumpentropy.common import (
    Estimate,
    NoFiniteLimit,
    NonPositiveInput,
    NotDissipativeEnough,
    uniform_directions,
)
from jumpentropy.levy_measure import EXPONENT_ATOL, radial_integral, sample_jump_above, small_sq, tail_mass
from jumpentropy.rng import block_count, ensure_rng
from jumpentropy.sde_engine import TrajectoryEnsemble, invariant_ensemble, simulate

if TYPE_CHECKING:
    from collections.abc import Sequence
    from concurrent.futures import Executor

    from numpy.random import Generator
    from numpy.typing import ArrayLike, NDArray

    from jumpentropy.levy_measure import RadialLevyMeasure
    from jumpentropy.sde_engine import CoefficientField
    from jumpentropy.stochastic_kernels import NoiseIncrementPlan

logger = logging.getLogger(__name__)

DEFAULT_INNER_RADIUS = 1e-3
# directions on the circle for d = 2
CIRCLE_NODES = 64
# evaluations per chunk in batched rules
_CHUNK = 1 << 21

ScalarField = Callable[["NDArray[np.float64]"], "NDArray[np.float64]"]


class PhiSpec(ABC):
    r"""Convex :math:`\Phi \in C([0,\infty)) \cap C^2((0,\infty))` with :math:`\Phi(0) = 0`."""

    @property
    @abc.abstractmethod
    def name(self) -> str:
        """Return the name parsed by `parse_phi`.

        Returns
        -------
        `str`
            name
        """
        raise NotImplementedError

    @property
    def requires_positive(self) -> bool:
        r"""Return whether :math:`\Phi'` is singular at 0, so test functions must stay away from 0."""
        return False

    @abc.abstractmethod
    def __call__(self, u: ArrayLike) -> NDArray[np.float64]:
        r"""Evaluate :math:`\Phi`."""
        raise NotImplementedError

    @abc.abstractmethod
    def derivative(self, u: ArrayLike) -> NDArray[np.float64]:
        r"""Evaluate :math:`\Phi'` on :math:`(0, \infty)`."""
        raise NotImplementedError

    @abc.abstractmethod
    def second_derivative(self, u: ArrayLike) -> NDArray[np.float64]:
        r"""Evaluate :math:`\Phi''` on :math:`(0, \infty)`."""
        raise NotImplementedError

    def remainder(self, u: ArrayLike, v: ArrayLike) -> NDArray[np.float64]:
        r"""Return :math:`\Phi(u) - \Phi(v) - \Phi'(v)(u - v)` without argument checks.

        Parameters
        ----------
        u : `numpy.typing.ArrayLike`
            non-negative values
        v : `numpy.typing.ArrayLike`
            positive values

        Returns
        -------
        `numpy.typing.NDArray`\[`numpy.float64`\]
            remainder values
        """
        uu = np.asarray(u, dtype=np.float64)
        vv = np.asarray(v, dtype=np.float64)
        return np.asarray(self(uu) - self(vv) - self.derivative(vv) * (uu - vv), dtype=np.float64)

    def to_dict(self) -> dict[str, object]:
        r"""Return a serializable description.

        Returns
        -------
        `dict`\[`str`, `object`\]
            description
        """
        return {"phi": self.name}


class XLogXPhi(PhiSpec):
    r""":math:`\Phi(u) = u\log u`, the Boltzmann entropy."""

    @property
    @typing_extensions.override
    def name(self) -> str:
        return "xlogx"

    @property
    @typing_extensions.override
    def requires_positive(self) -> bool:
        return True

    @typing_extensions.override
    def __call__(self, u: ArrayLike) -> NDArray[np.float64]:
        uu = np.asarray(u, dtype=np.float64)
        safe = np.where(uu > 0, uu, 1.0)
        return np.where(uu > 0, uu * np.log(safe), 0.0)

    @typing_extensions.override
    def derivative(self, u: ArrayLike) -> NDArray[np.float64]:
        return np.log(np.asarray(u, dtype=np.float64)) + 1.0

    @typing_extensions.override
    def second_derivative(self, u: ArrayLike) -> NDArray[np.float64]:
        return 1.0 / np.asarray(u, dtype=np.float64)

    @typing_extensions.override
    def remainder(self, u: ArrayLike, v: ArrayLike) -> NDArray[np.float64]:
        uu = np.asarray(u, dtype=np.float64)
        vv = np.asarray(v, dtype=np.float64)
        safe = np.where(uu > 0, uu, 1.0)
        return np.where(uu > 0, uu * np.log(safe / vv), 0.0) - (uu - vv)


class PowerPhi(PhiSpec):
    r""":math:`\Phi(u) = u^p` with :math:`p \in [1, 2]`; p = 2 gives the variance.

    Parameters
    ----------
    p : `float`
        exponent in [1, 2]
    """

    def __init__(self, p: float) -> None:
        if not 1 <= p <= 2:  # noqa: PLR2004
            msg = f"Power exponent must lie in [1, 2], got {p}."
            raise ValueError(msg)
        self.__p = float(p)

    @property
    def p(self) -> float:
        """Return the exponent."""
        return self.__p

    @property
    @typing_extensions.override
    def name(self) -> str:
        return f"power:{self.__p:g}"

    @typing_extensions.override
    def __call__(self, u: ArrayLike) -> NDArray[np.float64]:
        return np.asarray(np.asarray(u, dtype=np.float64) ** self.__p, dtype=np.float64)

    @typing_extensions.override
    def derivative(self, u: ArrayLike) -> NDArray[np.float64]:
        return np.asarray(self.__p * np.asarray(u, dtype=np.float64) ** (self.__p - 1), dtype=np.float64)

    @typing_extensions.override
    def second_derivative(self, u: ArrayLike) -> NDArray[np.float64]:
        p = self.__p
        return np.asarray(p * (p - 1) * np.asarray(u, dtype=np.float64) ** (p - 2), dtype=np.float64)

    @typing_extensions.override
    def remainder(self, u: ArrayLike, v: ArrayLike) -> NDArray[np.float64]:
        if self.__p == 2:  # noqa: PLR2004
            diff = np.asarray(u, dtype=np.float64) - np.asarray(v, dtype=np.float64)
            return diff * diff
        return super().remainder(u, v)


def parse_phi(text: str) -> PhiSpec:
    """Build a `PhiSpec` from ``"xlogx"``, ``"power:p"`` or ``"power(p)"``.

    Parameters
    ----------
    text : `str`
        name

    Returns
    -------
    `PhiSpec`
        parsed function

    Raises
    ------
    ValueError
        if the name is not recognized
    """
    name = text.strip().lower()
    if name == "xlogx":
        return XLogXPhi()
    for prefix, suffix in (("power:", ""), ("power(", ")")):
        if name.startswith(prefix) and name.endswith(suffix):
            body = name[len(prefix) : len(name) - len(suffix)]
            try:
                return PowerPhi(float(body))
            except ValueError as e:
                msg = f"Invalid power in {text!r}."
                raise ValueError(msg) from e
    msg = f"Unknown Phi {text!r}; expected 'xlogx' or 'power:p'."
    raise ValueError(msg)


def psi(phi: PhiSpec, u: ArrayLike, v: ArrayLike) -> NDArray[np.float64]:
    r"""Return :math:`\Psi_\Phi(u, v) = \Phi(u) - \Phi(v) - \Phi'(v)(u - v)`.

    Parameters
    ----------
    phi : `PhiSpec`
        convex function
    u : `numpy.typing.ArrayLike`
        non-negative values
    v : `numpy.typing.ArrayLike`
        positive values

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.float64`\]
        non-negative remainders

    Raises
    ------
    NonPositiveInput
        if some v is not positive or some u is negative
    """
    uu = np.asarray(u, dtype=np.float64)
    vv = np.asarray(v, dtype=np.float64)
    if np.any(vv <= 0) or np.any(uu < 0):
        msg = "Psi needs u >= 0 and v > 0."
        raise NonPositiveInput(msg)
    return phi.remainder(uu, vv)


class TestFunction:
    r"""Bounded function :math:`f: \mathbb{R}^d \to [m, M]` with optional derivatives.

    Callables are vectorized over rows: ``func`` maps (n, d) to (n,), ``gradient`` to
    (n, d) and ``hessian`` to (n, d, d). Missing derivatives use central differences.

    Parameters
    ----------
    func : `collections.abc.Callable`
        function values
    dim : `int`
        dimension
    lower : `float`
        claimed infimum, non-negative
    upper : `float`
        claimed supremum
    gradient : `collections.abc.Callable` | None, optional
        gradient
    hessian : `collections.abc.Callable` | None, optional
        Hessian
    name : `str`, optional
        label, by default "custom"
    """

    __test__ = False

    def __init__(  # noqa: PLR0913
        self,
        func: ScalarField,
        dim: int,
        lower: float,
        upper: float,
        *,
        gradient: ScalarField | None = None,
        hessian: ScalarField | None = None,
        name: str = "custom",
    ) -> None:
        if not 0 <= lower <= upper < math.inf:
            msg = f"Bounds must satisfy 0 <= lower <= upper < inf, got {lower}, {upper}."
            raise ValueError(msg)
        self.__func = func
        self.__dim = int(dim)
        self.__lower = float(lower)
        self.__upper = float(upper)
        self.__gradient = gradient
        self.__hessian = hessian
        self.__name = name

    @property
    def dim(self) -> int:
        """Return the dimension."""
        return self.__dim

    @property
    def lower(self) -> float:
        """Return the claimed infimum."""
        return self.__lower

    @property
    def upper(self) -> float:
        """Return the claimed supremum."""
        return self.__upper

    @property
    def name(self) -> str:
        """Return the label."""
        return self.__name

    def __call__(self, x: ArrayLike) -> NDArray[np.float64]:
        r"""Evaluate f at rows of ``x``; a single point of shape (d,) gives a scalar array."""
        points = np.asarray(x, dtype=np.float64)
        if points.ndim == 1:
            return np.asarray(self.__func(points[None, :])[0], dtype=np.float64)
        return np.asarray(self.__func(points), dtype=np.float64)

    def gradient(self, x: NDArray[np.float64], h: float = 1e-5) -> NDArray[np.float64]:
        r"""Return gradients at states of shape (n, d)."""
        if self.__gradient is not None:
            return np.asarray(self.__gradient(x), dtype=np.float64)
        out = np.empty_like(x)
        for i in range(self.__dim):
            shift = np.zeros(self.__dim)
            shift[i] = h
            out[:, i] = (self.__func(x + shift) - self.__func(x - shift)) / (2 * h)
        return out

    def hessian(self, x: NDArray[np.float64], h: float = 1e-4) -> NDArray[np.float64]:
        r"""Return Hessians at states of shape (n, d) as an (n, d, d) array."""
        if self.__hessian is not None:
            return np.asarray(self.__hessian(x), dtype=np.float64)
        out = np.empty((x.shape[0], self.__dim, self.__dim), dtype=np.float64)
        for i in range(self.__dim):
            shift = np.zeros(self.__dim)
            shift[i] = h
            out[:, :, i] = (self.gradient(x + shift) - self.gradient(x - shift)) / (2 * h)
        return (out + out.transpose(0, 2, 1)) / 2

    def check_bounds(self, rng: Generator | None = None, n_points: int = 4096, radius: float = 10.0) -> bool:
        """Check the claimed bounds on random states.

        Parameters
        ----------
        rng : `numpy.random.Generator` | None, optional
            random-number generator
        n_points : `int`, optional
            number of states, by default 4096
        radius : `float`, optional
            standard deviation of the states, by default 10

        Returns
        -------
        `bool`
            whether all values lie in [lower, upper]
        """
        rng = ensure_rng(rng)
        values = self.__func(radius * rng.standard_normal((n_points, self.__dim)))
        tol = 1e-12 * max(1.0, self.__upper)
        return bool(np.all(values >= self.__lower - tol) and np.all(values <= self.__upper + tol))

    def to_dict(self) -> dict[str, object]:
        r"""Return a serializable description.

        Returns
        -------
        `dict`\[`str`, `object`\]
            description
        """
        return {"name": self.__name, "dim": self.__dim, "lower": self.__lower, "upper": self.__upper}


def _unit(direction: ArrayLike | None, dim: int) -> NDArray[np.float64]:
    if direction is None:
        a = np.zeros(dim)
        a[0] = 1.0
        return a
    a = np.asarray(direction, dtype=np.float64)
    if a.shape != (dim,):
        msg = f"Direction must have shape ({dim},), got {a.shape}."
        raise ValueError(msg)
    return a


def shifted_tanh(dim: int = 1, shift: float = 1.5, direction: ArrayLike | None = None) -> TestFunction:
    r"""Return :math:`f(x) = c + \tanh\langle a, x\rangle` with values in :math:`[c-1, c+1]`.

    Parameters
    ----------
    dim : `int`, optional
        dimension, by default 1
    shift : `float`, optional
        constant c > 1, by default 1.5
    direction : `numpy.typing.ArrayLike` | None, optional
        vector a, by default the first axis

    Returns
    -------
    `TestFunction`
        test function
    """
    a = _unit(direction, dim)

    def func(x: NDArray[np.float64]) -> NDArray[np.float64]:
        return shift + np.tanh(x @ a)

    def grad(x: NDArray[np.float64]) -> NDArray[np.float64]:
        return (1.0 - np.tanh(x @ a) ** 2)[:, None] * a[None, :]

    def hess(x: NDArray[np.float64]) -> NDArray[np.float64]:
        t = np.tanh(x @ a)
        return (-2.0 * t * (1.0 - t * t))[:, None, None] * np.outer(a, a)[None, :, :]

    return TestFunction(func, dim, shift - 1.0, shift + 1.0, gradient=grad, hessian=hess, name=f"tanh+{shift:g}")


def inverse_quadratic(dim: int = 1) -> TestFunction:
    r"""Return :math:`f(x) = 1/(1+|x|^2)`.

    Parameters
    ----------
    dim : `int`, optional
        dimension, by default 1

    Returns
    -------
    `TestFunction`
        test function with values in (0, 1]
    """

    def func(x: NDArray[np.float64]) -> NDArray[np.float64]:
        return 1.0 / (1.0 + np.sum(x * x, axis=-1))

    def grad(x: NDArray[np.float64]) -> NDArray[np.float64]:
        s = 1.0 + np.sum(x * x, axis=-1)
        return -2.0 * x / (s * s)[:, None]

    def hess(x: NDArray[np.float64]) -> NDArray[np.float64]:
        s = 1.0 + np.sum(x * x, axis=-1)
        outer = np.einsum("ni,nj->nij", x, x)
        return -2.0 * np.eye(dim)[None, :, :] / (s * s)[:, None, None] + 8.0 * outer / (s**3)[:, None, None]

    return TestFunction(func, dim, 0.0, 1.0, gradient=grad, hessian=hess, name="inverse-quadratic")


def cosine_bump(dim: int = 1, shift: float = 2.0, direction: ArrayLike | None = None) -> TestFunction:
    r"""Return :math:`f(x) = c + \cos\langle a, x\rangle`.

    Parameters
    ----------
    dim : `int`, optional
        dimension, by default 1
    shift : `float`, optional
        constant c > 1, by default 2
    direction : `numpy.typing.ArrayLike` | None, optional
        vector a, by default the first axis

    Returns
    -------
    `TestFunction`
        test function with values in [c-1, c+1]
    """
    a = _unit(direction, dim)

    def func(x: NDArray[np.float64]) -> NDArray[np.float64]:
        return shift + np.cos(x @ a)

    def grad(x: NDArray[np.float64]) -> NDArray[np.float64]:
        return -np.sin(x @ a)[:, None] * a[None, :]

    def hess(x: NDArray[np.float64]) -> NDArray[np.float64]:
        return -np.cos(x @ a)[:, None, None] * np.outer(a, a)[None, :, :]

    return TestFunction(func, dim, shift - 1.0, shift + 1.0, gradient=grad, hessian=hess, name=f"cos+{shift:g}")


def constant_function(value: float, dim: int = 1) -> TestFunction:
    """Return the constant function.

    Parameters
    ----------
    value : `float`
        non-negative constant
    dim : `int`, optional
        dimension, by default 1

    Returns
    -------
    `TestFunction`
        constant test function
    """
    return TestFunction(
        lambda x: np.full(x.shape[0], float(value)),
        dim,
        value,
        value,
        gradient=np.zeros_like,
        hessian=lambda x: np.zeros((x.shape[0], dim, dim)),
        name=f"constant({value:g})",
    )


def _matrix(sigma: ArrayLike | None, dim: int) -> NDArray[np.float64]:
    if sigma is None:
        return np.eye(dim)
    mat = np.atleast_2d(np.asarray(sigma, dtype=np.float64))
    if mat.shape != (dim, dim):
        msg = f"sigma must have shape ({dim}, {dim}), got {mat.shape}."
        raise ValueError(msg)
    return mat


def _circle(n: int = CIRCLE_NODES) -> NDArray[np.float64]:
    angles = 2 * np.pi * np.arange(n) / n
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def _direction_average(
    h: Callable[[NDArray[np.float64]], NDArray[np.float64]], x: NDArray[np.float64], sigma: NDArray[np.float64]
) -> Callable[[float], float]:
    """Return r -> mean over the sphere of h(x + r sigma u) for d <= 2."""
    dirs = np.asarray([[1.0], [-1.0]]) if x.size == 1 else _circle()
    shifted = dirs @ sigma.T

    def average(r: float) -> float:
        return float(np.mean(h(x[None, :] + r * shifted)))

    return average


def _quadrature_split(
    h: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    x: NDArray[np.float64],
    sigma: NDArray[np.float64],
    measure: RadialLevyMeasure,
    inner_radius: float,
    surrogate_coef: float,
) -> Estimate:
    """Outer integral of h by quadrature plus a surrogate error estimate from the shell (eps/2, eps]."""
    radial = _direction_average(h, x, sigma)
    outer = radial_integral(measure, radial, inner_radius)
    shell = radial_integral(measure, radial, inner_radius / 2, inner_radius)
    shell_surrogate = surrogate_coef * (small_sq(measure, inner_radius) - small_sq(measure, inner_radius / 2))
    err = 2.0 * abs(shell.value - shell_surrogate) + outer.stderr
    return Estimate(outer.value, err)


def _monte_carlo_split(
    h: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    x: NDArray[np.float64],
    sigma: NDArray[np.float64],
    measure: RadialLevyMeasure,
    inner_radius: float,
    rng: Generator,
    n_samples: int,
) -> Estimate:
    """Outer integral of h by importance sampling from the normalized tail, with antithetic pairs."""
    mass = tail_mass(measure, inner_radius)
    if mass == 0:
        return Estimate(0.0)
    z = sample_jump_above(measure, inner_radius, rng, size=n_samples) @ sigma.T
    values = 0.5 * (h(x[None, :] + z) + h(x[None, :] - z))
    return Estimate(mass * float(values.mean()), mass * float(values.std(ddof=1)) / math.sqrt(n_samples))


def gamma_phi(  # noqa: PLR0913
    phi: PhiSpec,
    f: TestFunction,
    x: ArrayLike,
    measure: RadialLevyMeasure,
    sigma: ArrayLike | None = None,
    inner_radius: float = DEFAULT_INNER_RADIUS,
    *,
    rng: Generator | None = None,
    n_samples: int = 20_000,
) -> Estimate:
    r"""Return :math:`\Gamma_{\Phi,\nu}(f)(x) = \int\Psi_\Phi(f(x+\sigma z), f(x))\nu(dz)`.

    Inside :math:`|z| \le \varepsilon` the integrand is replaced by
    :math:`\tfrac12\Phi''(f(x))\langle\nabla f(x), \sigma z\rangle^2`, which integrates to
    :math:`\Phi''(f(x))|\sigma^T\nabla f(x)|^2\,\mathrm{small\_sq}(\varepsilon)/(2d)`.
    Outside, d <= 2 uses adaptive radial quadrature of the direction average and d >= 3
    uses importance sampling from the normalized tail.

    Parameters
    ----------
    phi : `PhiSpec`
        convex function
    f : `TestFunction`
        positive bounded function
    x : `numpy.typing.ArrayLike`
        point of shape (d,)
    measure : `RadialLevyMeasure`
        Lévy measure
    sigma : `numpy.typing.ArrayLike` | None, optional
        noise matrix, by default the identity
    inner_radius : `float`, optional
        surrogate radius :math:`\varepsilon`, by default 1e-3
    rng : `numpy.random.Generator` | None, optional
        generator for d >= 3
    n_samples : `int`, optional
        tail samples for d >= 3, by default 20000

    Returns
    -------
    `Estimate`
        value with an error estimate

    Raises
    ------
    NonPositiveInput
        if f(x) is not positive
    DivergentIntegral
        if the outer integral diverges
    """
    point = np.asarray(x, dtype=np.float64)
    dim = measure.dim
    sig = _matrix(sigma, dim)
    fx = float(f(point))
    if fx <= 0:
        msg = f"f(x) must be positive, got {fx}."
        raise NonPositiveInput(msg)
    grad = f.gradient(point[None, :])[0]
    v = sig.T @ grad
    coef = float(phi.second_derivative(fx)) * float(v @ v) / (2 * dim)
    inner = coef * small_sq(measure, inner_radius)

    def h(points: NDArray[np.float64]) -> NDArray[np.float64]:
        return psi(phi, f(points), fx)

    if dim <= 2:  # noqa: PLR2004
        outer = _quadrature_split(h, point, sig, measure, inner_radius, coef)
    else:
        outer = _monte_carlo_split(h, point, sig, measure, inner_radius, ensure_rng(rng), n_samples)
    return Estimate(inner + outer.value, outer.stderr)


def generator_apply(  # noqa: PLR0913
    f: TestFunction,
    x: ArrayLike,
    coeffs: CoefficientField,
    measure: RadialLevyMeasure | None,
    inner_radius: float = DEFAULT_INNER_RADIUS,
    *,
    rng: Generator | None = None,
    n_samples: int = 20_000,
) -> Estimate:
    r"""Return :math:`Lf(x)` for :math:`L f = \langle\nabla f, b\rangle + \int[f(\cdot+\sigma z)-f-\langle\nabla f,\sigma z\rangle 1_{|z|\le1}]\nu(dz)`.

    A Brownian coefficient adds :math:`\tfrac12\mathrm{Tr}(\sigma_1\sigma_1^T\nabla^2 f)`.
    The jump integral is split as in `gamma_phi` with the surrogate
    :math:`\tfrac12\langle\nabla^2 f(x)\sigma z, \sigma z\rangle`; the compensator cancels
    on symmetric direction sets.

    Parameters
    ----------
    f : `TestFunction`
        twice differentiable bounded function
    x : `numpy.typing.ArrayLike`
        point of shape (d,)
    coeffs : `CoefficientField`
        coefficients; the jump matrix is :math:`\sigma_2(x)`
    measure : `RadialLevyMeasure` | None
        Lévy measure, `None` for no jumps
    inner_radius : `float`, optional
        surrogate radius, by default 1e-3
    rng : `numpy.random.Generator` | None, optional
        generator for d >= 3
    n_samples : `int`, optional
        tail samples for d >= 3, by default 20000

    Returns
    -------
    `Estimate`
        value with an error estimate

    Raises
    ------
    DivergentIntegral
        if the jump integral diverges
    """
    point = np.asarray(x, dtype=np.float64)
    row = point[None, :]
    dim = coeffs.dim
    grad = f.gradient(row)[0]
    hess = f.hessian(row)[0]
    value = float(grad @ coeffs.drift(row)[0])
    if coeffs.has_brownian:
        s1 = coeffs.sigma1_at(row)[0]
        value += 0.5 * float(np.trace(s1.T @ hess @ s1))
    if measure is None:
        return Estimate(value)
    sig = coeffs.sigma2_at(row)[0]
    coef = float(np.trace(sig.T @ hess @ sig)) / (2 * dim)
    value += coef * small_sq(measure, inner_radius)
    fx = float(f(point))

    def h(points: NDArray[np.float64]) -> NDArray[np.float64]:
        return f(points) - fx

    if dim <= 2:  # noqa: PLR2004
        outer = _quadrature_split(h, point, sig, measure, inner_radius, coef)
    else:
        outer = _monte_carlo_split(h, point, sig, measure, inner_radius, ensure_rng(rng), n_samples)
    return Estimate(value + outer.value, outer.stderr)


def _segment_nodes(  # noqa: PLR0913, PLR0917
    measure: RadialLevyMeasure,
    lo: float,
    hi: float,
    log_value: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    nodes: NDArray[np.float64],
    weights: NDArray[np.float64],
    panel_width: float,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Composite Gauss-Legendre panels in u = log r on a bounded piece."""
    ua, ub = math.log(lo), math.log(hi)
    n_panels = max(1, math.ceil((ub - ua) / panel_width))
    edges = np.linspace(ua, ub, n_panels + 1)
    mid = (edges[:-1] + edges[1:]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    u = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return np.exp(u), w * np.exp(log_value(u) - measure.alpha * u)


def radial_rule(
    measure: RadialLevyMeasure,
    lo: float,
    *,
    order: int = 6,
    panel_width: float = 0.5,
    far: float = 1e6,
    far_order: int = 24,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    r"""Return radii and weights with :math:`\sum_i w_i h(r_i) \approx \int_{|z|>lo} h(|z|)\nu(dz)`.

    Pieces of the profile below ``far`` get composite Gauss-Legendre panels in
    :math:`u = \log r`; unbounded pieces beyond ``far`` are mapped to a bounded interval
    by :math:`t = r^{-\beta}` with :math:`\beta = \alpha - s` (or by the Pareto map for
    log-corrected pieces with :math:`s = \alpha`). The weights include the sphere area
    and the modulation.

    Parameters
    ----------
    measure : `RadialLevyMeasure`
        Lévy measure
    lo : `float`
        inner radius, positive
    order : `int`, optional
        nodes per panel, by default 6
    panel_width : `float`, optional
        panel width in log-radius, by default 0.5
    far : `float`, optional
        radius where the tail map starts, by default 1e6
    far_order : `int`, optional
        nodes of the tail map, by default 24

    Returns
    -------
    `tuple`\[`numpy.typing.NDArray`\[`numpy.float64`\], `numpy.typing.NDArray`\[`numpy.float64`\]\]
        radii and weights
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    far_nodes, far_weights = np.polynomial.legendre.leggauss(far_order)
    alpha = measure.alpha
    radii: list[NDArray[np.float64]] = []
    masses: list[NDArray[np.float64]] = []
    for a, b, seg in measure.rho.clip(lo, math.inf):
        stop = min(b, max(far, a))
        if stop > a:
            r, w = _segment_nodes(measure, a, stop, seg.log_value, nodes, weights, panel_width)
            radii.append(r)
            masses.append(w)
        if b <= stop:
            continue
        if not math.isinf(b):
            r, w = _segment_nodes(measure, stop, b, seg.log_value, nodes, weights, panel_width)
            radii.append(r)
            masses.append(w)
            continue
        beta = alpha - seg.slope
        if beta > EXPONENT_ATOL:
            t_hi = stop ** (-beta)
            t = t_hi * (far_nodes + 1) / 2
            u = -np.log(t) / beta
            jac = t_hi / 2 * far_weights / (beta * t)
        else:
            # log-corrected piece with s = alpha: w = (1+v)^(1-q), v = log(r/lo)
            q = seg.log_power
            w_hi = (1.0 + math.log(stop / seg.lo)) ** (1.0 - q)
            wv = w_hi * (far_nodes + 1) / 2
            v = wv ** (1.0 / (1.0 - q)) - 1.0
            u = math.log(seg.lo) + v
            jac = w_hi / 2 * far_weights * wv ** (q / (1.0 - q)) / (q - 1.0)
        radii.append(np.exp(np.minimum(u, 700.0)))
        masses.append(jac * np.exp(seg.log_value(u) - alpha * u))
    if not radii:
        return np.zeros(0), np.zeros(0)
    r_all = np.concatenate(radii)
    w_all = np.concatenate(masses)
    k = measure.modulation(r_all) if measure.is_modulated else measure.kappa2
    return r_all, measure.sphere_area * w_all * k


def _directions(dim: int, rng: Generator | None, n_random: int) -> NDArray[np.float64]:
    """Symmetric direction set: +-1, circle nodes, or +- axes and +- random pairs."""
    if dim == 1:
        return np.asarray([[1.0], [-1.0]])
    if dim == 2:  # noqa: PLR2004
        return _circle()
    half = np.concatenate([np.eye(dim), uniform_directions(ensure_rng(rng), n_random, dim)])
    return np.concatenate([half, -half])


def _batched(
    h: Callable[[NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]],
    states: NDArray[np.float64],
    sigmas: NDArray[np.float64],
    radii: NDArray[np.float64],
    weights: NDArray[np.float64],
    dirs: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Return sum_i w_i mean_u h(x + r_i sigma(x) u, row) for every state x."""
    n, dim = states.shape
    out = np.zeros(n, dtype=np.float64)
    if radii.size == 0 or n == 0:
        return out
    per_state = radii.size * dirs.shape[0]
    chunk = max(1, _CHUNK // per_state)
    for start in range(0, n, chunk):
        x = states[start : start + chunk]
        shifted = np.einsum("nij,mj->nmi", sigmas[start : start + chunk], dirs)
        points = x[:, None, None, :] + radii[None, :, None, None] * shifted[:, None, :, :]
        rows = np.repeat(np.arange(x.shape[0]), per_state)
        values = h(points.reshape(-1, dim), rows + start).reshape(x.shape[0], radii.size, dirs.shape[0])
        out[start : start + chunk] = values.mean(axis=2) @ weights
    return out


def _as_states(states: TrajectoryEnsemble | ArrayLike) -> NDArray[np.float64]:
    if isinstance(states, TrajectoryEnsemble):
        return states.terminal
    return np.atleast_2d(np.asarray(states, dtype=np.float64))


def gamma_values(  # noqa: PLR0913
    phi: PhiSpec,
    f: TestFunction,
    states: TrajectoryEnsemble | ArrayLike,
    measure: RadialLevyMeasure,
    sigma: ArrayLike | None = None,
    inner_radius: float = DEFAULT_INNER_RADIUS,
    *,
    rng: Generator | None = None,
    n_random: int = 32,
) -> NDArray[np.float64]:
    r"""Return :math:`\Gamma_{\Phi,\nu}(f)` at every state with the fixed rule of `radial_rule`.

    Parameters
    ----------
    phi : `PhiSpec`
        convex function
    f : `TestFunction`
        positive bounded function
    states : `TrajectoryEnsemble` | `numpy.typing.ArrayLike`
        ensemble or states of shape (n, d)
    measure : `RadialLevyMeasure`
        Lévy measure
    sigma : `numpy.typing.ArrayLike` | None, optional
        noise matrix, by default the identity
    inner_radius : `float`, optional
        surrogate radius, by default 1e-3
    rng : `numpy.random.Generator` | None, optional
        generator of the random directions for d >= 3
    n_random : `int`, optional
        random direction pairs for d >= 3, by default 32

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.float64`\]
        values of shape (n,)
    """
    x = _as_states(states)
    n, dim = x.shape
    sig = _matrix(sigma, dim)
    fx = f(x)
    if np.any(fx <= 0):
        msg = "f must be positive on the states."
        raise NonPositiveInput(msg)
    v = f.gradient(x) @ sig
    inner = phi.second_derivative(fx) * np.sum(v * v, axis=1) / (2 * dim) * small_sq(measure, inner_radius)
    radii, weights = radial_rule(measure, inner_radius)

    def h(points: NDArray[np.float64], rows: NDArray[np.int64]) -> NDArray[np.float64]:
        return phi.remainder(f(points), fx[rows])

    sigmas = np.broadcast_to(sig, (n, dim, dim))
    return inner + _batched(h, x, sigmas, radii, weights, _directions(dim, rng, n_random))


def mean_gamma(  # noqa: PLR0913
    phi: PhiSpec,
    f: TestFunction,
    states: TrajectoryEnsemble | ArrayLike,
    measure: RadialLevyMeasure,
    sigma: ArrayLike | None = None,
    inner_radius: float = DEFAULT_INNER_RADIUS,
    *,
    rng: Generator | None = None,
) -> Estimate:
    r"""Return the sample mean of `gamma_values` with its standard error.

    Parameters
    ----------
    phi : `PhiSpec`
        convex function
    f : `TestFunction`
        positive bounded function
    states : `TrajectoryEnsemble` | `numpy.typing.ArrayLike`
        ensemble or states of shape (n, d)
    measure : `RadialLevyMeasure`
        Lévy measure
    sigma : `numpy.typing.ArrayLike` | None, optional
        noise matrix, by default the identity
    inner_radius : `float`, optional
        surrogate radius, by default 1e-3
    rng : `numpy.random.Generator` | None, optional
        generator of the random directions for d >= 3

    Returns
    -------
    `Estimate`
        mean with standard error
    """
    return _mean(gamma_values(phi, f, states, measure, sigma, inner_radius, rng=rng))


def generator_values(
    f: TestFunction,
    states: TrajectoryEnsemble | ArrayLike,
    coeffs: CoefficientField,
    measure: RadialLevyMeasure | None,
    inner_radius: float = DEFAULT_INNER_RADIUS,
    *,
    rng: Generator | None = None,
) -> NDArray[np.float64]:
    r"""Return :math:`Lf` at every state with the fixed rule of `radial_rule`.

    Parameters
    ----------
    f : `TestFunction`
        twice differentiable bounded function
    states : `TrajectoryEnsemble` | `numpy.typing.ArrayLike`
        ensemble or states of shape (n, d)
    coeffs : `CoefficientField`
        coefficients
    measure : `RadialLevyMeasure` | None
        Lévy measure, `None` for no jumps
    inner_radius : `float`, optional
        surrogate radius, by default 1e-3
    rng : `numpy.random.Generator` | None, optional
        generator of the random directions for d >= 3

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.float64`\]
        values of shape (n,)
    """
    x = _as_states(states)
    dim = x.shape[1]
    hess = f.hessian(x)
    values = np.sum(f.gradient(x) * coeffs.drift(x), axis=1)
    if coeffs.has_brownian:
        s1 = coeffs.sigma1_at(x)
        values = values + 0.5 * np.einsum("nji,njk,nki->n", s1, hess, s1)
    if measure is None:
        return values
    sig = np.asarray(coeffs.sigma2_at(x))
    values = values + np.einsum("nji,njk,nki->n", sig, hess, sig) / (2 * dim) * small_sq(measure, inner_radius)
    fx = f(x)
    radii, weights = radial_rule(measure, inner_radius)

    def h(points: NDArray[np.float64], rows: NDArray[np.int64]) -> NDArray[np.float64]:
        return f(points) - fx[rows]

    return values + _batched(h, x, sig, radii, weights, _directions(dim, rng, 32))


def generator_residual(
    f: TestFunction,
    states: TrajectoryEnsemble | ArrayLike,
    coeffs: CoefficientField,
    measure: RadialLevyMeasure | None,
    inner_radius: float = DEFAULT_INNER_RADIUS,
) -> Estimate:
    r"""Return the sample mean of :math:`Lf`, which vanishes under an invariant law.

    Parameters
    ----------
    f : `TestFunction`
        twice differentiable bounded function
    states : `TrajectoryEnsemble` | `numpy.typing.ArrayLike`
        samples of the invariant law
    coeffs : `CoefficientField`
        coefficients
    measure : `RadialLevyMeasure` | None
        Lévy measure
    inner_radius : `float`, optional
        surrogate radius, by default 1e-3

    Returns
    -------
    `Estimate`
        mean with standard error
    """
    return _mean(generator_values(f, states, coeffs, measure, inner_radius))


def _mean(values: NDArray[np.float64]) -> Estimate:
    n = values.size
    if n == 0:
        msg = "Cannot average an empty sample."
        raise ValueError(msg)
    stderr = float(values.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return Estimate(float(values.mean()), stderr)


def entropy_estimate(phi: PhiSpec, values: ArrayLike, *, jackknife: bool = False) -> Estimate:
    r"""Return the plug-in estimate of :math:`E\Phi(Y) - \Phi(EY)` from samples of Y.

    The standard error uses the delta method with influence
    :math:`\Phi(Y) - \Phi'(\bar Y)Y`. The plug-in bias is :math:`O(1/n)`;
    ``jackknife=True`` removes its leading term.

    Parameters
    ----------
    phi : `PhiSpec`
        convex function
    values : `numpy.typing.ArrayLike`
        non-negative samples
    jackknife : `bool`, optional
        whether to apply the jackknife bias correction, by default False

    Returns
    -------
    `Estimate`
        entropy with standard error

    Raises
    ------
    ValueError
        if there are no samples
    NonPositiveInput
        if samples are negative, or not positive while :math:`\Phi'(0)` is singular
    """
    y = np.asarray(values, dtype=np.float64).ravel()
    n = y.size
    if n == 0:
        msg = "Cannot estimate an entropy from an empty sample."
        raise ValueError(msg)
    if np.any(y < 0) or (phi.requires_positive and np.any(y <= 0)):
        msg = f"Samples must be {'positive' if phi.requires_positive else 'non-negative'} for {phi.name}."
        raise NonPositiveInput(msg)
    mean = float(y.mean())
    phi_y = phi(y)
    value = float(phi_y.mean()) - float(phi(mean))
    if n == 1:
        return Estimate(value)
    influence = phi_y - float(phi.derivative(mean)) * y if mean > 0 else phi_y
    stderr = float(influence.std(ddof=1)) / math.sqrt(n)
    if jackknife:
        loo_means = (y.sum() - y) / (n - 1)
        loo = (phi_y.sum() - phi_y) / (n - 1) - phi(loo_means)
        value = n * value - (n - 1) * float(loo.mean())
    return Estimate(value, stderr)


def semigroup_entropy(
    phi: PhiSpec, f: TestFunction, ensemble: TrajectoryEnsemble | ArrayLike, *, jackknife: bool = False
) -> Estimate:
    r"""Estimate :math:`\mathrm{Ent}^\Phi_{P_T}(f)(x) = P_T\Phi(f)(x) - \Phi(P_Tf(x))`.

    Parameters
    ----------
    phi : `PhiSpec`
        convex function
    f : `TestFunction`
        bounded function, bounded away from 0 when :math:`\Phi'(0)` is singular
    ensemble : `TrajectoryEnsemble` | `numpy.typing.ArrayLike`
        terminal states started from one point
    jackknife : `bool`, optional
        whether to apply the jackknife bias correction, by default False

    Returns
    -------
    `Estimate`
        entropy with standard error
    """
    return entropy_estimate(phi, f(_as_states(ensemble)), jackknife=jackknife)


def invariant_entropy(
    phi: PhiSpec, f: TestFunction, samples: TrajectoryEnsemble | ArrayLike, *, jackknife: bool = False
) -> Estimate:
    r"""Estimate :math:`\mathrm{Ent}^\Phi_\mu(f) = \mu(\Phi(f)) - \Phi(\mu(f))` from invariant samples.

    Parameters
    ----------
    phi : `PhiSpec`
        convex function
    f : `TestFunction`
        bounded function
    samples : `TrajectoryEnsemble` | `numpy.typing.ArrayLike`
        samples of the invariant law
    jackknife : `bool`, optional
        whether to apply the jackknife bias correction, by default False

    Returns
    -------
    `Estimate`
        entropy with standard error
    """
    return entropy_estimate(phi, f(_as_states(samples)), jackknife=jackknife)


def bound_constant(  # noqa: PLR0913, PLR0917
    lambda1: float,
    lambda2: float,
    d: int,
    alpha: float,
    kappa1: float,
    kappa2: float,
    T: float,  # noqa: N803
) -> float:
    r"""Return the constant of the entropy inequality on [0, T].

    For finite T the constant is :math:`\kappa_2(e^{aT}-1)/(\kappa_1 a)` with
    :math:`a = \lambda_2(d+\alpha) - \lambda_1 d`, equal to :math:`\kappa_2T/\kappa_1` at
    a = 0. For :math:`T = \infty` it is :math:`\kappa_2/(\kappa_1(\lambda_1d - \lambda_2(d+\alpha)))`.

    Parameters
    ----------
    lambda1 : `float`
        lower dissipativity constant
    lambda2 : `float`
        upper dissipativity constant
    d : `int`
        dimension
    alpha : `float`
        stability index
    kappa1 : `float`
        lower density constant
    kappa2 : `float`
        upper density constant
    T : `float`
        horizon, non-negative or `math.inf`

    Returns
    -------
    `float`
        non-negative constant

    Raises
    ------
    NoFiniteLimit
        if T is infinite and :math:`\lambda_2(d+\alpha) \ge \lambda_1 d`
    ValueError
        if T is negative
    """
    if T < 0:
        msg = f"Horizon must be non-negative, got {T}."
        raise ValueError(msg)
    a = lambda2 * (d + alpha) - lambda1 * d
    ratio = kappa2 / kappa1
    if math.isinf(T):
        if a >= 0:
            msg = f"lambda2 (d + alpha) - lambda1 d = {a} >= 0: the constant has no finite limit."
            raise NoFiniteLimit(msg)
        return ratio / -a
    if a == 0:
        return ratio * T
    return ratio * math.expm1(a * T) / a


def decay_rate(  # noqa: PLR0913, PLR0917
    lambda1: float, lambda2: float, d: int, alpha: float, kappa1: float, kappa2: float
) -> float:
    r"""Return :math:`\kappa_1(\lambda_1 d - \lambda_2(d+\alpha))/\kappa_2`, the entropy decay rate.

    Parameters
    ----------
    lambda1 : `float`
        lower dissipativity constant
    lambda2 : `float`
        upper dissipativity constant
    d : `int`
        dimension
    alpha : `float`
        stability index
    kappa1 : `float`
        lower density constant
    kappa2 : `float`
        upper density constant

    Returns
    -------
    `float`
        positive rate, the reciprocal of ``bound_constant(..., T=inf)``

    Raises
    ------
    NotDissipativeEnough
        if :math:`\lambda_2(d+\alpha) \ge \lambda_1 d`
    """
    gap = lambda1 * d - lambda2 * (d + alpha)
    if gap <= 0:
        msg = f"lambda1 d - lambda2 (d + alpha) = {gap} <= 0: no entropy decay rate."
        raise NotDissipativeEnough(msg)
    return kappa1 * gap / kappa2


def _measure_constants(coeffs: CoefficientField, measure: RadialLevyMeasure) -> tuple[float, ...]:
    return (coeffs.lambda1, coeffs.lambda2, coeffs.dim, measure.alpha, measure.kappa1, measure.kappa2)


@dataclass(frozen=True)
class EntropyBoundCheck:
    r"""Entropy of :math:`P_T` against its bound at one starting point.

    Attributes
    ----------
    entropy : `Estimate`
        :math:`\mathrm{Ent}^\Phi_{P_T}(f)(x)`
    gamma : `Estimate`
        :math:`P_T\Gamma_{\Phi,\nu}(f)(x)`
    constant : `float`
        `bound_constant` at T
    """

    entropy: Estimate
    gamma: Estimate
    constant: float

    @property
    def rhs(self) -> float:
        """Return the bound."""
        return self.constant * self.gamma.value

    @property
    def margin(self) -> float:
        """Return bound minus entropy."""
        return self.rhs - self.entropy.value

    @property
    def stderr(self) -> float:
        """Return the combined standard error of the margin."""
        return math.hypot(self.entropy.stderr, self.constant * self.gamma.stderr)

    def holds(self, n_sigma: float = 3.0) -> bool:
        """Return whether the entropy is below the bound up to ``n_sigma`` standard errors."""
        return self.margin >= -n_sigma * self.stderr


def check_entropy_bound(  # noqa: PLR0913, PLR0917
    phi: PhiSpec,
    f: TestFunction,
    coeffs: CoefficientField,
    measure: RadialLevyMeasure,
    ensemble: TrajectoryEnsemble,
    T: float,  # noqa: N803
    inner_radius: float = DEFAULT_INNER_RADIUS,
) -> EntropyBoundCheck:
    r"""Compare :math:`\mathrm{Ent}^\Phi_{P_T}(f)(x)` with the constant times :math:`P_T\Gamma_{\Phi,\nu}(f)(x)`.

    Parameters
    ----------
    phi : `PhiSpec`
        convex function
    f : `TestFunction`
        positive bounded function
    coeffs : `CoefficientField`
        coefficients with constant noise matrix
    measure : `RadialLevyMeasure`
        Lévy measure
    ensemble : `TrajectoryEnsemble`
        terminal states at T from one starting point
    T : `float`
        horizon
    inner_radius : `float`, optional
        surrogate radius, by default 1e-3

    Returns
    -------
    `EntropyBoundCheck`
        both sides with their errors
    """
    entropy = semigroup_entropy(phi, f, ensemble)
    gamma = mean_gamma(phi, f, ensemble, measure, coeffs.sigma, inner_radius)
    constant = bound_constant(*_measure_constants(coeffs, measure), T)
    logger.info("entropy %.6g +- %.2g, bound %.6g", entropy.value, entropy.stderr, constant * gamma.value)
    return EntropyBoundCheck(entropy, gamma, constant)


@dataclass(frozen=True)
class DecayCurve:
    r"""Entropy of :math:`P_t f` under the invariant law with its exponential envelope.

    Attributes
    ----------
    times : `numpy.typing.NDArray`\[`numpy.float64`\]
        checkpoint times
    entropy : `numpy.typing.NDArray`\[`numpy.float64`\]
        bias-corrected estimates of :math:`\mathrm{Ent}^\Phi_\mu(P_tf)`
    stderr : `numpy.typing.NDArray`\[`numpy.float64`\]
        standard errors
    initial : `Estimate`
        :math:`\mathrm{Ent}^\Phi_\mu(f)`
    rate : `float`
        `decay_rate` of the model
    """

    times: NDArray[np.float64]
    entropy: NDArray[np.float64]
    stderr: NDArray[np.float64]
    initial: Estimate
    rate: float

    @property
    def bound(self) -> NDArray[np.float64]:
        r"""Return :math:`\mathrm{Ent}^\Phi_\mu(f)e^{-\mathrm{rate}\,t}`."""
        return self.initial.value * np.exp(-self.rate * self.times)

    def margins(self, slack: float = 0.15) -> NDArray[np.float64]:
        """Return envelope times (1 + slack) minus entropy at every checkpoint."""
        return self.bound * (1.0 + slack) - self.entropy

    def holds(self, slack: float = 0.15, n_sigma: float = 3.0) -> bool:
        """Return whether every checkpoint lies below the slackened envelope up to ``n_sigma`` errors."""
        bound_err = self.initial.stderr * np.exp(-self.rate * self.times) * (1.0 + slack)
        return bool(np.all(self.margins(slack) >= -n_sigma * np.hypot(self.stderr, bound_err)))


def default_decay_times(rate: float, n_times: int = 8) -> NDArray[np.float64]:
    r"""Return ``n_times`` log-spaced times in :math:`[0.1/\mathrm{rate}, 4/\mathrm{rate}]`.

    Parameters
    ----------
    rate : `float`
        decay rate
    n_times : `int`, optional
        number of times, by default 8

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.float64`\]
        checkpoint times
    """
    return np.geomspace(0.1 / rate, 4.0 / rate, n_times)


def entropy_decay_curve(  # noqa: PLR0913
    phi: PhiSpec,
    f: TestFunction,
    coeffs: CoefficientField,
    plan: NoiseIncrementPlan,
    *,
    times: Sequence[float] | None = None,
    n_outer: int = 512,
    n_inner: int = 256,
    seed: int = 0,
    burn_in: float | None = None,
    dt: float | None = None,
    executor: Executor | None = None,
) -> DecayCurve:
    r"""Estimate :math:`t \mapsto \mathrm{Ent}^\Phi_\mu(P_tf)` by nested simulation.

    ``n_outer`` invariant samples y are drawn with `invariant_ensemble`; from each,
    ``n_inner`` paths estimate :math:`P_tf(y)`. The plug-in bias of :math:`\Phi(P_tf(y))` is
    removed to second order with :math:`\tfrac12\Phi''\hat s^2/n_{\mathrm{inner}}`.

    Parameters
    ----------
    phi : `PhiSpec`
        convex function
    f : `TestFunction`
        positive bounded function
    coeffs : `CoefficientField`
        coefficients
    plan : `NoiseIncrementPlan`
        noise plan
    times : `collections.abc.Sequence`\[`float`\] | None, optional
        checkpoint times, by default `default_decay_times`
    n_outer : `int`, optional
        invariant samples, by default 512
    n_inner : `int`, optional
        paths per sample, by default 256
    seed : `int`, optional
        batch seed, by default 0
    burn_in : `float` | None, optional
        burn-in time of the invariant samples
    dt : `float` | None, optional
        step size
    executor : `concurrent.futures.Executor` | None, optional
        pool running the path blocks

    Returns
    -------
    `DecayCurve`
        entropy curve with its envelope
    """
    measure = plan.measure
    rate = decay_rate(*_measure_constants(coeffs, measure))
    grid = default_decay_times(rate) if times is None else np.sort(np.asarray(times, dtype=np.float64))
    outer = invariant_ensemble(coeffs, plan, burn_in, n_outer, seed, dt=dt, executor=executor)
    initial = invariant_entropy(phi, f, outer.samples)
    starts = np.repeat(outer.samples, n_inner, axis=0)
    inner = simulate(
        coeffs,
        plan,
        starts,
        float(grid[-1]),
        dt,
        n_outer * n_inner,
        seed,
        checkpoints=grid,
        executor=executor,
        stream_offset=block_count(n_outer),
    )
    entropy = np.empty(grid.size)
    stderr = np.empty(grid.size)
    for k in range(grid.size):
        values = f(inner.checkpoint_states[k]).reshape(n_outer, n_inner)
        means = values.mean(axis=1)
        variances = values.var(axis=1, ddof=1) / n_inner
        corrected = phi(means) - 0.5 * phi.second_derivative(means) * variances
        mean_pt = float(means.mean())
        influence = corrected - float(phi.derivative(mean_pt)) * means
        entropy[k] = float(corrected.mean()) - float(phi(mean_pt))
        stderr[k] = float(influence.std(ddof=1)) / math.sqrt(n_outer)
        logger.debug("decay curve t=%.4g entropy=%.6g +- %.2g", grid[k], entropy[k], stderr[k])
    return DecayCurve(inner.checkpoint_times, entropy, stderr, initial, rate)


def dirichlet_form_gap(
    phi: PhiSpec,
    f: TestFunction,
    samples: TrajectoryEnsemble | ArrayLike,
    coeffs: CoefficientField,
    measure: RadialLevyMeasure,
    inner_radius: float = DEFAULT_INNER_RADIUS,
) -> Estimate:
    r"""Estimate :math:`-\mu(\Phi'(f)Lf) - \mu(\Gamma_{\Phi,\nu}(f))`, which vanishes under the invariant law.

    Parameters
    ----------
    phi : `PhiSpec`
        convex function
    f : `TestFunction`
        positive twice differentiable bounded function
    samples : `TrajectoryEnsemble` | `numpy.typing.ArrayLike`
        samples of the invariant law of a pure-jump equation with constant noise matrix
    coeffs : `CoefficientField`
        coefficients
    measure : `RadialLevyMeasure`
        Lévy measure
    inner_radius : `float`, optional
        surrogate radius, by default 1e-3

    Returns
    -------
    `Estimate`
        mean difference with standard error
    """
    x = _as_states(samples)
    energy = -phi.derivative(f(x)) * generator_values(f, x, coeffs, measure, inner_radius)
    gamma = gamma_values(phi, f, x, measure, coeffs.sigma, inner_radius)
    return _mean(energy - gamma)
