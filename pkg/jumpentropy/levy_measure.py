r"""Radially dominated Lévy measures.

This module provides:

- `ProfileSegment`: One power-log piece of a radial profile.
- `RadialProfile`: Abstract radial profile :math:`\rho`.
- `IndicatorProfile`: Indicator profile of a radial interval.
- `TabulatedProfile`: Positive profile tabulated on a radial grid.
- `constant_profile`, `small_jump_profile`, `large_jump_profile`: Named indicator profiles.
- `RadialLevyMeasure`: Lévy measure with density :math:`k(|z|)\rho(|z|)/|z|^{d+\alpha}`.
- `moment_integral`: Moment integrals of the measure over radial regions.
- `small_sq`, `mid_abs`, `tail_mass`, `tail_log`, `tail_power`: Shortcuts for `moment_integral`.
- `radial_integral`: Integral of a radial function against the measure.
- `radial_tail_sf`: Survival function of the jump radius above a cutoff.
- `sample_jump_above`: Sample jumps from the normalized restriction to :math:`\{|z|>\delta\}`.
"""

from __future__ import annotations

import abc
import logging
import math
import warnings
from abc import ABC
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import typing_extensions
from scipy import integrate, special

from jumpentropy.common import (
    DivergentIntegral,
    EmptyTail,
    Estimate,
    IntegrationMethod,
    InvalidRegion,
    MomentKind,
    Monotonicity,
    unit_sphere_area,
    uniform_directions,
)
from jumpentropy.rng import ensure_rng

if TYPE_CHECKING:
    from collections.abc import Callable
    from pathlib import Path

    from numpy.random import Generator
    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)

# exponents closer than this are treated as equal
EXPONENT_ATOL = 1e-12
QUAD_EPSREL = 1e-11
QUAD_LIMIT = 400
# largest log-radius fed to exp
_U_MAX = 700.0


@dataclass(frozen=True)
class ProfileSegment:
    r"""One piece of a radial profile on :math:`(lo, hi]`.

    :math:`\rho(r) = c\,(r/lo)^{s}\,(1+\log(r/lo))^{-q}`; a piece starting at 0 is flat.

    Attributes
    ----------
    lo : `float`
        left end, 0 allowed for flat pieces
    hi : `float`
        right end, `math.inf` allowed
    coef : `float`
        value c at the left end
    slope : `float`
        power s
    log_power : `float`
        logarithmic power q
    """

    lo: float
    hi: float
    coef: float
    slope: float = 0.0
    log_power: float = 0.0

    @property
    def is_flat(self) -> bool:
        """Return whether the piece is constant."""
        return self.slope == 0 and self.log_power == 0

    @property
    def is_power(self) -> bool:
        """Return whether the piece has no logarithmic factor."""
        return self.log_power == 0

    def log_value(self, u: NDArray[np.float64]) -> NDArray[np.float64]:
        r"""Return :math:`\log\rho(e^u)` on the piece.

        Parameters
        ----------
        u : `numpy.typing.NDArray`\[`numpy.float64`\]
            log-radii inside the piece

        Returns
        -------
        `numpy.typing.NDArray`\[`numpy.float64`\]
            log of the profile value
        """
        if self.lo == 0:
            return np.full_like(u, math.log(self.coef))
        v = u - math.log(self.lo)
        return math.log(self.coef) + self.slope * v - self.log_power * np.log1p(v)


class RadialProfile(ABC):
    """Abstract radial profile."""

    @abc.abstractmethod
    def segments(self) -> tuple[ProfileSegment, ...]:
        """Return the pieces of the profile in increasing radial order."""
        raise NotImplementedError

    @property
    @abc.abstractmethod
    def monotonicity(self) -> Monotonicity:
        """Return the monotonicity of the profile."""
        raise NotImplementedError

    @abc.abstractmethod
    def to_dict(self) -> dict[str, object]:
        """Return a serializable description of the profile."""
        raise NotImplementedError

    @property
    def is_piecewise_constant(self) -> bool:
        """Return whether every piece is flat."""
        return all(seg.is_flat for seg in self.segments())

    def __call__(self, r: ArrayLike) -> NDArray[np.float64]:
        r"""Evaluate the profile.

        Parameters
        ----------
        r : `numpy.typing.ArrayLike`
            radii

        Returns
        -------
        `numpy.typing.NDArray`\[`numpy.float64`\]
            profile values, 0 outside the support
        """
        radii = np.asarray(r, dtype=np.float64)
        out = np.zeros_like(radii)
        for seg in self.segments():
            mask = (radii > seg.lo) & (radii <= seg.hi)
            if np.any(mask):
                out[mask] = np.exp(seg.log_value(np.log(radii[mask])))
        return out

    def clip(self, lo: float, hi: float) -> list[tuple[float, float, ProfileSegment]]:
        r"""Return the pieces intersected with :math:`(lo, hi]`.

        Parameters
        ----------
        lo : `float`
            left end
        hi : `float`
            right end

        Returns
        -------
        `list`\[`tuple`\[`float`, `float`, `ProfileSegment`\]\]
            non-empty intersections as (left, right, piece)
        """
        pieces = []
        for seg in self.segments():
            a = max(seg.lo, lo)
            b = min(seg.hi, hi)
            if a < b:
                pieces.append((a, b, seg))
        return pieces


class IndicatorProfile(RadialProfile):
    """Indicator of the radial interval :math:`(lo, hi]`."""

    def __init__(self, lo: float = 0.0, hi: float = math.inf) -> None:
        if not 0 <= lo < hi:
            msg = f"Indicator interval must satisfy 0 <= lo < hi, got ({lo}, {hi})."
            raise ValueError(msg)
        self.__lo = float(lo)
        self.__hi = float(hi)

    @property
    def lo(self) -> float:
        """Return the left end."""
        return self.__lo

    @property
    def hi(self) -> float:
        """Return the right end."""
        return self.__hi

    @typing_extensions.override
    def segments(self) -> tuple[ProfileSegment, ...]:
        return (ProfileSegment(self.__lo, self.__hi, 1.0),)

    @property
    @typing_extensions.override
    def monotonicity(self) -> Monotonicity:
        if self.__lo == 0:
            return Monotonicity.DECREASING
        if math.isinf(self.__hi):
            return Monotonicity.INCREASING
        return Monotonicity.NONE

    @typing_extensions.override
    def to_dict(self) -> dict[str, object]:
        return {"kind": "indicator", "lo": self.__lo, "hi": self.__hi}


def constant_profile() -> IndicatorProfile:
    r"""Return :math:`\rho \equiv 1`.

    Returns
    -------
    `IndicatorProfile`
        indicator of :math:`(0, \infty)`
    """
    return IndicatorProfile(0.0, math.inf)


def small_jump_profile() -> IndicatorProfile:
    r"""Return :math:`\rho = 1_{(0,1]}`.

    Returns
    -------
    `IndicatorProfile`
        indicator of :math:`(0, 1]`
    """
    return IndicatorProfile(0.0, 1.0)


def large_jump_profile() -> IndicatorProfile:
    r"""Return :math:`\rho = 1_{[1,\infty)}`.

    Returns
    -------
    `IndicatorProfile`
        indicator of :math:`[1, \infty)`
    """
    return IndicatorProfile(1.0, math.inf)


class TabulatedProfile(RadialProfile):
    r"""Strictly positive profile tabulated on a radial grid.

    Values are interpolated linearly in log-log coordinates, held constant below the
    first node, and continued beyond the last node R by the tail
    :math:`\rho(R)(r/R)^{s}(1+\log(r/R))^{-q}` unless ``truncate`` is set.

    Parameters
    ----------
    radii : `numpy.typing.ArrayLike`
        strictly increasing positive radii, at least two
    values : `numpy.typing.ArrayLike`
        strictly positive profile values
    monotonicity : `Monotonicity`, optional
        claimed monotonicity, checked on the grid, by default `Monotonicity.NONE`
    tail_slope : `float` | None, optional
        tail power s, by default the slope of the last table piece
    tail_log_power : `float`, optional
        tail logarithmic power q >= 0, by default 0
    truncate : `bool`, optional
        whether the profile vanishes beyond the last node, by default False
    """

    def __init__(
        self,
        radii: ArrayLike,
        values: ArrayLike,
        *,
        monotonicity: Monotonicity = Monotonicity.NONE,
        tail_slope: float | None = None,
        tail_log_power: float = 0.0,
        truncate: bool = False,
    ) -> None:
        r = np.asarray(radii, dtype=np.float64)
        v = np.asarray(values, dtype=np.float64)
        if r.ndim != 1 or r.shape != v.shape or r.size < 2:  # noqa: PLR2004
            msg = "Tabulated profile needs two 1-D arrays of equal length >= 2."
            raise ValueError(msg)
        if r[0] <= 0 or np.any(np.diff(r) <= 0):
            msg = "Tabulated radii must be positive and strictly increasing."
            raise ValueError(msg)
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            msg = "Tabulated profile values must be finite and strictly positive."
            raise ValueError(msg)
        if tail_log_power < 0:
            msg = f"Tail logarithmic power must be non-negative, got {tail_log_power}."
            raise ValueError(msg)
        slopes = np.diff(np.log(v)) / np.diff(np.log(r))
        self.__radii = r
        self.__values = v
        self.__slopes = slopes
        self.__tail_slope = float(slopes[-1]) if tail_slope is None else float(tail_slope)
        self.__tail_log_power = float(tail_log_power)
        self.__truncate = truncate
        self.__monotonicity = monotonicity
        self._check_monotonicity()

    @classmethod
    def from_file(cls, path: str | Path, **kwargs: object) -> TabulatedProfile:
        """Load a profile from a two-column text table (radius, value).

        Parameters
        ----------
        path : `str` | `pathlib.Path`
            path of the table
        **kwargs : `object`
            keyword arguments forwarded to `TabulatedProfile`

        Returns
        -------
        `TabulatedProfile`
            loaded profile

        Raises
        ------
        ValueError
            if the table does not have two columns
        """
        table = np.loadtxt(path, dtype=np.float64, ndmin=2)
        if table.shape[1] != 2:  # noqa: PLR2004
            msg = f"Profile table must have two columns, got {table.shape[1]}."
            raise ValueError(msg)
        return cls(table[:, 0], table[:, 1], **kwargs)  # type: ignore[arg-type]

    def _check_monotonicity(self) -> None:
        diffs = np.diff(self.__values)
        s, q = self.__tail_slope, self.__tail_log_power
        tail = self.__truncate
        if self.__monotonicity == Monotonicity.DECREASING:
            ok = bool(np.all(diffs <= 0)) and (tail or s <= 0)
        elif self.__monotonicity == Monotonicity.INCREASING:
            # a positive tail slope dominates the log factor only when s >= q
            ok = bool(np.all(diffs >= 0)) and not tail and s >= q
        else:
            ok = True
        if not ok:
            msg = f"Tabulated profile is not {self.__monotonicity.name.lower()} on its grid."
            raise ValueError(msg)

    @property
    def radii(self) -> NDArray[np.float64]:
        r"""Return the table radii."""
        return self.__radii.copy()

    @property
    def values(self) -> NDArray[np.float64]:
        r"""Return the table values."""
        return self.__values.copy()

    @property
    def tail_slope(self) -> float:
        """Return the tail power."""
        return self.__tail_slope

    @property
    def tail_log_power(self) -> float:
        """Return the tail logarithmic power."""
        return self.__tail_log_power

    @typing_extensions.override
    def segments(self) -> tuple[ProfileSegment, ...]:
        r, v = self.__radii, self.__values
        pieces = [ProfileSegment(0.0, float(r[0]), float(v[0]))]
        pieces.extend(
            ProfileSegment(float(r[i]), float(r[i + 1]), float(v[i]), float(self.__slopes[i]))
            for i in range(r.size - 1)
        )
        if not self.__truncate:
            pieces.append(
                ProfileSegment(float(r[-1]), math.inf, float(v[-1]), self.__tail_slope, self.__tail_log_power)
            )
        return tuple(pieces)

    @property
    @typing_extensions.override
    def monotonicity(self) -> Monotonicity:
        return self.__monotonicity

    @typing_extensions.override
    def to_dict(self) -> dict[str, object]:
        return {
            "kind": "tabulated",
            "radii": self.__radii.tolist(),
            "values": self.__values.tolist(),
            "monotonicity": self.__monotonicity.name.lower(),
            "tail_slope": self.__tail_slope,
            "tail_log_power": self.__tail_log_power,
            "truncate": self.__truncate,
        }


class RadialLevyMeasure:
    r"""Lévy measure :math:`\nu(dz) = k(|z|)\rho(|z|)|z|^{-d-\alpha}dz` with :math:`\kappa_1 \le k \le \kappa_2`.

    Without a modulation ``kappa_profile`` the density uses :math:`k \equiv \kappa_2`.

    Parameters
    ----------
    dim : `int`
        dimension d
    alpha : `float`
        stability index in (0, 2)
    kappa1 : `float`, optional
        lower density constant, by default 1
    kappa2 : `float`, optional
        upper density constant, by default 1
    rho : `RadialProfile` | None, optional
        radial profile, by default :math:`\rho \equiv 1`
    rho_monotonicity : `Monotonicity` | None, optional
        monotonicity flag, checked on a log grid, by default that of ``rho``
    kappa_profile : `collections.abc.Callable` | None, optional
        radial modulation k with values in :math:`[\kappa_1, \kappa_2]`
    """

    def __init__(
        self,
        dim: int,
        alpha: float,
        kappa1: float = 1.0,
        kappa2: float = 1.0,
        rho: RadialProfile | None = None,
        rho_monotonicity: Monotonicity | None = None,
        kappa_profile: Callable[[NDArray[np.float64]], NDArray[np.float64]] | None = None,
    ) -> None:
        if dim < 1:
            msg = f"Dimension must be positive, got {dim}."
            raise ValueError(msg)
        if not 0 < alpha < 2:  # noqa: PLR2004
            msg = f"Stability index must lie in (0, 2), got {alpha}."
            raise ValueError(msg)
        if not 0 < kappa1 <= kappa2:
            msg = f"Density constants must satisfy 0 < kappa1 <= kappa2, got {kappa1}, {kappa2}."
            raise ValueError(msg)
        self.__dim = int(dim)
        self.__alpha = float(alpha)
        self.__kappa1 = float(kappa1)
        self.__kappa2 = float(kappa2)
        self.__rho = constant_profile() if rho is None else rho
        self.__rho_monotonicity = self.__rho.monotonicity if rho_monotonicity is None else rho_monotonicity
        self.__kappa_profile = kappa_profile
        self.__sphere_area = unit_sphere_area(self.__dim)
        self._check_profile()

    def _check_profile(self) -> None:
        grid = np.logspace(-8, 8, 1601)
        values = self.__rho(grid)
        diffs = np.diff(values)
        tol = 1e-12 * float(np.max(values, initial=1.0))
        if self.__rho_monotonicity == Monotonicity.DECREASING and np.any(diffs > tol):
            msg = "Radial profile is flagged decreasing but increases on the grid."
            raise ValueError(msg)
        if self.__rho_monotonicity == Monotonicity.INCREASING and np.any(diffs < -tol):
            msg = "Radial profile is flagged increasing but decreases on the grid."
            raise ValueError(msg)
        if self.__kappa_profile is not None:
            k = np.asarray(self.__kappa_profile(grid), dtype=np.float64)
            if np.any(k < self.__kappa1 * (1 - 1e-12)) or np.any(k > self.__kappa2 * (1 + 1e-12)):
                msg = "Density modulation must take values in [kappa1, kappa2]."
                raise ValueError(msg)
        last = self.__rho.segments()[-1]
        if math.isinf(last.hi) and not _tail_converges(last, self.__alpha, 0.0, log_kind=False):
            msg = "The measure has infinite mass away from the origin."
            raise ValueError(msg)

    @property
    def dim(self) -> int:
        """Return the dimension."""
        return self.__dim

    @property
    def alpha(self) -> float:
        """Return the stability index."""
        return self.__alpha

    @property
    def kappa1(self) -> float:
        """Return the lower density constant."""
        return self.__kappa1

    @property
    def kappa2(self) -> float:
        """Return the upper density constant."""
        return self.__kappa2

    @property
    def rho(self) -> RadialProfile:
        """Return the radial profile."""
        return self.__rho

    @property
    def rho_monotonicity(self) -> Monotonicity:
        """Return the monotonicity flag of the profile."""
        return self.__rho_monotonicity

    @property
    def is_modulated(self) -> bool:
        """Return whether a radial modulation is attached."""
        return self.__kappa_profile is not None

    @property
    def sphere_area(self) -> float:
        r"""Return :math:`|S^{d-1}|`."""
        return self.__sphere_area

    @property
    def is_stable(self) -> bool:
        r"""Return whether the measure is an isotropic stable Lévy measure."""
        segs = self.__rho.segments()
        return (
            len(segs) == 1
            and segs[0].is_flat
            and segs[0].lo == 0
            and math.isinf(segs[0].hi)
            and self.__kappa1 == self.__kappa2
            and self.__kappa_profile is None
        )

    def modulation(self, r: ArrayLike) -> NDArray[np.float64]:
        r"""Return the modulation k at radii ``r``.

        Parameters
        ----------
        r : `numpy.typing.ArrayLike`
            radii

        Returns
        -------
        `numpy.typing.NDArray`\[`numpy.float64`\]
            modulation values
        """
        radii = np.asarray(r, dtype=np.float64)
        if self.__kappa_profile is None:
            return np.full_like(radii, self.__kappa2)
        return np.asarray(self.__kappa_profile(radii), dtype=np.float64)

    def density(self, z: ArrayLike) -> NDArray[np.float64]:
        r"""Return :math:`d\nu/dz` at points ``z``.

        Parameters
        ----------
        z : `numpy.typing.ArrayLike`
            points of shape (n, d) or (d,)

        Returns
        -------
        `numpy.typing.NDArray`\[`numpy.float64`\]
            density values, shape (n,) or ()
        """
        points = np.asarray(z, dtype=np.float64)
        r = np.linalg.norm(points, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            values = self.modulation(r) * self.__rho(r) * r ** (-self.__dim - self.__alpha)
        return np.where(r > 0, values, 0.0)

    def to_dict(self) -> dict[str, object]:
        r"""Return a serializable description of the measure.

        Returns
        -------
        `dict`\[`str`, `object`\]
            parameters of the measure
        """
        return {
            "dim": self.__dim,
            "alpha": self.__alpha,
            "kappa1": self.__kappa1,
            "kappa2": self.__kappa2,
            "rho": self.__rho.to_dict(),
            "rho_monotonicity": self.__rho_monotonicity.name.lower(),
            "modulated": self.is_modulated,
        }


def _tail_converges(seg: ProfileSegment, alpha: float, degree: float, *, log_kind: bool) -> bool:
    """Check convergence at infinity of a moment integral on an unbounded piece."""
    exponent = seg.slope - alpha + degree
    if exponent < -EXPONENT_ATOL:
        return True
    if exponent > EXPONENT_ATOL:
        return False
    return seg.log_power - (1.0 if log_kind else 0.0) > 1.0


def _power_integral(a: float, b: float, q: float) -> float:
    r"""Return :math:`\int_a^b r^q dr` for convergent cases."""
    if abs(q + 1) < EXPONENT_ATOL:
        return math.log(b / a)
    if math.isinf(b):
        return -(a ** (q + 1)) / (q + 1)
    return (b ** (q + 1) - a ** (q + 1)) / (q + 1)


def _log_tail_antiderivative(a: float, c: float, alpha: float) -> float:
    r"""Return :math:`\int_a^\infty \log(1+cr) r^{-1-\alpha} dr`."""
    if math.isinf(a):
        return 0.0
    hyp = float(special.hyp2f1(1.0, alpha, alpha + 1.0, -1.0 / (c * a)))
    return a ** (-alpha) / alpha * (math.log1p(c * a) + hyp / alpha)


def _quad(integrand: Callable[[float], float], lo: float, hi: float) -> tuple[float, float]:
    """Run adaptive quadrature and translate its diagnostics.

    Raises
    ------
    DivergentIntegral
        if the quadrature reports a probably divergent integral
    """
    result = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT, full_output=1)
    value, abserr = float(result[0]), float(result[1])
    if len(result) > 3:  # noqa: PLR2004
        message = str(result[3])
        if "divergent" in message:
            msg = f"Quadrature on ({lo}, {hi}) reports a divergent integral: {message}"
            raise DivergentIntegral(msg)
        if abserr > 1e-6 * max(abs(value), 1e-300):
            logger.warning("Quadrature on (%g, %g) is inaccurate: %s", lo, hi, message)
            warnings.warn(f"Quadrature on ({lo}, {hi}) is inaccurate: {message}", RuntimeWarning, stacklevel=3)
    return value, abserr


def _piece_quadrature(
    measure: RadialLevyMeasure,
    seg: ProfileSegment,
    a: float,
    b: float,
    log_h: Callable[[float], float] | None,
    h: Callable[[float], float] | None,
) -> tuple[float, float]:
    """Integrate h(r) k(r) rho(r) r^(-1-alpha) dr over (a, b] in log-radius."""
    alpha = measure.alpha
    modulated = measure.is_modulated
    scale = 1.0 if modulated else measure.kappa2

    def integrand(u: float) -> float:
        log_w = float(seg.log_value(np.asarray([u]))[0]) - alpha * u
        if log_h is not None:
            log_w += log_h(u)
        weight = math.exp(log_w) if log_w < _U_MAX else math.inf
        if weight == 0:
            return 0.0
        r = math.exp(min(u, _U_MAX))
        weight *= float(measure.modulation(np.asarray([r]))[0]) if modulated else scale
        return weight if h is None else weight * h(r)

    lo_u = -math.inf if a == 0 else math.log(a)
    hi_u = math.inf if math.isinf(b) else math.log(b)
    return _quad(integrand, lo_u, hi_u)


def _region(kind: MomentKind, eps: float) -> tuple[float, float]:
    if kind == MomentKind.SMALL_SQ:
        return 0.0, eps
    if kind == MomentKind.MID_ABS:
        return eps, 1.0
    return eps, math.inf


def _degree(kind: MomentKind, p: float | None) -> float:
    if kind == MomentKind.SMALL_SQ:
        return 2.0
    if kind == MomentKind.MID_ABS:
        return 1.0
    if kind == MomentKind.TAIL_POWER:
        if p is None:
            msg = "tail_power needs an exponent p."
            raise ValueError(msg)
        return float(p)
    return 0.0


def moment_integral(
    measure: RadialLevyMeasure,
    kind: MomentKind,
    eps: float,
    *,
    c: float = 1.0,
    p: float | None = None,
    method: IntegrationMethod = IntegrationMethod.AUTO,
) -> float:
    r"""Return a moment integral of the measure over a radial region.

    ================  ======================================  ==========================
    kind              integrand                               region
    ================  ======================================  ==========================
    SMALL_SQ          :math:`|z|^2`                           :math:`|z| \le \varepsilon`
    MID_ABS           :math:`|z|`                             :math:`\varepsilon < |z| \le 1`
    TAIL_MASS         :math:`1`                               :math:`|z| > \varepsilon`
    TAIL_LOG          :math:`\log(1+c|z|)`                    :math:`|z| > \varepsilon`
    TAIL_POWER        :math:`|z|^p`                           :math:`|z| > \varepsilon`
    ================  ======================================  ==========================

    Closed forms are used for pieces without logarithmic factors (and, for TAIL_LOG,
    flat pieces) when no modulation is attached; otherwise adaptive quadrature in
    log-radius runs piece by piece.

    Parameters
    ----------
    measure : `RadialLevyMeasure`
        Lévy measure
    kind : `MomentKind`
        integral kind
    eps : `float`
        radius :math:`\varepsilon > 0`
    c : `float`, optional
        scale inside the logarithm for TAIL_LOG, by default 1
    p : `float` | None, optional
        exponent for TAIL_POWER
    method : `IntegrationMethod`, optional
        evaluation method, by default `IntegrationMethod.AUTO`

    Returns
    -------
    `float`
        non-negative integral value

    Raises
    ------
    InvalidRegion
        if eps is not positive
    DivergentIntegral
        if the integral is infinite
    ValueError
        if a closed form is requested but not available
    """
    if not eps > 0:
        msg = f"Region radius must be positive, got {eps}."
        raise InvalidRegion(msg)
    if c < 0:
        msg = f"Logarithm scale must be non-negative, got {c}."
        raise ValueError(msg)
    log_kind = kind == MomentKind.TAIL_LOG
    if log_kind and c == 0:
        return 0.0
    degree = _degree(kind, p)
    lo, hi = _region(kind, eps)
    pieces = measure.rho.clip(lo, hi)
    alpha = measure.alpha
    for a, b, seg in pieces:
        if math.isinf(b) and not _tail_converges(seg, alpha, degree, log_kind=log_kind):
            msg = f"{kind.name.lower()} integral diverges at infinity for alpha={alpha}."
            raise DivergentIntegral(msg)
        if a == 0 and degree - alpha <= 0:
            msg = f"{kind.name.lower()} integral diverges at the origin for alpha={alpha}."
            raise DivergentIntegral(msg)

    closed_ok = not measure.is_modulated and all(
        seg.is_power and (not log_kind or seg.is_flat) for _, _, seg in pieces
    )
    if method == IntegrationMethod.CLOSED_FORM and not closed_ok:
        msg = "No closed form is available for this measure and integral kind."
        raise ValueError(msg)
    use_closed = closed_ok and method != IntegrationMethod.QUADRATURE

    total = 0.0
    for a, b, seg in pieces:
        if use_closed:
            total += measure.kappa2 * _closed_piece(seg, a, b, alpha, degree, c, log_kind=log_kind)
        else:
            if log_kind:
                log_c = math.log(c)
                value, _ = _piece_quadrature(
                    measure, seg, a, b, None, lambda r, log_c=log_c: float(np.logaddexp(0.0, log_c + math.log(r)))
                )
            else:
                value, _ = _piece_quadrature(measure, seg, a, b, lambda u: degree * u, None)
            total += value
    return measure.sphere_area * total


def _closed_piece(
    seg: ProfileSegment, a: float, b: float, alpha: float, degree: float, c: float, *, log_kind: bool
) -> float:
    if log_kind:
        return seg.coef * (_log_tail_antiderivative(a, c, alpha) - _log_tail_antiderivative(b, c, alpha))
    exponent = degree - 1.0 - alpha
    if seg.lo == 0:
        return seg.coef * _power_integral(a, b, exponent)
    return seg.coef * seg.lo ** (exponent + 1) * _power_integral(a / seg.lo, b / seg.lo, seg.slope + exponent)


def small_sq(measure: RadialLevyMeasure, eps: float, method: IntegrationMethod = IntegrationMethod.AUTO) -> float:
    r"""Return :math:`\int_{|z|\le\varepsilon}|z|^2\nu(dz)`; see `moment_integral`."""
    return moment_integral(measure, MomentKind.SMALL_SQ, eps, method=method)


def mid_abs(measure: RadialLevyMeasure, eps: float, method: IntegrationMethod = IntegrationMethod.AUTO) -> float:
    r"""Return :math:`\int_{\varepsilon<|z|\le 1}|z|\nu(dz)`; see `moment_integral`."""
    return moment_integral(measure, MomentKind.MID_ABS, eps, method=method)


def tail_mass(measure: RadialLevyMeasure, eps: float, method: IntegrationMethod = IntegrationMethod.AUTO) -> float:
    r"""Return :math:`\nu(|z|>\varepsilon)`; see `moment_integral`."""
    return moment_integral(measure, MomentKind.TAIL_MASS, eps, method=method)


def tail_log(
    measure: RadialLevyMeasure, eps: float, c: float = 1.0, method: IntegrationMethod = IntegrationMethod.AUTO
) -> float:
    r"""Return :math:`\int_{|z|>\varepsilon}\log(1+c|z|)\nu(dz)`; see `moment_integral`."""
    return moment_integral(measure, MomentKind.TAIL_LOG, eps, c=c, method=method)


def tail_power(
    measure: RadialLevyMeasure, eps: float, p: float, method: IntegrationMethod = IntegrationMethod.AUTO
) -> float:
    r"""Return :math:`\int_{|z|>\varepsilon}|z|^p\nu(dz)`; see `moment_integral`."""
    return moment_integral(measure, MomentKind.TAIL_POWER, eps, p=p, method=method)


def radial_integral(
    measure: RadialLevyMeasure,
    func: Callable[[float], float],
    lo: float,
    hi: float = math.inf,
) -> Estimate:
    r"""Return :math:`\int_{lo<|z|\le hi} h(|z|)\nu(dz)` for a radial function h.

    The integral runs piece by piece in log-radius with adaptive quadrature; a
    direction average of a non-radial function is a valid ``func``.

    Parameters
    ----------
    measure : `RadialLevyMeasure`
        Lévy measure
    func : `collections.abc.Callable`\[\[`float`\], `float`\]
        radial function h
    lo : `float`
        inner radius, 0 allowed
    hi : `float`, optional
        outer radius, by default infinity

    Returns
    -------
    `Estimate`
        value with the quadrature error estimate

    Raises
    ------
    InvalidRegion
        if lo is negative or lo >= hi
    """
    if lo < 0 or lo >= hi:
        msg = f"Invalid radial region ({lo}, {hi}]."
        raise InvalidRegion(msg)
    total, err = 0.0, 0.0
    for a, b, seg in measure.rho.clip(lo, hi):
        value, abserr = _piece_quadrature(measure, seg, a, b, None, func)
        total += value
        err += abserr
    return Estimate(measure.sphere_area * total, measure.sphere_area * err)


def radial_tail_sf(measure: RadialLevyMeasure, delta: float, x: ArrayLike) -> NDArray[np.float64]:
    r"""Return :math:`P(|Z| > x)` for Z drawn by `sample_jump_above` with cutoff :math:`\delta`.

    Parameters
    ----------
    measure : `RadialLevyMeasure`
        Lévy measure
    delta : `float`
        cutoff
    x : `numpy.typing.ArrayLike`
        radii

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.float64`\]
        survival probabilities
    """
    total = tail_mass(measure, delta)
    radii = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return np.asarray([tail_mass(measure, max(float(r), delta)) / total for r in radii], dtype=np.float64)


def _envelope_pieces(measure: RadialLevyMeasure, delta: float) -> list[tuple[float, float, ProfileSegment, float]]:
    """Return pieces above delta with their envelope masses (density kappa2 * rho)."""
    out = []
    alpha = measure.alpha
    for a, b, seg in measure.rho.clip(delta, math.inf):
        if seg.is_power:
            mass = _closed_piece(seg, a, b, alpha, 0.0, 1.0, log_kind=False)
        else:

            def integrand(u: float, seg: ProfileSegment = seg) -> float:
                return math.exp(float(seg.log_value(np.asarray([u]))[0]) - alpha * u)

            mass, _ = _quad(integrand, math.log(a), math.inf if math.isinf(b) else math.log(b))
        if mass > 0:
            out.append((a, b, seg, measure.kappa2 * mass))
    return out


def _sample_piece_radii(
    seg: ProfileSegment, a: float, b: float, alpha: float, size: int, rng: Generator
) -> NDArray[np.float64]:
    """Sample radii with density proportional to rho(r) r^(-1-alpha) on (a, b]."""
    if seg.is_power:
        e = seg.slope - alpha
        u = rng.random(size)
        if abs(e) < EXPONENT_ATOL:
            return a * (b / a) ** u
        if math.isinf(b):
            return a * (1.0 - u) ** (1.0 / e)
        return (a**e + u * (b**e - a**e)) ** (1.0 / e)
    # log-corrected tail, in v = log(r / lo)
    v0 = math.log(a / seg.lo)
    beta = alpha - seg.slope
    q = seg.log_power
    if beta <= EXPONENT_ATOL:
        # density (1+v)^(-q) on v >= v0: 1+v is Pareto with index q-1
        v = (1.0 + v0) * (1.0 - rng.random(size)) ** (-1.0 / (q - 1.0)) - 1.0
        return seg.lo * np.exp(np.minimum(v, _U_MAX))
    out = np.empty(size, dtype=np.float64)
    filled = 0
    while filled < size:
        need = size - filled
        v = v0 + rng.exponential(1.0 / beta, need)
        accept = rng.random(need) < ((1.0 + v0) / (1.0 + v)) ** q
        got = v[accept][: size - filled]
        out[filled : filled + got.size] = seg.lo * np.exp(np.minimum(got, _U_MAX))
        filled += got.size
    return out


def sample_jump_above(
    measure: RadialLevyMeasure,
    delta: float,
    rng: Generator | None = None,
    size: int | None = None,
) -> NDArray[np.float64]:
    r"""Sample from :math:`\nu` restricted to :math:`\{|z|>\delta\}`, normalized.

    Radii come from the inverse CDF of each power piece of the profile (pieces are
    picked by mass); log-corrected tails use exact Pareto draws or exponential
    proposals with rejection. A modulation is handled by rejection against the
    :math:`\kappa_2` envelope, whose acceptance rate is at least :math:`\kappa_1/\kappa_2`.
    Directions are uniform on the sphere.

    Parameters
    ----------
    measure : `RadialLevyMeasure`
        Lévy measure
    delta : `float`
        cutoff :math:`\delta > 0`
    rng : `numpy.random.Generator` | None, optional
        random-number generator, by default None
    size : `int` | None, optional
        number of samples, by default a single point

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.float64`\]
        one point of shape (d,) or an array of shape (size, d)

    Raises
    ------
    InvalidRegion
        if delta is not positive
    EmptyTail
        if the profile vanishes above delta
    """
    if not delta > 0:
        msg = f"Cutoff must be positive, got {delta}."
        raise InvalidRegion(msg)
    rng = ensure_rng(rng)
    n = 1 if size is None else int(size)
    pieces = _envelope_pieces(measure, delta)
    if not pieces:
        msg = f"The measure has no mass above {delta}."
        raise EmptyTail(msg)
    masses = np.asarray([m for *_, m in pieces])
    probs = masses / masses.sum()

    def draw(count: int) -> NDArray[np.float64]:
        which = rng.choice(len(pieces), size=count, p=probs)
        radii = np.empty(count, dtype=np.float64)
        for j, (a, b, seg, _) in enumerate(pieces):
            mask = which == j
            k = int(mask.sum())
            if k:
                radii[mask] = _sample_piece_radii(seg, a, b, measure.alpha, k, rng)
        return radii

    radii = draw(n)
    if measure.is_modulated:
        pending = np.flatnonzero(rng.random(n) >= measure.modulation(radii) / measure.kappa2)
        while pending.size:
            radii[pending] = draw(pending.size)
            reject = rng.random(pending.size) >= measure.modulation(radii[pending]) / measure.kappa2
            pending = pending[reject]
    points = radii[:, None] * uniform_directions(rng, n, measure.dim)
    return points[0] if size is None else points
