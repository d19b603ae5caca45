from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
import pytest
from scipy import stats

from jumpentropy.common import DivergentIntegral, EmptyTail, IntegrationMethod, InvalidRegion, MomentKind, Monotonicity
from jumpentropy.levy_measure import (
    RadialLevyMeasure,
    TabulatedProfile,
    constant_profile,
    large_jump_profile,
    mid_abs,
    moment_integral,
    radial_integral,
    radial_tail_sf,
    sample_jump_above,
    small_jump_profile,
    small_sq,
    tail_log,
    tail_mass,
    tail_power,
)

if TYPE_CHECKING:
    from pathlib import Path


@pytest.fixture
def cauchy_1d() -> RadialLevyMeasure:
    return RadialLevyMeasure(1, 1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def test_small_sq_closed_form(cauchy_1d: RadialLevyMeasure) -> None:
    assert math.isclose(small_sq(cauchy_1d, 1.0), 2.0, rel_tol=1e-12)


def test_tail_mass_closed_form(cauchy_1d: RadialLevyMeasure) -> None:
    assert math.isclose(tail_mass(cauchy_1d, 1.0), 2.0, rel_tol=1e-12)


def test_mid_abs_uses_log_branch(cauchy_1d: RadialLevyMeasure) -> None:
    assert math.isclose(mid_abs(cauchy_1d, 0.1), 2 * math.log(10.0), rel_tol=1e-12)
    assert mid_abs(cauchy_1d, 2.0) == 0.0


def test_small_sq_vanishes_at_origin() -> None:
    measure = RadialLevyMeasure(2, 1.5, 0.5, 2.0)
    values = [small_sq(measure, eps) for eps in (1e-2, 1e-4, 1e-8)]
    assert values[0] > values[1] > values[2]
    assert values[2] < 1e-3


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("dim", [1, 2, 3])
def test_closed_form_matches_quadrature(alpha: float, dim: int) -> None:
    measure = RadialLevyMeasure(dim, alpha, 1.3, 1.3)
    for kind, extra in [
        (MomentKind.SMALL_SQ, {}),
        (MomentKind.MID_ABS, {}),
        (MomentKind.TAIL_MASS, {}),
        (MomentKind.TAIL_LOG, {"c": 2.0}),
        (MomentKind.TAIL_POWER, {"p": alpha / 2}),
    ]:
        closed = moment_integral(measure, kind, 0.3, method=IntegrationMethod.CLOSED_FORM, **extra)  # type: ignore[arg-type]
        quad = moment_integral(measure, kind, 0.3, method=IntegrationMethod.QUADRATURE, **extra)  # type: ignore[arg-type]
        assert math.isclose(closed, quad, rel_tol=1e-8), kind


def test_monotone_in_region(cauchy_1d: RadialLevyMeasure) -> None:
    eps = np.geomspace(1e-3, 10.0, 9)
    sq = [small_sq(cauchy_1d, e) for e in eps]
    mass = [tail_mass(cauchy_1d, e) for e in eps]
    assert np.all(np.diff(sq) >= 0)
    assert np.all(np.diff(mass) <= 0)


def test_tail_power_divergence(cauchy_1d: RadialLevyMeasure) -> None:
    assert math.isclose(tail_power(cauchy_1d, 1.0, 0.5), 4.0, rel_tol=1e-12)
    with pytest.raises(DivergentIntegral):
        tail_power(cauchy_1d, 1.0, 1.0)
    with pytest.raises(DivergentIntegral):
        tail_power(cauchy_1d, 1.0, 1.5)


def test_invalid_region(cauchy_1d: RadialLevyMeasure) -> None:
    with pytest.raises(InvalidRegion):
        small_sq(cauchy_1d, 0.0)
    with pytest.raises(InvalidRegion):
        tail_mass(cauchy_1d, -1.0)
    with pytest.raises(InvalidRegion):
        radial_integral(cauchy_1d, lambda r: r, 2.0, 1.0)


def test_small_jump_profile_has_no_tail() -> None:
    measure = RadialLevyMeasure(1, 1.5, rho=small_jump_profile())
    assert tail_mass(measure, 1.0) == 0.0
    assert tail_power(measure, 1.0, 3.0) == 0.0
    with pytest.raises(EmptyTail):
        sample_jump_above(measure, 1.0, np.random.default_rng(0))


def test_large_jump_profile_is_finite_at_origin() -> None:
    measure = RadialLevyMeasure(1, 1.0, rho=large_jump_profile())
    assert small_sq(measure, 1.0) == 0.0
    assert math.isclose(tail_mass(measure, 1e-3), 2.0, rel_tol=1e-12)


@pytest.mark.parametrize(("dim", "alpha"), [(1, 0.5), (2, 1.5)])
def test_constructor_validation(dim: int, alpha: float) -> None:
    RadialLevyMeasure(dim, alpha)
    with pytest.raises(ValueError, match="Stability index"):
        RadialLevyMeasure(dim, 2.5)
    with pytest.raises(ValueError, match="kappa1 <= kappa2"):
        RadialLevyMeasure(dim, alpha, 2.0, 1.0)


def test_tabulated_profile_moments() -> None:
    profile = TabulatedProfile([1.0, 10.0], [1.0, 0.1], monotonicity=Monotonicity.DECREASING)
    measure = RadialLevyMeasure(1, 1.0, rho=profile)
    # rho(r) = min(1, 1/r)
    assert math.isclose(tail_mass(measure, 1.0), 1.0, rel_tol=1e-9)
    assert math.isclose(tail_power(measure, 1.0, 1.5), 4.0, rel_tol=1e-9)
    assert np.allclose(profile(np.array([0.5, 2.0, 100.0])), [1.0, 0.5, 0.01])


def test_tabulated_monotonicity_flag_is_checked() -> None:
    with pytest.raises(ValueError, match="not decreasing"):
        TabulatedProfile([1.0, 10.0], [1.0, 2.0], monotonicity=Monotonicity.DECREASING)
    with pytest.raises(ValueError, match="strictly increasing"):
        TabulatedProfile([1.0, 1.0], [1.0, 2.0])


def test_tabulated_profile_from_file(tmp_path: Path) -> None:
    table = tmp_path / "rho.txt"
    table.write_text("0.5 1.0\n1.0 1.0\n4.0 0.25\n", encoding="utf-8")
    profile = TabulatedProfile.from_file(table, monotonicity=Monotonicity.DECREASING)
    assert np.allclose(profile.radii, [0.5, 1.0, 4.0])
    assert profile.monotonicity == Monotonicity.DECREASING


def test_increasing_profile_with_infinite_mass_is_rejected() -> None:
    profile = TabulatedProfile([1.0, 10.0], [1.0, 100.0], monotonicity=Monotonicity.INCREASING)
    with pytest.raises(ValueError, match="infinite mass"):
        RadialLevyMeasure(1, 1.0, rho=profile)


def test_tail_log_of_log_corrected_tail() -> None:
    # density ~ 1/(r log^2 r): finite mass, divergent log moment
    profile = TabulatedProfile([1.0, 10.0], [1.0, 10.0 / (1 + math.log(10.0)) ** 2], tail_slope=1.0, tail_log_power=2.0)
    measure = RadialLevyMeasure(1, 1.0, rho=profile)
    assert math.isfinite(tail_mass(measure, 1.0))
    with pytest.raises(DivergentIntegral):
        tail_log(measure, 1.0)


def test_modulation_bounds_are_checked() -> None:
    with pytest.raises(ValueError, match="modulation"):
        RadialLevyMeasure(1, 1.0, 1.0, 1.5, kappa_profile=lambda r: np.full_like(r, 2.0))


def test_density() -> None:
    measure = RadialLevyMeasure(2, 1.0, 1.0, 3.0)
    z = np.array([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]])
    assert np.allclose(measure.density(z), [3.0, 3.0 / 8.0, 0.0])


def test_radial_integral_matches_moments() -> None:
    measure = RadialLevyMeasure(3, 1.2, 0.7, 0.9)
    est = radial_integral(measure, lambda r: r * r, 0.0, 0.5)
    assert math.isclose(est.value, small_sq(measure, 0.5), rel_tol=1e-8)
    est = radial_integral(measure, lambda _r: 1.0, 2.0)
    assert math.isclose(est.value, tail_mass(measure, 2.0), rel_tol=1e-8)


def test_modulated_tail_mass() -> None:
    measure = RadialLevyMeasure(1, 1.0, 1.0, 1.5, kappa_profile=lambda r: np.where(r < 2.0, 1.5, 1.0))
    assert measure.is_modulated
    assert math.isclose(tail_mass(measure, 1.0), 2.5, rel_tol=1e-6)


def test_sample_jump_above_tail(cauchy_1d: RadialLevyMeasure, rng: np.random.Generator) -> None:
    n = 200_000
    radii = np.abs(sample_jump_above(cauchy_1d, 1.0, rng, n)[:, 0])
    assert np.all(radii > 1.0)
    for x in (1.5, 2.0, 5.0, 20.0):
        p = 1.0 / x
        se = math.sqrt(p * (1 - p) / n)
        assert abs(np.mean(radii > x) - p) < 3.5 * se


def test_sample_jump_above_single_point(cauchy_1d: RadialLevyMeasure, rng: np.random.Generator) -> None:
    point = sample_jump_above(cauchy_1d, 1.0, rng)
    assert point.shape == (1,)


def test_sample_radii_pass_ks() -> None:
    measure = RadialLevyMeasure(2, 1.5, 0.5, 0.5)
    radii = np.linalg.norm(sample_jump_above(measure, 0.5, np.random.default_rng(3), 100_000), axis=1)
    result = stats.kstest(radii, lambda x: 1.0 - (np.maximum(x, 0.5) / 0.5) ** -1.5)
    assert result.pvalue > 1e-3


def test_sample_isotropic_in_two_dimensions(rng: np.random.Generator) -> None:
    measure = RadialLevyMeasure(2, 1.0)
    points = sample_jump_above(measure, 1.0, rng, 100_000)
    directions = points / np.linalg.norm(points, axis=1, keepdims=True)
    se = math.sqrt(0.5 / 100_000)
    assert np.all(np.abs(directions.mean(axis=0)) < 4 * se)


def test_sample_modulated_by_rejection(rng: np.random.Generator) -> None:
    measure = RadialLevyMeasure(1, 1.0, 1.0, 1.5, kappa_profile=lambda r: np.where(r < 2.0, 1.5, 1.0))
    n = 100_000
    radii = np.abs(sample_jump_above(measure, 1.0, rng, n)[:, 0])
    # mass 0.75 on (1, 2] and 0.5 beyond
    p = 0.4
    assert abs(np.mean(radii > 2.0) - p) < 4 * math.sqrt(p * (1 - p) / n)


def test_radial_tail_sf(cauchy_1d: RadialLevyMeasure) -> None:
    assert np.allclose(radial_tail_sf(cauchy_1d, 1.0, [0.5, 1.0, 4.0]), [1.0, 1.0, 0.25])


def test_profile_helpers() -> None:
    assert constant_profile().is_piecewise_constant
    assert np.array_equal(small_jump_profile()(np.array([0.5, 1.0, 1.5])), [1.0, 1.0, 0.0])
    assert np.array_equal(large_jump_profile()(np.array([0.5, 1.0, 1.5])), [0.0, 0.0, 1.0])
