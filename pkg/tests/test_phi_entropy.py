from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from jumpentropy.common import NoFiniteLimit, NonPositiveInput, NotDissipativeEnough
from jumpentropy.levy_measure import RadialLevyMeasure
from jumpentropy.phi_entropy import (
    PowerPhi,
    TestFunction,
    XLogXPhi,
    bound_constant,
    check_entropy_bound,
    constant_function,
    cosine_bump,
    decay_rate,
    dirichlet_form_gap,
    entropy_decay_curve,
    entropy_estimate,
    gamma_phi,
    gamma_values,
    generator_apply,
    generator_residual,
    generator_values,
    invariant_entropy,
    inverse_quadratic,
    parse_phi,
    psi,
    radial_rule,
    semigroup_entropy,
    shifted_tanh,
)
from jumpentropy.sde_engine import invariant_ensemble, ou_field, simulate
from jumpentropy.stochastic_kernels import NoiseIncrementPlan, SmallJumpMode

PHIS = [XLogXPhi(), PowerPhi(1.0), PowerPhi(1.5), PowerPhi(2.0)]


@pytest.fixture
def grid() -> np.ndarray:
    return np.geomspace(1e-3, 1e3, 41)


@pytest.fixture
def ou_plan() -> NoiseIncrementPlan:
    return NoiseIncrementPlan(RadialLevyMeasure(1, 1.5), small_jump_mode=SmallJumpMode.EXACT_STABLE)


def test_parse_phi() -> None:
    assert isinstance(parse_phi("xlogx"), XLogXPhi)
    assert parse_phi("power:1.5").name == "power:1.5"
    assert parse_phi(" Power(2) ").name == "power:2"
    with pytest.raises(ValueError, match="Invalid power"):
        parse_phi("power:3")
    with pytest.raises(ValueError, match="Unknown Phi"):
        parse_phi("exp")


@pytest.mark.parametrize("phi", PHIS, ids=lambda p: p.name)
def test_phi_convex_and_zero_at_origin(phi: PowerPhi | XLogXPhi, grid: np.ndarray) -> None:
    assert float(phi(0.0)) == 0.0
    mid = phi(0.5 * (grid[:-1] + grid[1:]))
    assert np.all(mid <= 0.5 * (phi(grid[:-1]) + phi(grid[1:])) + 1e-12)


@pytest.mark.parametrize("phi", PHIS, ids=lambda p: p.name)
def test_psi_non_negative(phi: PowerPhi | XLogXPhi, grid: np.ndarray) -> None:
    u, v = np.meshgrid(grid, grid)
    values = psi(phi, u, v)
    assert np.all(values >= -1e-9 * (1.0 + np.abs(u) + np.abs(v)) ** 2)
    assert np.allclose(psi(phi, grid, grid), 0.0, atol=1e-9)


@pytest.mark.parametrize("phi", PHIS, ids=lambda p: p.name)
def test_psi_jointly_convex(phi: PowerPhi | XLogXPhi) -> None:
    rng = np.random.default_rng(17)
    u1, v1, u2, v2 = rng.uniform(0.01, 10.0, size=(4, 1000))
    mid = psi(phi, 0.5 * (u1 + u2), 0.5 * (v1 + v2))
    assert np.all(mid <= 0.5 * (psi(phi, u1, v1) + psi(phi, u2, v2)) + 1e-9)


def test_psi_values(grid: np.ndarray) -> None:
    assert float(psi(XLogXPhi(), 2.0, 1.0)) == pytest.approx(2 * math.log(2) - 1, abs=1e-6)
    u, v = np.meshgrid(grid, grid)
    assert np.allclose(psi(PowerPhi(2.0), u, v), (u - v) ** 2)
    assert np.all(psi(XLogXPhi(), u, v) <= (u - v) * np.log(u / v) + 1e-9)
    assert float(psi(XLogXPhi(), 0.0, 1.0)) == pytest.approx(1.0)


def test_psi_rejects_non_positive() -> None:
    with pytest.raises(NonPositiveInput):
        psi(XLogXPhi(), 1.0, 0.0)
    with pytest.raises(NonPositiveInput):
        psi(PowerPhi(2.0), -1.0, 1.0)


def test_test_function_bounds() -> None:
    rng = np.random.default_rng(0)
    for f in (shifted_tanh(2), inverse_quadratic(2), cosine_bump(2), constant_function(3.0, 2)):
        assert f.check_bounds(rng)
    liar = TestFunction(lambda x: 2.0 + np.sin(x[..., 0]), 1, 1.5, 3.0)
    assert not liar.check_bounds(rng)
    with pytest.raises(ValueError, match="Bounds"):
        TestFunction(lambda x: x[..., 0], 1, 2.0, 1.0)


def test_gamma_constant_function_is_zero() -> None:
    value = gamma_phi(XLogXPhi(), constant_function(2.0), [0.4], RadialLevyMeasure(1, 1.5))
    assert value.value == 0.0


def test_gamma_matches_quadrature() -> None:
    measure = RadialLevyMeasure(1, 1.0)
    f = shifted_tanh(1, shift=2.0)

    def integrand(z: float) -> float:
        return math.tanh(z) ** 2 / (z * z)

    half, _ = integrate.quad(integrand, 0.0, math.inf, limit=200)
    value = gamma_phi(PowerPhi(2.0), f, [0.0], measure)
    assert value.value == pytest.approx(2 * half, rel=1e-2)


def test_gamma_is_quadratic_in_f() -> None:
    measure = RadialLevyMeasure(1, 1.2)
    f = shifted_tanh(1)
    scaled = TestFunction(lambda x: 3.0 * f(x), 1, 3.0 * f.lower, 3.0 * f.upper, gradient=lambda x: 3.0 * f.gradient(x))
    base = gamma_phi(PowerPhi(2.0), f, [0.3], measure)
    assert gamma_phi(PowerPhi(2.0), scaled, [0.3], measure).value == pytest.approx(9.0 * base.value, rel=1e-6)


def test_gamma_inner_radius_insensitive() -> None:
    measure = RadialLevyMeasure(1, 1.5)
    f = shifted_tanh(1)
    coarse = gamma_phi(XLogXPhi(), f, [0.2], measure, inner_radius=1e-3)
    fine = gamma_phi(XLogXPhi(), f, [0.2], measure, inner_radius=5e-4)
    assert abs(coarse.value - fine.value) <= max(coarse.stderr, 1e-6 * abs(coarse.value))


def test_gamma_rejects_non_positive_value() -> None:
    f = TestFunction(lambda x: np.zeros(np.shape(x)[:-1]), 1, 0.0, 0.0, gradient=np.zeros_like)
    with pytest.raises(NonPositiveInput):
        gamma_phi(XLogXPhi(), f, [0.0], RadialLevyMeasure(1, 1.5))


def test_gamma_values_agree_with_pointwise() -> None:
    measure = RadialLevyMeasure(2, 1.5)
    f = shifted_tanh(2, direction=[1.0, 1.0])
    states = np.array([[0.0, 0.0], [0.5, -1.0], [2.0, 1.0]])
    batch = gamma_values(XLogXPhi(), f, states, measure)
    single = [gamma_phi(XLogXPhi(), f, s, measure).value for s in states]
    assert np.allclose(batch, single, rtol=2e-2)


def test_radial_rule_integrates_tail_mass() -> None:
    measure = RadialLevyMeasure(1, 1.5)
    radii, weights = radial_rule(measure, 1.0)
    assert np.all(radii >= 1.0)
    # mass of |z| > 1 is 2 / alpha
    assert float(weights.sum()) == pytest.approx(2.0 / 1.5, rel=1e-6)


def test_generator_constant_is_zero() -> None:
    value = generator_apply(constant_function(1.0), [0.5], ou_field(1), RadialLevyMeasure(1, 1.5))
    assert value.value == pytest.approx(0.0, abs=1e-12)


def test_generator_linear_function() -> None:
    linear = TestFunction(
        lambda x: 2.0 * np.asarray(x)[..., 0],
        1,
        0.0,
        1.0,
        gradient=lambda x: np.full_like(x, 2.0),
        hessian=lambda x: np.zeros((x.shape[0], 1, 1)),
    )
    value = generator_apply(linear, [0.7], ou_field(1), RadialLevyMeasure(1, 1.5))
    assert value.value == pytest.approx(-1.4, abs=1e-6)


def test_generator_matches_quadrature() -> None:
    measure = RadialLevyMeasure(1, 1.5)
    f = inverse_quadratic(1)

    def g(x: float) -> float:
        return 1.0 / (1.0 + x * x)

    d1 = -0.5
    d2 = 0.5

    def integrand(z: float) -> float:
        if abs(z) < 1e-4:
            core = 0.5 * d2 * z * z
        else:
            core = g(1.0 + z) - g(1.0) - d1 * z * (abs(z) <= 1.0)
        return core * abs(z) ** -2.5

    pieces = [(-math.inf, -1.0), (-1.0, 0.0), (0.0, 1.0), (1.0, math.inf)]
    jump = sum(integrate.quad(integrand, a, b, limit=200)[0] for a, b in pieces)
    expected = -d1 + jump
    value = generator_apply(f, [1.0], ou_field(1), measure)
    assert value.value == pytest.approx(expected, rel=1e-2)


def test_generator_values_agree_with_pointwise() -> None:
    measure = RadialLevyMeasure(1, 1.5)
    f = inverse_quadratic(1)
    states = np.array([[-1.0], [0.0], [2.5]])
    batch = generator_values(f, states, ou_field(1), measure)
    single = [generator_apply(f, s, ou_field(1), measure).value for s in states]
    assert np.allclose(batch, single, rtol=2e-2, atol=1e-6)


def test_brownian_part_of_generator() -> None:
    field = ou_field(1, sigma1=np.eye(1))
    f = shifted_tanh(1)
    x = np.array([0.4])
    drift_only = generator_apply(f, x, ou_field(1), None).value
    with_brownian = generator_apply(f, x, field, None).value
    assert with_brownian - drift_only == pytest.approx(0.5 * float(f.hessian(x[None, :])[0, 0, 0]), rel=1e-4)


def test_entropy_of_constant_is_zero() -> None:
    est = entropy_estimate(XLogXPhi(), np.full(100, 2.0))
    assert est.value == pytest.approx(0.0, abs=1e-12)
    assert est.stderr == pytest.approx(0.0, abs=1e-12)


def test_entropy_power_two_is_variance() -> None:
    rng = np.random.default_rng(3)
    y = rng.uniform(1.0, 2.0, size=5000)
    assert entropy_estimate(PowerPhi(2.0), y).value == pytest.approx(y.var(), rel=1e-9)
    unbiased = entropy_estimate(PowerPhi(2.0), y, jackknife=True).value
    assert unbiased == pytest.approx(y.var(ddof=1), rel=1e-9)


def test_invariant_entropy_from_samples() -> None:
    samples = np.random.default_rng(4).standard_normal((2000, 1))
    f = shifted_tanh(1, 1.5)
    values = f(samples)
    assert invariant_entropy(PowerPhi(2.0), f, samples).value == pytest.approx(values.var(), rel=1e-9)
    assert invariant_entropy(XLogXPhi(), f, samples).value > 0


def test_entropy_estimate_errors() -> None:
    with pytest.raises(ValueError, match="empty"):
        entropy_estimate(XLogXPhi(), [])
    with pytest.raises(NonPositiveInput):
        entropy_estimate(XLogXPhi(), [1.0, 0.0])


def test_bound_constant_values() -> None:
    assert bound_constant(-1.0, -1.0, 1, 0.5, 1.0, 1.0, math.inf) == pytest.approx(2.0)
    assert bound_constant(-1.0, -1.0, 1, 0.5, 1.0, 1.0, 0.0) == 0.0
    # lambda2 (d + alpha) = lambda1 d
    assert bound_constant(-1.5, -1.0, 1, 0.5, 1.0, 2.0, 3.0) == pytest.approx(6.0)
    a = -1.0 * 2.5 + 1.0
    assert bound_constant(-1.0, -1.0, 1, 1.5, 1.0, 1.0, 2.0) == pytest.approx(math.expm1(2 * a) / a)
    with pytest.raises(NoFiniteLimit):
        bound_constant(-1.0, 0.0, 1, 1.5, 1.0, 1.0, math.inf)
    with pytest.raises(ValueError, match="non-negative"):
        bound_constant(-1.0, -1.0, 1, 1.5, 1.0, 1.0, -1.0)


@pytest.mark.parametrize(("lambda1", "lambda2", "d", "alpha"), [(-1.0, -1.0, 1, 0.5), (-2.0, -1.0, 2, 1.5), (-3.0, -0.5, 3, 1.9)])
def test_decay_rate_is_reciprocal_constant(lambda1: float, lambda2: float, d: int, alpha: float) -> None:
    rate = decay_rate(lambda1, lambda2, d, alpha, 1.0, 2.0)
    assert rate * bound_constant(lambda1, lambda2, d, alpha, 1.0, 2.0, math.inf) == pytest.approx(1.0)
    assert decay_rate(lambda1, lambda2, d, alpha, 1.0, 4.0) == pytest.approx(rate / 2)


def test_decay_rate_values() -> None:
    assert decay_rate(-1.0, -1.0, 1, 0.5, 1.0, 1.0) == pytest.approx(0.5)
    with pytest.raises(NotDissipativeEnough):
        decay_rate(-1.0, 0.0, 1, 1.5, 1.0, 1.0)


def test_semigroup_entropy_jensen(ou_plan: NoiseIncrementPlan) -> None:
    ens = simulate(ou_field(1), ou_plan, [0.0], T=1.0, dt=1e-2, n_paths=4000, seed=4)
    f = shifted_tanh(1)
    for phi in PHIS:
        est = semigroup_entropy(phi, f, ens)
        assert est.value >= -3 * est.stderr
    assert semigroup_entropy(XLogXPhi(), constant_function(2.0), ens).value == pytest.approx(0.0, abs=1e-12)


def test_semigroup_entropy_reproducible_across_seeds(ou_plan: NoiseIncrementPlan) -> None:
    f = shifted_tanh(1)
    a = semigroup_entropy(XLogXPhi(), f, simulate(ou_field(1), ou_plan, [0.0], 1.0, 1e-2, 20_000, seed=1))
    b = semigroup_entropy(XLogXPhi(), f, simulate(ou_field(1), ou_plan, [0.0], 1.0, 1e-2, 20_000, seed=2))
    assert abs(a.value - b.value) <= 4 * math.hypot(a.stderr, b.stderr)


@pytest.mark.parametrize("phi", [XLogXPhi(), PowerPhi(2.0)], ids=lambda p: p.name)
@pytest.mark.parametrize("x0", [0.0, 2.0])
def test_entropy_bound_holds(ou_plan: NoiseIncrementPlan, phi: XLogXPhi | PowerPhi, x0: float) -> None:
    field = ou_field(1)
    ens = simulate(field, ou_plan, [x0], T=1.0, dt=1e-2, n_paths=10_000, seed=8)
    check = check_entropy_bound(phi, shifted_tanh(1), field, ou_plan.measure, ens, 1.0)
    assert check.constant > 0
    assert check.holds()


@pytest.mark.slow
def test_entropy_decays_within_envelope(ou_plan: NoiseIncrementPlan) -> None:
    curve = entropy_decay_curve(
        XLogXPhi(), shifted_tanh(1), ou_field(1), ou_plan, n_outer=256, n_inner=128, seed=5, dt=1e-2
    )
    assert curve.rate == pytest.approx(1.5)
    assert curve.times.size == 8
    assert curve.holds()


@pytest.mark.slow
def test_generator_averages_to_zero_under_invariant_law(ou_plan: NoiseIncrementPlan) -> None:
    inv = invariant_ensemble(ou_field(1), ou_plan, burn_in=8.0, n_samples=4000, seed=6, dt=1e-2)
    residual = generator_residual(inverse_quadratic(1), inv.samples, ou_field(1), ou_plan.measure)
    assert abs(residual.value) <= 4 * residual.stderr + 2e-2


@pytest.mark.slow
def test_dirichlet_form_gap_vanishes(ou_plan: NoiseIncrementPlan) -> None:
    inv = invariant_ensemble(ou_field(1), ou_plan, burn_in=8.0, n_samples=4000, seed=7, dt=1e-2)
    gap = dirichlet_form_gap(PowerPhi(2.0), shifted_tanh(1), inv.samples, ou_field(1), ou_plan.measure)
    assert abs(gap.value) <= 4 * gap.stderr + 2e-2
