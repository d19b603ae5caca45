from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from jumpentropy.common import DivergentIntegral, InconclusiveLimit
from jumpentropy.levy_measure import RadialLevyMeasure, small_sq, tail_log
from jumpentropy.lyapunov import (
    EVIDENCE,
    CallableB,
    CaseFlag,
    PowerB,
    SharpnessMode,
    c1_bracket,
    c1_terms,
    case1_exponent,
    classify,
    default_grid,
    estimate_limsup,
    grid_directions,
    linear_growth_budget,
    log_divergent_profile,
    phi_of_r,
    sharpness_scenario,
    tightness_check,
    tilde_B,
)
from jumpentropy.sde_engine import CoefficientField, expanding_field, ou_field, power_drift_field
from jumpentropy.stochastic_kernels import NoiseIncrementPlan, SmallJumpMode


def _no_noise_field(drift_sign: float = -1.0) -> CoefficientField:
    return CoefficientField(lambda x: drift_sign * x, 1, -1.0, -1.0, 1.0, sigma2=np.zeros((1, 1)))


def test_power_b_basics() -> None:
    grid = np.geomspace(1e-2, 1e4, 50)
    for theta in (-0.5, 0.0, 0.5, 1.0, 1.5):
        b = PowerB(theta)
        assert b.check_derivative(grid)
        assert b.integral_diverges == (theta <= 1)
    assert PowerB(0.0).name == "constant"


def test_phi_of_r_closed_forms() -> None:
    assert phi_of_r(PowerB(1.0), 0.0) == 0.0
    for r in (0.5, 3.0, 1e3):
        assert phi_of_r(PowerB(0.0), r) == pytest.approx(r - math.log1p(r), rel=1e-12)
        expected, _ = integrate.quad(lambda s: s / (1 + s) ** 2.5, 0.0, r)
        assert phi_of_r(PowerB(1.5), r) == pytest.approx(expected, rel=1e-8)
    with pytest.raises(ValueError, match="non-negative"):
        phi_of_r(PowerB(1.0), -1.0)


def test_phi_of_r_callable_matches_power() -> None:
    b = CallableB(lambda r: 1.0 + r, lambda r: np.ones_like(r), diverges=True, name="linear")
    assert phi_of_r(b, 7.0) == pytest.approx(phi_of_r(PowerB(1.0), 7.0), rel=1e-8)
    assert b.inverse_integral(2.0, 5.0) == pytest.approx(math.log(6.0 / 3.0), rel=1e-8)


def test_phi_increasing_with_consistent_curvature() -> None:
    b = PowerB(0.5)
    grid = np.linspace(0.1, 50.0, 200)
    values = np.asarray([phi_of_r(b, r) for r in grid])
    assert np.all(np.diff(values) > 0)
    assert np.allclose(np.gradient(values, grid), b.phi_derivative(grid), rtol=1e-2)
    # sign of phi'' follows B - r(1+r)B'
    sign = np.sign(b(grid) - grid * (1 + grid) * b.derivative(grid))
    assert np.array_equal(np.sign(b.phi_second_derivative(grid)), sign)


@pytest.mark.parametrize("x_norm", [0.2, 3.0, 100.0])
def test_tilde_b_constant_weight(x_norm: float) -> None:
    value = tilde_B(PowerB(0.0), x_norm, 0.5, 2.0)
    assert value == pytest.approx(1.0 / (2.0 * (1.0 + max(0.0, x_norm - 1.0))), rel=1e-9)


def test_tilde_b_degenerate_interval() -> None:
    b = PowerB(0.7)
    r = 4.0
    point = (b(r) - r * b.derivative(r)) / (2 * b(r) ** 2 * (1 + r))
    assert tilde_B(b, r, 1.0, 0.0) == pytest.approx(float(point))


def test_tilde_b_linear_weight_left_end() -> None:
    # B - rB' = 1, so the value 1/(2(1+r)^3) peaks at the left end
    assert tilde_B(PowerB(1.0), 5.0, 1.0, 2.0) == pytest.approx(1.0 / (2.0 * 4.0**3), rel=1e-9)
    with pytest.raises(ValueError, match="eps"):
        tilde_B(PowerB(1.0), 5.0, 1.5, 2.0)


def test_bracket_drift_only() -> None:
    measure = RadialLevyMeasure(1, 1.5)
    for r in (0.5, 10.0, 1e3):
        value = c1_bracket(_no_noise_field(), measure, PowerB(0.0), 0.5, [r])
        assert value == pytest.approx(-(r**2) / (1 + r), rel=1e-12)


def test_bracket_all_zero() -> None:
    field = CoefficientField(np.zeros_like, 1, 0.0, 0.0, 1.0, sigma2=np.zeros((1, 1)))
    assert c1_bracket(field, RadialLevyMeasure(1, 1.5), PowerB(1.0), 1.0, [3.0]) == 0.0


def test_bracket_matches_term_by_term_oracle() -> None:
    measure = RadialLevyMeasure(1, 1.5)
    r = 1e3
    tail, _ = integrate.quad(lambda rho: math.log1p(rho / (1 + r)) * rho**-2.5, 1.0, math.inf, limit=200)
    expected = -(r**2) / (1 + r) ** 2 + 2 * tail + small_sq(measure, 1.0) / (2 * r**3)
    assert c1_bracket(ou_field(1), measure, PowerB(1.0), 1.0, [r]) == pytest.approx(expected, rel=1e-3)


@pytest.mark.parametrize("eps", [0.25, 1.0])
def test_bracket_equals_sum_of_terms(eps: float) -> None:
    measure = RadialLevyMeasure(2, 1.2)
    field = ou_field(2, sigma1=0.5 * np.eye(2))
    x = [30.0, -40.0]
    terms = c1_terms(field, measure, PowerB(0.8), eps, x)
    assert terms.total == pytest.approx(c1_bracket(field, measure, PowerB(0.8), eps, x), rel=1e-8)
    assert terms.brownian < 0


def test_bracket_divergent_tail() -> None:
    # B = (1+r)^0.5 needs the moment of order 1/2, which a tail of index 0.4 lacks
    measure = RadialLevyMeasure(1, 0.4)
    with pytest.raises(DivergentIntegral):
        c1_bracket(ou_field(1), measure, PowerB(0.5), 1.0, [10.0])


def test_estimate_limsup() -> None:
    grid = default_grid(41)
    assert estimate_limsup(grid, -np.log(grid)).minus_infinity
    flat = estimate_limsup(grid, -1.0 + 1.0 / grid)
    assert flat.value == pytest.approx(-1.0, abs=1e-3)
    wavy = np.sin(np.arange(grid.size))
    with pytest.raises(InconclusiveLimit):
        estimate_limsup(grid, wavy)


def test_grid_directions() -> None:
    assert grid_directions(1).tolist() == [[1.0], [-1.0]]
    dirs = grid_directions(3, seed=1)
    assert dirs.shape == (6 + 32, 3)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)
    assert np.array_equal(dirs, grid_directions(3, seed=1))


def test_linear_growth_budget() -> None:
    measure = RadialLevyMeasure(1, 1.5)
    assert linear_growth_budget(measure, 0.5, 0.0) == 0.0
    assert linear_growth_budget(measure, 0.5, 1.0) > 0
    with pytest.raises(ValueError, match="eps"):
        linear_growth_budget(measure, 0.5, 2.0)
    divergent = RadialLevyMeasure(1, 1.5, rho=log_divergent_profile(1.5))
    assert linear_growth_budget(divergent, 0.5, 1.0) == math.inf


def test_case1_exponent() -> None:
    assert case1_exponent(1.5) == pytest.approx(1.25)
    assert case1_exponent(5.0) == pytest.approx(1.5)


def test_classify_ou_linear_growth() -> None:
    report = classify(ou_field(1), RadialLevyMeasure(1, 1.5), PowerB(1.0), 1.0, theta=1.0)
    assert report.d_value == pytest.approx(-1.0, abs=1e-2)
    assert report.big_theta == 0.0
    assert CaseFlag.CASE2 in report.flags
    assert CaseFlag.C2 in report.flags
    assert report.passed
    assert EVIDENCE in report.verdict
    assert math.isfinite(report.integrals["tail_log"])
    record = report.to_dict()
    assert record["flags"] == ["C2", "CASE2"]
    assert record["grid_points"] == 81


def test_classify_expanding_field_rejects() -> None:
    report = classify(expanding_field(1), RadialLevyMeasure(1, 1.5), PowerB(1.0), 1.0, theta=1.0)
    assert report.d_value > 0
    assert report.flags == frozenset({CaseFlag.NONE})
    assert not report.passed
    assert report.verdict.startswith("REJECT")


def test_classify_sublinear_drift() -> None:
    report = classify(power_drift_field(0.5), RadialLevyMeasure(1, 1.0), PowerB(1.0), 1.0, theta=0.5)
    # 2 * integral of r^(1/2) r^(-2) over r > 1
    assert report.integrals["tail_power_1-theta"] == pytest.approx(4.0, rel=1e-6)
    assert report.d_value < 0
    assert CaseFlag.CASE3 in report.flags
    assert math.isinf(report.integrals["tail_abs"])


def test_classify_needs_long_grid() -> None:
    with pytest.raises(ValueError, match="reach"):
        classify(ou_field(1), RadialLevyMeasure(1, 1.5), PowerB(1.0), 1.0, grid=np.geomspace(1.0, 100.0, 20))


@pytest.mark.slow
def test_classify_grid_density_invariance() -> None:
    measure = RadialLevyMeasure(1, 1.5)
    coarse = classify(ou_field(1), measure, PowerB(1.0), 1.0, default_grid(81), theta=1.0)
    fine = classify(ou_field(1), measure, PowerB(1.0), 1.0, default_grid(161), theta=1.0)
    assert coarse.flags == fine.flags


def test_tightness_of_ou() -> None:
    plan = NoiseIncrementPlan(RadialLevyMeasure(1, 1.5), small_jump_mode=SmallJumpMode.EXACT_STABLE)
    report = tightness_check(ou_field(1), plan, n_steps=2000, dt=1e-2, n_paths=2048, seed=3)
    assert report.horizons.tolist() == pytest.approx([5.0, 10.0, 20.0])
    assert not report.exploded
    assert report.tight
    assert report.to_dict()["tight"] is True


def test_expanding_field_is_not_tight() -> None:
    plan = NoiseIncrementPlan(RadialLevyMeasure(1, 1.5), small_jump_mode=SmallJumpMode.EXACT_STABLE)
    report = tightness_check(expanding_field(1), plan, n_steps=600, dt=1e-2, n_paths=256, seed=4)
    assert not report.tight


def test_log_divergent_profile() -> None:
    measure = RadialLevyMeasure(1, 1.5, rho=log_divergent_profile(1.5))
    with pytest.raises(DivergentIntegral):
        tail_log(measure, 1.0, 1.0)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 1.9])
def test_stable_log_moment_finite(alpha: float) -> None:
    assert math.isfinite(tail_log(RadialLevyMeasure(1, alpha), 1.0, 1.0))


def test_sharpness_scenarios() -> None:
    finite = sharpness_scenario(SharpnessMode.LOG_FINITE)
    infinite = sharpness_scenario(SharpnessMode.LOG_INFINITE)
    assert finite.assert_stationary
    assert math.isfinite(finite.tail_log)
    assert not infinite.assert_stationary
    assert math.isinf(infinite.tail_log)
    assert infinite.to_dict()["mode"] == "log_infinite"
