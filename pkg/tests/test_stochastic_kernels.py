from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
import pytest
from scipy import stats

from jumpentropy.levy_measure import RadialLevyMeasure, small_jump_profile, small_sq
from jumpentropy.stochastic_kernels import (
    NoiseIncrementPlan,
    SmallJumpMode,
    brownian_increment,
    compensation_drift,
    jump_counts,
    jump_stream,
    levy_increment,
    positive_stable,
    small_jump_increment,
    stable_constant,
    stable_increment,
    stable_kappa,
    stable_scale,
    stable_tail_constant,
)

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def test_stable_constant_cauchy() -> None:
    # Cauchy(0, 1) has Levy density |z|^-2 / pi
    assert math.isclose(stable_constant(1.0, 1), 1 / math.pi, rel_tol=1e-12)


def test_scale_kappa_round_trip() -> None:
    for alpha, dim in [(0.7, 1), (1.5, 2), (1.9, 3)]:
        assert math.isclose(stable_scale(stable_kappa(0.8, alpha, dim), alpha, dim), 0.8, rel_tol=1e-12)


def test_zero_step_is_zero(rng: np.random.Generator) -> None:
    assert np.array_equal(stable_increment(1.5, 0.0, 3, 1.0, rng), np.zeros(3))
    assert stable_increment(1.5, 0.0, 2, 1.0, rng, size=5).shape == (5, 2)


def test_stable_increment_validation(rng: np.random.Generator) -> None:
    with pytest.raises(ValueError, match="Stability index"):
        stable_increment(2.0, 1.0, 1, 1.0, rng)
    with pytest.raises(ValueError, match="non-negative"):
        stable_increment(1.0, -1.0, 1, 1.0, rng)


def test_positive_stable_laplace_transform(rng: np.random.Generator) -> None:
    a = positive_stable(0.5, rng, 200_000)
    assert np.all(a > 0)
    for lam in (0.5, 1.0, 2.0):
        values = np.exp(-lam * a)
        se = values.std() / math.sqrt(a.size)
        assert abs(values.mean() - math.exp(-(lam**0.5))) < 4 * se
    with pytest.raises(ValueError, match="Positive stable"):
        positive_stable(1.0, rng, 1)


@pytest.mark.parametrize("dim", [1, 2])
def test_cauchy_marginal(dim: int, rng: np.random.Generator) -> None:
    n = 100_000
    x = stable_increment(1.0, 1.0, dim, 1.0, rng, size=n)
    # every coordinate of the isotropic Cauchy law is standard Cauchy
    p = np.mean(np.abs(x[:, 0]) > 1.0)
    assert abs(p - 0.5) < 4 * math.sqrt(0.25 / n)


def test_isotropy_of_stable_increments(rng: np.random.Generator) -> None:
    x = stable_increment(1.5, 1.0, 3, 1.0, rng, size=50_000)
    directions = x / np.linalg.norm(x, axis=1, keepdims=True)
    se = math.sqrt(1 / 3 / 50_000)
    assert np.all(np.abs(directions.mean(axis=0)) < 4 * se)


def test_stable_increments_add(rng: np.random.Generator) -> None:
    n = 20_000
    two = stable_increment(1.5, 2.0, 1, 1.0, rng, size=n)[:, 0]
    ones = stable_increment(1.5, 1.0, 1, 1.0, rng, size=2 * n)[:, 0].reshape(n, 2).sum(axis=1)
    assert stats.ks_2samp(two, ones).pvalue > 1e-3


@pytest.mark.slow
def test_stable_tail_constant(rng: np.random.Generator) -> None:
    n = 1_000_000
    x = np.abs(stable_increment(1.5, 1.0, 1, 1.0, rng, size=n)[:, 0])
    level = 30.0
    p = np.mean(x > level)
    expected = stable_tail_constant(1.5, 1, 1.0)
    rel_se = math.sqrt((1 - p) / (p * n))
    assert abs(p * level**1.5 / expected - 1.0) < 4 * rel_se + 0.02


def test_brownian_increment_variance(rng: np.random.Generator) -> None:
    x = brownian_increment(0.25, 2, rng, 100_000)
    assert x.shape == (100_000, 2)
    assert np.allclose(x.var(axis=0), 0.25, rtol=0.02)


def test_plan_validation() -> None:
    measure = RadialLevyMeasure(1, 1.5, 0.5, 1.0)
    with pytest.raises(ValueError, match="Exact stable"):
        NoiseIncrementPlan(measure, small_jump_mode=SmallJumpMode.EXACT_STABLE)
    with pytest.raises(ValueError, match="Cutoff"):
        NoiseIncrementPlan(measure, cutoff=0.0)


def test_surrogate_variance() -> None:
    measure = RadialLevyMeasure(3, 1.2, 1.0, 2.0)
    plan = NoiseIncrementPlan(measure, cutoff=0.01)
    assert math.isclose(plan.surrogate_variance, small_sq(measure, 0.01) / 3, rel_tol=1e-12)
    assert plan.to_dict()["small_jump_mode"] == "gaussian_surrogate"


def test_small_jump_modes(rng: np.random.Generator) -> None:
    measure = RadialLevyMeasure(1, 1.5)
    drop = NoiseIncrementPlan(measure, cutoff=0.1, small_jump_mode=SmallJumpMode.DROP_WITH_COMPENSATION)
    assert np.array_equal(small_jump_increment(drop, 0.1, rng, 4), np.zeros((4, 1)))
    off = NoiseIncrementPlan(measure, jumps=False)
    assert np.array_equal(levy_increment(off, 0.1, rng, 4), np.zeros((4, 1)))
    exact = NoiseIncrementPlan(measure, small_jump_mode=SmallJumpMode.EXACT_STABLE)
    assert exact.jump_rate == 0.0
    assert np.count_nonzero(small_jump_increment(exact, 0.1, rng, 4)) == 4


def test_jump_counts_mean(rng: np.random.Generator) -> None:
    plan = NoiseIncrementPlan(RadialLevyMeasure(1, 1.0), cutoff=1.0)
    counts = jump_counts(plan, 1.0, rng, 100_000)
    assert abs(counts.mean() - 2.0) < 3 * math.sqrt(2.0 / 100_000)


def test_jump_stream(rng: np.random.Generator) -> None:
    plan = NoiseIncrementPlan(RadialLevyMeasure(2, 1.0), cutoff=1.0)
    stream = jump_stream(plan, 0.5, 10.5, rng)
    assert np.all(np.diff(stream.times) >= 0)
    assert np.all((stream.times > 0.5) & (stream.times <= 10.5))
    assert stream.jumps.shape == (len(stream), 2)
    assert np.all(np.linalg.norm(stream.jumps, axis=1) > 1.0)
    assert np.array_equal(stream.compensation_drift, np.zeros(2))
    with pytest.raises(ValueError, match="t0 < t1"):
        jump_stream(plan, 1.0, 1.0, rng)


def test_jump_stream_empty_tail(rng: np.random.Generator) -> None:
    plan = NoiseIncrementPlan(RadialLevyMeasure(1, 1.5, rho=small_jump_profile()), cutoff=1.0)
    assert len(jump_stream(plan, 0.0, 100.0, rng)) == 0


def test_disjoint_window_counts_independent(rng: np.random.Generator) -> None:
    plan = NoiseIncrementPlan(RadialLevyMeasure(1, 1.0), cutoff=1.0)
    first = np.minimum(jump_counts(plan, 0.5, rng, 50_000), 3)
    second = np.minimum(jump_counts(plan, 0.5, rng, 50_000), 3)
    table = np.zeros((4, 4))
    np.add.at(table, (first, second), 1)
    assert stats.chi2_contingency(table).pvalue > 1e-3


@pytest.mark.slow
def test_surrogate_matches_exact_stable(rng: np.random.Generator) -> None:
    measure = RadialLevyMeasure(1, 1.5)
    plan = NoiseIncrementPlan(measure, cutoff=0.05)
    n = 20_000
    surrogate = levy_increment(plan, 1.0, rng, n)[:, 0]
    exact = stable_increment(1.5, 1.0, 1, plan.stable_scale, rng, size=n)[:, 0]
    assert stats.ks_2samp(surrogate, exact).statistic < 0.03


class _SkewedMeasure(RadialLevyMeasure):
    def density(self, z: ArrayLike) -> NDArray[np.float64]:
        points = np.asarray(z, dtype=np.float64)
        return super().density(points) * (1.0 + 0.5 * np.tanh(points[..., 0]))


@pytest.mark.parametrize("dim", [1, 3])
def test_compensation_drift_even_measure(dim: int) -> None:
    plan = NoiseIncrementPlan(RadialLevyMeasure(dim, 1.2), cutoff=0.01)
    assert np.array_equal(compensation_drift(plan), np.zeros(dim))


def test_compensation_drift_rejects_skewed_measure(rng: np.random.Generator) -> None:
    plan = NoiseIncrementPlan(_SkewedMeasure(2, 1.2), cutoff=0.01)
    with pytest.raises(ValueError, match="even"):
        compensation_drift(plan)
    with pytest.raises(ValueError, match="even"):
        jump_stream(plan, 0.0, 1.0, rng)
    # nothing to compensate above |z| = 1
    wide = NoiseIncrementPlan(_SkewedMeasure(2, 1.2), cutoff=1.0)
    assert np.array_equal(compensation_drift(wide), np.zeros(2))
