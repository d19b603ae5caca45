from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
import pytest

from jumpentropy.common import DegenerateDensity
from jumpentropy.levy_measure import RadialLevyMeasure
from jumpentropy.phi_entropy import PowerPhi, XLogXPhi
from jumpentropy.poisson_space import (
    Configuration,
    ConfigurationBatch,
    FiniteIntensity,
    TimeTiltDensity,
    campbell_mean,
    campbell_variance,
    check_permutation_invariance,
    count_functional,
    functional_corpus,
    girsanov_density_check,
    laplace_functional,
    laplace_transform,
    linear_functional,
    mecke_check,
    mecke_constant,
    mecke_count,
    mecke_time_fraction,
    sample_batch,
    sample_configuration,
    shifted_laplace_functional,
    time_weighted_norm,
    truncated_norm,
    wu_entropy_check,
)

if TYPE_CHECKING:
    from jumpentropy.poisson_space import MeckeFunctional


@pytest.fixture
def levy_tail() -> FiniteIntensity:
    # mark mass 2 / alpha on |z| > 1 in d = 1
    return FiniteIntensity.from_levy_tail(RadialLevyMeasure(1, 1.5), 1.0, 1.5)


@pytest.fixture
def ball() -> FiniteIntensity:
    return FiniteIntensity.uniform_ball(2.0, 1.5, 2, 1.0)


def test_configuration_validation() -> None:
    with pytest.raises(ValueError, match="shape"):
        Configuration(np.zeros(2), np.zeros((3, 1)), 1.0)
    with pytest.raises(ValueError, match="Arrival times"):
        Configuration(np.array([1.5]), np.zeros((1, 1)), 1.0)


def test_configuration_add_remove() -> None:
    config = Configuration(np.array([0.2, 0.7]), np.array([[1.0], [-2.0]]), 1.0)
    bigger = config.add(0.5, [3.0])
    assert len(bigger) == 3
    assert np.array_equal(bigger.remove(2).marks, config.marks)
    assert bigger.dim == 1


def test_batch_round_trip_and_removal() -> None:
    configs = [
        Configuration(np.array([0.1, 0.4]), np.array([[1.0], [2.0]]), 1.0),
        Configuration(np.zeros(0), np.zeros((0, 1)), 1.0),
        Configuration(np.array([0.9]), np.array([[-1.0]]), 1.0),
    ]
    batch = ConfigurationBatch.from_configurations(configs, 1.0, 1)
    assert len(batch) == 3
    assert batch.counts.tolist() == [2, 0, 1]
    assert np.array_equal(batch[0].times, configs[0].times)
    reduced = batch.without_each_point()
    # one reduced configuration per point, each with one point fewer
    assert reduced.counts.tolist() == [1, 1, 0]


def test_intensity_validation() -> None:
    with pytest.raises(ValueError, match="Window"):
        FiniteIntensity.uniform_ball(1.0, 1.0, 1, 0.0)
    with pytest.raises(ValueError, match="Mark mass"):
        FiniteIntensity.uniform_ball(-1.0, 1.0, 1, 1.0)


def test_levy_tail_intensity(levy_tail: FiniteIntensity) -> None:
    assert levy_tail.mark_mass == pytest.approx(2.0 / 1.5)
    assert levy_tail.total_mass == pytest.approx(2.0)
    marks = levy_tail.sample_marks(np.random.default_rng(0), 1000)
    assert np.all(np.abs(marks) > 1.0)


def test_zero_mass_gives_empty_configuration() -> None:
    empty = FiniteIntensity.uniform_ball(0.0, 1.0, 1, 1.0)
    assert len(sample_configuration(empty, np.random.default_rng(0))) == 0
    with pytest.raises(DegenerateDensity):
        TimeTiltDensity(empty)


def test_mean_count(ball: FiniteIntensity) -> None:
    batch = sample_batch(ball, 100_000, np.random.default_rng(1))
    counts = batch.counts
    assert abs(counts.mean() - ball.total_mass) <= 3 * math.sqrt(ball.total_mass / counts.size)


def test_campbell_moments(levy_tail: FiniteIntensity) -> None:
    h = truncated_norm()
    # |z| ^ 1 = 1 on the whole tail, so both moments equal the total mass
    assert campbell_mean(levy_tail, h).value == pytest.approx(2.0, rel=1e-6)
    assert campbell_variance(levy_tail, h).value == pytest.approx(2.0, rel=1e-6)
    assert laplace_transform(levy_tail, h).value == pytest.approx(math.exp(-2.0 * (1 - math.exp(-1.0))), rel=1e-6)


def test_laplace_functional_matches_transform() -> None:
    intensity = FiniteIntensity.from_levy_tail(RadialLevyMeasure(1, 1.5), 0.5, 1.0)
    h = truncated_norm()
    functional = laplace_functional(h)
    values = functional.evaluate(sample_batch(intensity, 100_000, np.random.default_rng(2)))
    expected = laplace_transform(intensity, h).value
    assert abs(values.mean() - expected) <= 3 * values.std(ddof=1) / math.sqrt(values.size)


def test_time_tilt_density_normalized(ball: FiniteIntensity) -> None:
    density = TimeTiltDensity(ball, tilt=2.0)
    times, marks = ball.sample_points(np.random.default_rng(3), 200_000)
    # E_lambda/m [g] * m = integral of g against lambda
    assert ball.total_mass * float(density(times, marks).mean()) == pytest.approx(1.0, rel=1e-2)
    tau, _ = density.sample(np.random.default_rng(4), 200_000)
    # mean of s under (1 + 2 s) ds / 2 on [0, 1] is 7/12
    assert float(tau.mean()) == pytest.approx(7.0 / 12.0, abs=5e-3)
    with pytest.raises(ValueError, match="Tilt"):
        TimeTiltDensity(ball, tilt=-1.0)


def test_corpus_is_permutation_invariant() -> None:
    rng = np.random.default_rng(5)
    config = sample_configuration(FiniteIntensity.uniform_ball(12.0, 2.0, 2, 1.0), rng)
    for functional in functional_corpus(time_weighted_norm(1.0)).values():
        assert check_permutation_invariance(functional, config, rng)
    assert len(functional_corpus()) == 5


@pytest.mark.parametrize(
    ("functional", "expected"),
    [(mecke_constant(), 1.0), (mecke_time_fraction(), 0.5), (mecke_count(), None)],
    ids=["constant", "time_fraction", "count"],
)
def test_mecke_identity(ball: FiniteIntensity, functional: MeckeFunctional, expected: float | None) -> None:
    check = mecke_check(functional, ball, n_samples=100_000, seed=6)
    m = ball.total_mass
    target = m * m if expected is None else m * expected
    assert check.holds()
    assert abs(check.rhs.value - target) <= 4 * check.rhs.stderr + 1e-12
    assert abs(check.lhs.value - target) <= 4 * check.lhs.stderr + 1e-12


@pytest.mark.parametrize("name", ["count", "linear", "laplace", "shifted_laplace", "max_mark"])
def test_girsanov_reweighting(levy_tail: FiniteIntensity, name: str) -> None:
    functional = functional_corpus()[name]
    check = girsanov_density_check(TimeTiltDensity(levy_tail, tilt=0.5), functional, levy_tail, 100_000, seed=7)
    assert check.holds(n_sigma=4.0)
    assert check.empty_mass == pytest.approx(math.exp(-2.0))


def test_girsanov_weight_mass(levy_tail: FiniteIntensity) -> None:
    check = girsanov_density_check(None, count_functional(), levy_tail, 100_000, seed=8)
    # E[R] is the probability of a non-empty configuration
    assert abs(check.weight.value - (1.0 - check.empty_mass)) <= 4 * check.weight.stderr
    assert abs(check.reweighted.value - levy_tail.total_mass) <= 4 * check.stderr + 4 * check.direct.stderr


def test_girsanov_rejects_vanishing_density(levy_tail: FiniteIntensity) -> None:
    class Vanishing(TimeTiltDensity):
        def __call__(self, times: np.ndarray, marks: np.ndarray) -> np.ndarray:
            return np.zeros_like(times)

    with pytest.raises(DegenerateDensity):
        girsanov_density_check(Vanishing(levy_tail), count_functional(), levy_tail, 1000)


def test_wu_constant_functional(ball: FiniteIntensity) -> None:
    constant = linear_functional(truncated_norm(0.0), shift=2.0)
    check = wu_entropy_check(XLogXPhi(), constant, ball, n_samples=1000, seed=9)
    assert check.entropy.value == pytest.approx(0.0, abs=1e-12)
    assert check.rhs.value == pytest.approx(0.0, abs=1e-12)


def test_wu_variance_equality(levy_tail: FiniteIntensity) -> None:
    functional = linear_functional(shift=1.0)
    check = wu_entropy_check(PowerPhi(2.0), functional, levy_tail, n_samples=100_000, seed=10)
    variance = campbell_variance(levy_tail, truncated_norm()).value
    assert abs(check.rhs.value - variance) <= 3 * check.rhs.stderr + 1e-9
    assert abs(check.entropy.value - variance) <= 3 * check.entropy.stderr
    assert check.holds()


def test_wu_strict_for_shifted_laplace(levy_tail: FiniteIntensity) -> None:
    check = wu_entropy_check(XLogXPhi(), shifted_laplace_functional(), levy_tail, n_samples=100_000, seed=11)
    assert check.margin > 0
    record = check.to_dict()
    assert set(record) == {"functional", "phi", "entropy", "rhs", "margin", "stderr"}
    assert record["functional"] == "shifted_laplace"


@pytest.mark.parametrize("phi", [XLogXPhi(), PowerPhi(1.5), PowerPhi(2.0)], ids=lambda p: p.name)
def test_wu_holds_on_corpus(ball: FiniteIntensity, phi: XLogXPhi | PowerPhi) -> None:
    for name, functional in functional_corpus().items():
        if phi.requires_positive and functional.lower <= 0:
            continue
        check = wu_entropy_check(phi, functional, ball, n_samples=20_000, seed=12)
        assert check.holds(), name
