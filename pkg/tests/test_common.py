from __future__ import annotations

import math

import numpy as np
import pytest

from jumpentropy.common import (
    ConfigError,
    DivergentIntegral,
    Estimate,
    ExplosionSuspected,
    JumpEntropyError,
    NonPositiveInput,
    combined_stderr,
    uniform_directions,
    unit_sphere_area,
)


@pytest.mark.parametrize(
    ("dim", "expected"),
    [(1, 2.0), (2, 2 * math.pi), (3, 4 * math.pi), (4, 2 * math.pi**2)],
)
def test_unit_sphere_area(dim: int, expected: float) -> None:
    assert math.isclose(unit_sphere_area(dim), expected, rel_tol=1e-12)


def test_unit_sphere_area_rejects_zero_dimension() -> None:
    with pytest.raises(ValueError, match="positive"):
        unit_sphere_area(0)


def test_uniform_directions_one_dimension() -> None:
    rng = np.random.default_rng(1)
    dirs = uniform_directions(rng, 1000, 1)
    assert dirs.shape == (1000, 1)
    assert set(np.unique(dirs)) == {-1.0, 1.0}


def test_uniform_directions_are_unit_and_centered() -> None:
    rng = np.random.default_rng(2)
    dirs = uniform_directions(rng, 20000, 3)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)
    # each coordinate has variance 1/3
    assert np.all(np.abs(dirs.mean(axis=0)) < 4 * math.sqrt(1 / 3 / 20000))


def test_combined_stderr() -> None:
    assert combined_stderr() == 0.0
    assert math.isclose(combined_stderr(3.0, 4.0), 5.0)


def test_estimate_defaults_to_exact() -> None:
    assert Estimate(1.5).stderr == 0.0


def test_error_hierarchy() -> None:
    assert issubclass(DivergentIntegral, ArithmeticError)
    assert issubclass(NonPositiveInput, ValueError)
    assert issubclass(ExplosionSuspected, RuntimeError)
    assert issubclass(ConfigError, ValueError)
    for exc in (DivergentIntegral, NonPositiveInput, ExplosionSuspected, ConfigError):
        assert issubclass(exc, JumpEntropyError)
