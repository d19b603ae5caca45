from __future__ import annotations

import numpy as np
import pytest

from jumpentropy.matrix import conjugated_jacobian, is_invertible, is_symmetric, operator_norm


@pytest.mark.parametrize(
    ("mat", "expected"),
    [
        (np.eye(3), True),
        (np.array([[1.0, 2.0], [2.0, 4.0]]), False),
        (np.ones((2, 3)), False),
        (np.array([[1.0, 0.0], [0.0, 1e-14]]), False),
    ],
)
def test_is_invertible(mat: np.ndarray, expected: bool) -> None:
    assert is_invertible(mat) is expected


def test_is_symmetric() -> None:
    assert is_symmetric(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert not is_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_operator_norm() -> None:
    assert np.isclose(operator_norm(np.diag([3.0, -5.0])), 5.0)
    rotation = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert np.isclose(operator_norm(2 * rotation), 2.0)


def test_conjugated_jacobian() -> None:
    jac = np.array([[-1.0, 0.5], [0.0, -2.0]])
    sigma = np.array([[2.0, 0.0], [1.0, 1.0]])
    expected = np.linalg.inv(sigma) @ jac @ sigma
    assert np.allclose(conjugated_jacobian(jac, sigma), expected)
    assert np.allclose(conjugated_jacobian(jac, np.eye(2)), jac)
