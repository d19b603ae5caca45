r"""Matrix utilities.

This module provides:

- `is_invertible`: check if a matrix is square with a finite condition number.
- `is_symmetric`: check if a matrix is symmetric.
- `operator_norm`: spectral norm of a matrix.
- `conjugated_jacobian`: :math:`\sigma^{-1} J \sigma`.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any, TypeVar

import numpy as np

if TYPE_CHECKING:
    from numpy.typing import NDArray

T = TypeVar("T", bound=np.number[Any])  # can be removed >= 3.10

CONDITION_LIMIT = 1e12


def is_invertible(mat: NDArray[T], cond_limit: float = CONDITION_LIMIT) -> bool:
    r"""Check if a matrix is invertible.

    Parameters
    ----------
    mat : `numpy.typing.NDArray`\[T\]
        matrix to check
    cond_limit : `float`, optional
        largest accepted condition number, by default 1e12

    Returns
    -------
    `bool`
        `True` if square with condition number below ``cond_limit``, `False` otherwise
    """
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:  # noqa: PLR2004
        return False
    cond = float(np.linalg.cond(mat))
    return bool(np.isfinite(cond) and cond < cond_limit)


def is_symmetric(mat: NDArray[T]) -> bool:
    r"""Check if a matrix is symmetric.

    Parameters
    ----------
    mat : `numpy.typing.NDArray`\[T\]
        matrix to check

    Returns
    -------
    `bool`
        `True` if symmetric, `False` otherwise
    """
    return np.allclose(mat, mat.T)


def operator_norm(mat: NDArray[T]) -> float:
    r"""Return the spectral norm of a matrix.

    Parameters
    ----------
    mat : `numpy.typing.NDArray`\[T\]
        matrix

    Returns
    -------
    `float`
        largest singular value
    """
    return float(np.linalg.norm(mat, ord=2))


def conjugated_jacobian(jacobian: NDArray[np.float64], sigma: NDArray[np.float64]) -> NDArray[np.float64]:
    r"""Return :math:`\sigma^{-1} J \sigma`.

    Parameters
    ----------
    jacobian : `numpy.typing.NDArray`\[`numpy.float64`\]
        matrix J
    sigma : `numpy.typing.NDArray`\[`numpy.float64`\]
        invertible matrix :math:`\sigma`

    Returns
    -------
    `numpy.typing.NDArray`\[`numpy.float64`\]
        conjugated matrix
    """
    return np.asarray(np.linalg.solve(sigma, jacobian @ sigma), dtype=np.float64)
