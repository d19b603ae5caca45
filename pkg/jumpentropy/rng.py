"""Random-number generators.

This module provides:

- `ensure_rng`: Resolve a generator, a seed or `None` into a generator.
- `stream`: Counter-based generator for one work unit of a seeded batch.
- `block_count`: Number of fixed-size blocks covering a batch of paths.
"""

from __future__ import annotations

import threading
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from numpy.random import Generator

BLOCK_SIZE = 1024

_thread_default = threading.local()


def ensure_rng(rng: Generator | int | None = None) -> Generator:
    """Resolve a generator argument.

    A generator is returned unchanged and an integer seeds stream 0 of `stream`.
    `None` gives a per-thread default generator, created once per thread.

    Parameters
    ----------
    rng : `numpy.random.Generator` | `int` | None, optional
        generator, seed or `None`

    Returns
    -------
    `numpy.random.Generator`
        resolved generator
    """
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is not None:
        return stream(rng, 0)
    stored: Generator | None = getattr(_thread_default, "rng", None)
    if stored is None:
        stored = np.random.Generator(np.random.Philox())
        _thread_default.rng = stored
    return stored


def stream(seed: int, index: int) -> Generator:
    """Return the generator of work unit ``index`` in the batch keyed by ``seed``.

    The bit generator is Philox, keyed by ``SeedSequence(seed, spawn_key=(index,))``,
    so streams with distinct indices are independent and any stream can be
    rebuilt without generating the others.

    Parameters
    ----------
    seed : `int`
        batch seed, a non-negative integer
    index : `int`
        work-unit index, a non-negative integer

    Returns
    -------
    `numpy.random.Generator`
        generator of the work unit

    Raises
    ------
    ValueError
        if seed or index is negative
    """
    if seed < 0 or index < 0:
        msg = f"Seed and stream index must be non-negative, got seed={seed}, index={index}."
        raise ValueError(msg)
    sequence = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(sequence))


def block_count(n_paths: int, block_size: int = BLOCK_SIZE) -> int:
    """Return the number of blocks of ``block_size`` paths covering ``n_paths``.

    Parameters
    ----------
    n_paths : `int`
        number of paths
    block_size : `int`, optional
        paths per block, by default `BLOCK_SIZE`

    Returns
    -------
    `int`
        number of blocks
    """
    return -(-n_paths // block_size)
