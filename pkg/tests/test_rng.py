from __future__ import annotations

import numpy as np
import pytest

from jumpentropy.rng import BLOCK_SIZE, block_count, ensure_rng, stream


def test_ensure_rng_passes_through() -> None:
    rng = np.random.default_rng(0)
    assert ensure_rng(rng) is rng


def test_ensure_rng_default_is_reused() -> None:
    assert ensure_rng() is ensure_rng()


def test_ensure_rng_from_seed() -> None:
    assert np.array_equal(ensure_rng(5).random(4), stream(5, 0).random(4))


def test_stream_is_reproducible() -> None:
    a = stream(7, 3).standard_normal(16)
    b = stream(7, 3).standard_normal(16)
    assert np.array_equal(a, b)


def test_streams_differ_by_index_and_seed() -> None:
    base = stream(7, 3).standard_normal(16)
    assert not np.array_equal(base, stream(7, 4).standard_normal(16))
    assert not np.array_equal(base, stream(8, 3).standard_normal(16))


def test_stream_uses_philox() -> None:
    assert isinstance(stream(0, 0).bit_generator, np.random.Philox)


def test_stream_accepts_u64_seed() -> None:
    stream(2**64 - 1, 0).random()


@pytest.mark.parametrize(("seed", "index"), [(-1, 0), (0, -1)])
def test_stream_rejects_negative(seed: int, index: int) -> None:
    with pytest.raises(ValueError, match="non-negative"):
        stream(seed, index)


@pytest.mark.parametrize(
    ("n_paths", "expected"),
    [(0, 0), (1, 1), (BLOCK_SIZE, 1), (BLOCK_SIZE + 1, 2), (10 * BLOCK_SIZE, 10)],
)
def test_block_count(n_paths: int, expected: int) -> None:
    assert block_count(n_paths) == expected
