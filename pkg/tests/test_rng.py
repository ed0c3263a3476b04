import numpy as np
import pytest

from plstats import rng


def test_same_keys_same_stream():
    a = rng.derive(42, rng.MATRIX, 7).random(5)
    b = rng.derive(42, rng.MATRIX, 7).random(5)
    assert np.array_equal(a, b)


def test_distinct_keys_distinct_streams():
    draws = {tuple(rng.derive(42, p, r).random(3)) for p in range(5) for r in range(20)}
    assert len(draws) == 100
    assert not np.array_equal(rng.derive(1).random(3), rng.derive(2).random(3))


def test_seed_validation():
    rng.derive(2**64 - 1)
    with pytest.raises(ValueError):
        rng.derive(2**64)
    with pytest.raises(ValueError):
        rng.derive(-1)
    with pytest.raises(TypeError):
        rng.derive(1.5)
    with pytest.raises(TypeError):
        rng.derive(True)


def test_generator_passthrough():
    g = np.random.default_rng(3)
    assert rng.generator(g) is g
    assert np.array_equal(rng.generator(9).random(2), rng.derive(9).random(2))
