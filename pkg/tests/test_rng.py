import math

import numpy as np
import pytest

from blindptycho import Rng


def test_equal_seeds_equal_streams():
    a, b = Rng(123456789), Rng(123456789)
    assert [a.uniform() for _ in range(10_000)] == [b.uniform() for _ in range(10_000)]


def test_different_seeds_differ():
    a, b = Rng(1), Rng(2)
    assert [a.next_u64() for _ in range(8)] != [b.next_u64() for _ in range(8)]


def test_uniform_range_and_moments():
    rng = Rng(7)
    draws = np.array([rng.uniform() for _ in range(50_000)])
    assert draws.min() >= 0.0 and draws.max() < 1.0
    assert abs(draws.mean() - 0.5) < 0.01
    assert abs(draws.var() - 1.0 / 12.0) < 0.005


def test_normal_moments():
    rng = Rng(21)
    draws = rng.normal_vector(50_000)
    assert abs(draws.mean()) < 0.02
    assert abs(draws.var() - 1.0) < 0.03


def test_complex_normal_unit_variance():
    rng = Rng(5)
    draws = rng.complex_normal_vector(50_000)
    # standard complex normal: E|z|^2 = 1, split evenly over re/im
    assert abs(np.mean(np.abs(draws) ** 2) - 1.0) < 0.02
    assert abs(draws.real.var() - 0.5) < 0.02
    assert abs(draws.imag.var() - 0.5) < 0.02


@pytest.mark.parametrize("mean", [0.5, 3.5, 9.0, 40.0, 300.0])
def test_poisson_moments(mean):
    rng = Rng(int(mean * 1000) + 3)
    n = 20_000
    draws = np.array([rng.poisson(mean) for _ in range(n)])
    tol = 6 * math.sqrt(mean / n)
    assert abs(draws.mean() - mean) < tol
    assert abs(draws.var() - mean) < 0.1 * mean + tol


def test_poisson_large_mean_law_of_large_numbers():
    rng = Rng(99)
    draws = [rng.poisson(1e6) for _ in range(1000)]
    assert abs(np.mean(draws) - 1e6) < 0.01 * 1e6


def test_poisson_zero_and_validation():
    rng = Rng(1)
    assert rng.poisson(0.0) == 0
    with pytest.raises(ValueError):
        rng.poisson(-1.0)


def test_integer_below_and_shuffle_determinism():
    rng = Rng(3)
    vals = [rng.integer_below(10) for _ in range(1000)]
    assert min(vals) >= 0 and max(vals) < 10
    a = list(range(12))
    b = list(range(12))
    Rng(8).shuffle(a)
    Rng(8).shuffle(b)
    assert a == b and sorted(a) == list(range(12))
