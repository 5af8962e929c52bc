import numpy as np
import pytest

from blindptycho import Rng, ShiftSet, synthesize_problem


@pytest.fixture
def small_problem():
    """Noiseless circular instance with default smoothing and Tikhonov weights."""
    return synthesize_problem(d=8, seed=11)


@pytest.fixture
def padded_problem():
    shifts = ShiftSet.all_shifts(8, "zero-padded")
    return synthesize_problem(d=8, shifts=shifts, seed=12, epsilon=1e-3)


def random_pair(d, seed, scale=1.0):
    rng = Rng(seed)
    return (scale * rng.complex_normal_vector(d),
            scale * rng.complex_normal_vector(d))


def np_pair(d, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    return (scale * (rng.normal(size=d) + 1j * rng.normal(size=d)) / np.sqrt(2),
            scale * (rng.normal(size=d) + 1j * rng.normal(size=d)) / np.sqrt(2))
