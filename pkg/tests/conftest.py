import numpy as np
import pytest

from nsmaxwell.grid import Grid, SpectralField
from nsmaxwell.dyadic import build_partition


@pytest.fixture(scope="session")
def grid2():
    return Grid(2, 32)


@pytest.fixture(scope="session")
def part2(grid2):
    return build_partition(grid2)


@pytest.fixture(scope="session")
def grid3():
    return Grid(3, 16)


@pytest.fixture(scope="session")
def part3(grid3):
    return build_partition(grid3)


def random_field(grid, seed=0, slope=0.0):
    """Random real spectral field with optional power-law shaping."""
    rng = np.random.default_rng(seed)
    f = SpectralField.from_physical(grid, rng.standard_normal((3,) + grid.shape))
    if slope != 0.0:
        kmag = grid.k_magnitude()
        env = np.where(kmag > 0, np.where(kmag > 0, kmag, 1.0) ** (-slope), 0.0)
        f = SpectralField(grid, f.coeffs * env)
    f.dealias()
    f.zero_nyquist()
    return f


def single_mode_field(grid, mode, amplitude, component=2):
    """Real field with one Hermitian mode pair on the given component."""
    c = np.zeros((3,) + grid.shape, dtype=np.complex128)
    neg = tuple((-m) % grid.n for m in mode)
    pos = tuple(m % grid.n for m in mode)
    c[component][pos] = amplitude
    c[component][neg] = np.conj(amplitude)
    return SpectralField(grid, c)
