import numpy as np
import pytest

from vpatch import Grid, RadialDeformation, ellipse_params
from vpatch.fourier import remove_mean


@pytest.fixture
def grid():
    return Grid(128)


@pytest.fixture
def grid256():
    return Grid(256)


@pytest.fixture
def params2():
    return ellipse_params(2.0)


def random_deformation(grid, amplitude, seed, mode_cutoff=10):
    rng = np.random.default_rng(seed)
    theta = grid.nodes
    vals = np.zeros(grid.n_points)
    for n in range(1, mode_cutoff + 1):
        vals += (rng.normal() * np.cos(n * theta) + rng.normal() * np.sin(n * theta)) / (1 + n)
    vals *= amplitude / np.abs(vals).max()
    return RadialDeformation(grid, remove_mean(vals))
