import numpy as np
import pytest

from amalgam import Corpus, make_grid


@pytest.fixture(scope="session")
def desk_grid():
    """The standard working grid: dimension one, box half width 4, 2^12 nodes."""
    return make_grid(dim=1, half_width=4.0, points_per_axis=4096)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(dim=1, half_width=4.0, points_per_axis=256)


@pytest.fixture(scope="session")
def tiny_grid_2d():
    return make_grid(dim=2, half_width=2.0, points_per_axis=16)


@pytest.fixture(scope="session")
def corpus20(desk_grid):
    """Twenty corpus members realized on the desk grid."""
    return Corpus.generate(20, seed=0).realize(desk_grid)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
