import numpy as np
import pytest

from walldist.grid import build_cartesian


@pytest.fixture(scope="session")
def channel_grid():
    """Unit-height channel on 101x101, walls at y = 0 and y = 1."""
    return build_cartesian(101, 101, Lx=1.0, Ly=1.0)


@pytest.fixture(scope="session")
def channel_exact(channel_grid):
    y = channel_grid.y
    return np.minimum(y, 1.0 - y)


@pytest.fixture(scope="session")
def small_grid():
    return build_cartesian(21, 21, Lx=1.0, Ly=1.0)
