import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qball_vortex.grid import build_grid
from qball_vortex.potential import PotentialModel, quintic_well

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_grid():
    return build_grid(8, 8, 1.0, 1.0)


@pytest.fixture
def torus_grid():
    return build_grid(64, 64, 4.0, 2.0)


@pytest.fixture
def cubic_model():
    return PotentialModel(1.0, ((1.0 / 3.0, 3.0),))


@pytest.fixture
def well():
    return quintic_well(1000.0)


def random_fields(grid, rng, l, scale=0.3):
    """Smooth-ish positive u and a with a = 0 and (for l != 0) u -> 0 at the axis."""
    R, Z = grid.R, grid.Z
    span = max(grid.r_max, grid.z_half)
    bump = np.exp(-((R - 0.4 * grid.r_max) ** 2 + Z**2) / (0.1 * span**2))
    noise = 1.0 + 0.3 * rng.standard_normal(grid.shape)
    u = scale * bump * np.abs(noise)
    if l != 0:
        u = u * np.tanh(R / (0.2 * span))
    a = 0.2 * rng.standard_normal() * (R / span) ** 2 * bump * (1 + 0.2 * rng.standard_normal(grid.shape))
    return u, a
