import numpy as np
import pytest

from cvteleport import GridSpec, SampledWaveFunction, normalize


def rel_l2(a, b):
    """Relative L2 distance between two states on a common grid."""
    return float(
        np.linalg.norm(a.amplitudes - b.amplitudes) / np.linalg.norm(a.amplitudes)
    )


def random_state(grid, rng, packets=2):
    """Smooth random state: a few Gaussian packets, resolved and well inside."""
    span = grid.span
    kick_max = 0.12 * np.pi / grid.dx
    amps = np.zeros(grid.n, dtype=np.complex128)
    xs = grid.points
    mid = grid.x_min + span / 2
    for _ in range(packets):
        width = rng.uniform(3.0 * grid.dx, span / 14)
        center = mid + rng.uniform(-0.12, 0.12) * span
        kick = rng.uniform(-kick_max, kick_max)
        coeff = rng.normal() + 1j * rng.normal()
        amps += coeff * np.exp(
            -((xs - center) ** 2) / (4.0 * width**2) + 1j * kick * xs
        )
    return normalize(SampledWaveFunction(grid, amps))


@pytest.fixture
def unit_grid():
    return GridSpec(-16.0, 0.125, 256)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
