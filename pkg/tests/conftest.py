import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sepbf.model import AntipodalSpec, WiretapSystem

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

SETUP1_HB = [[0.21, 0.011], [0.09, 0.3]]
SETUP1_HE = [[0.01, 0.02], [0.017, 0.01]]
SETUP2_HE = [[-0.01, 0.02], [0.01, 0.01]]
SETUP3_HB = [[0.21, 0.015], [0.1, 0.12]]
SETUP3_HE = [[0.01, 0.071], [0.01, 0.01]]
FIG4_HB = [[0.0262, 0.0049], [-0.1598, -0.2414]]
FIG4_HE = [[0.0498, 0.0194], [-0.0446, -0.0758]]


def make_sys(hb, he, n=0.01, power=1.0):
    return WiretapSystem(np.array(hb, float), np.array(he, float), n, n, power)


@pytest.fixture
def setup1():
    return make_sys(SETUP1_HB, SETUP1_HE), AntipodalSpec(1.0, 0.346)


@pytest.fixture
def setup2():
    return make_sys(SETUP1_HB, SETUP2_HE), AntipodalSpec(1.0, 0.2)


@pytest.fixture
def setup3():
    return make_sys(SETUP3_HB, SETUP3_HE), AntipodalSpec(1.0, 0.3246)


@pytest.fixture
def fig3():
    hb = np.full((2, 2), 0.21)
    he = np.array([[0.21, -0.21], [-0.21, 0.21]])
    return WiretapSystem(hb, he, 0.1, 0.1, 1.0), AntipodalSpec(1.0, 0.2)


@pytest.fixture
def fig4():
    return make_sys(FIG4_HB, FIG4_HE)


def random_hermitian(rng, n, psd=False):
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return x @ x.conj().T if psd else 0.5 * (x + x.conj().T)


def polar_grid(points=10**6):
    """Unit-disk grid, uniform in area: sqrt(points) radii x sqrt(points) angles."""
    k = int(round(points ** 0.5))
    r = np.sqrt(np.linspace(0.0, 1.0, k))[:, None]
    th = np.linspace(0.0, 2 * np.pi, k, endpoint=False)[None, :]
    return np.stack([(r * np.cos(th)).ravel(), (r * np.sin(th)).ravel()])
