import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fluxcantilever.model import DeviceParams, derive, reference_device  # noqa: E402


@pytest.fixture
def dev():
    return reference_device()


@pytest.fixture
def dev_dq(dev):
    return derive(dev)


def random_device(rng: np.random.Generator, **fixed) -> DeviceParams:
    """Physically plausible random device, log-uniform over a few decades."""
    def logu(lo, hi):
        return float(10 ** rng.uniform(math.log10(lo), math.log10(hi)))

    kw = dict(
        L=logu(1e-11, 1e-9), C=logu(1e-14, 1e-11), I_c=logu(1e-7, 5e-5),
        length=logu(1e-6, 2e-5), width=logu(1e-6, 2e-5), I_m=logu(1e-27, 1e-22),
        omega_i=float(rng.uniform(0, 2 * math.pi * 1e5)), B_x=logu(1e-4, 0.5),
        theta_0=float(rng.uniform(-math.pi, math.pi)),
    )
    kw.update(fixed)
    return DeviceParams(**kw)


def rel(expected, tol):
    """``pytest.approx`` without the default 1e-12 absolute slack (SI values are tiny)."""
    return pytest.approx(expected, rel=tol, abs=0)
