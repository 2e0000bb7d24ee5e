import math

import numpy as np
import pytest

from ionising.coupling import detuning_schedule, response_tensor
from ionising.crystal import default_trap, equilibrium_positions, transverse_modes

OMEGA_COM = 2.0 * math.pi * 5e6


@pytest.fixture(scope="session")
def trap5():
    return default_trap(5, OMEGA_COM)


@pytest.fixture(scope="session")
def design5(trap5):
    """Five-ion trap with its modes, schedule (f_s = 0.03), and response tensor."""
    crystal = equilibrium_positions(trap5)
    modes = transverse_modes(trap5, crystal)
    sched = detuning_schedule(modes, 0.03)
    f = response_tensor(modes, sched)
    return trap5, crystal, modes, sched, f


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
