import numpy as np
import pytest

from thirdq.basis import build_phi_table
from thirdq.engine import EngineConfig, evolve, initial_state
from thirdq.hyperfock import make_coherent, make_vacuum, tensor

COUPLED_TIMES = [0.0, 3.0, 6.0, 9.0, 12.0]


@pytest.fixture(scope="session")
def hbasis():
    return build_phi_table(16)


@pytest.fixture(scope="session")
def coherent_psi0():
    return tensor(make_coherent(2.0), make_vacuum())


@pytest.fixture(scope="session")
def coupled_run(coherent_psi0):
    """epsilon=0.12, t=12, 1200 steps; conservation monitored every step."""
    return evolve(EngineConfig(), COUPLED_TIMES, monitor_state=coherent_psi0)


@pytest.fixture(scope="session")
def free_run():
    return evolve(EngineConfig(epsilon=0.0))


@pytest.fixture(scope="session")
def schrodinger_ops():
    return initial_state(16)
