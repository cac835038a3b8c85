import math

import pytest

from triangulum import log
from triangulum.circuit import CircuitParams, ConversionCircuit
from triangulum.fock import FockVector, db_to_xi


@pytest.fixture(autouse=True)
def quiet():
    log.set_quiet(True)
    yield
    log.set_quiet(False)


@pytest.fixture
def xi5():
    # 5 dB of target squeezing
    return db_to_xi(5.0)


@pytest.fixture
def vacuum_circuit():
    """
    Vacuum on the measured rail and a squeezed target that a quarter turn of
    the ancilla reproduces exactly.
    """
    return ConversionCircuit.from_state(FockVector.basis(0, 3), 0.0, -0.5, rotate=False)


@pytest.fixture
def matched_params():
    return CircuitParams(theta=0.0, xi=0.5, gamma=-math.pi / 2.0, d=0.0, delta=0.1)
