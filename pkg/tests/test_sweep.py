import math

import numpy as np
import pytest
from scipy import special

from triangulum.error import InvalidArgument
from triangulum.optim import SwarmConfig
from triangulum.sweep import (
    SweepTable,
    delta_sweep,
    eta_sweep,
    gate_error_delta_sweep,
    gate_error_sweep,
    kerr_input_fidelity,
    kerr_sweep,
    mana_sweep,
    param_sweep,
)


@pytest.fixture
def tiny_swarm():
    return SwarmConfig(n_particles=4, n_iter=1, seed=0)


def test_table_rows_and_csv(tmp_path):
    table = SweepTable('demo', ['a', 'b'])
    table.add(1.0, 2.0)
    table.add(3.0, 4.5)
    with pytest.raises(InvalidArgument):
        table.add(1.0)
    assert len(table) == 2
    assert np.allclose(table.column('b'), [2.0, 4.5])
    csv = table.to_csv(str(tmp_path / 'demo.csv'), ['note'])
    assert csv.get_data() == '# note\na,b\n1,2\n3,4.5\n'


def test_delta_sweep_probability(vacuum_circuit, matched_params):
    deltas = [0.05, 0.1, 0.2]
    table = delta_sweep(vacuum_circuit, matched_params, deltas)
    assert np.allclose(table.column('probability'), special.erf(math.sqrt(2.0) * np.array(deltas)), atol=1e-8)
    assert np.allclose(table.column('fidelity'), 1.0, atol=1e-6)
    assert np.all(np.isnan(table.column('mana_out')))


def test_eta_sweep_lowers_probability(vacuum_circuit, matched_params):
    table = eta_sweep(vacuum_circuit, matched_params, [1.0, 0.9, 0.7])
    probs = table.column('probability')
    assert probs[0] > probs[1] > probs[2]
    assert np.allclose(table.column('fidelity'), 1.0, atol=1e-6)


def test_eta_sweep_with_mana(vacuum_circuit, matched_params):
    table = eta_sweep(vacuum_circuit, matched_params, [1.0], with_mana=True)
    assert abs(table.column('mana_out')[0]) < 1e-3


def test_param_sweep_columns(vacuum_circuit, matched_params):
    table = param_sweep(vacuum_circuit, matched_params, 'd', [0.0, -0.5])
    assert table.columns == ['d', 'fidelity', 'probability']
    assert table.column('fidelity')[1] < table.column('fidelity')[0]


def test_kerr_input_fidelity():
    assert abs(kerr_input_fidelity(0.1, 0.0) - 1.0) < 1e-12
    assert kerr_input_fidelity(0.1, 0.05) < kerr_input_fidelity(0.1, 0.01) < 1.0


def test_gate_error_delta_sweep(vacuum_circuit, matched_params):
    table = gate_error_delta_sweep(vacuum_circuit, matched_params, [0.15, 0.3])
    assert np.all(table.column('gate_error') < 1e-6)


def test_mana_sweep_checks_bound(xi5, tiny_swarm):
    table = mana_sweep([0.05], 0.1, xi5, tiny_swarm, free=('d',))
    assert len(table) == 1
    assert table.column('bound_ok')[0] == 1.0
    assert table.column('mana_in')[0] > 0.0


def test_kerr_sweep_rows(xi5, tiny_swarm):
    table = kerr_sweep(0.1, [10.0], 0.1, xi5, tiny_swarm, free=('d', 'gamma'))
    assert table.columns == ['t_over_k', 'input_fidelity', 'fidelity', 'probability']
    assert 0.0 < table.column('input_fidelity')[0] < 1.0
    with pytest.raises(InvalidArgument):
        kerr_sweep(0.1, [0.0], 0.1, xi5, tiny_swarm, free=('d',))


def test_gate_error_sweep_rows(xi5, tiny_swarm):
    table = gate_error_sweep(0.1, [10.0], 0.1, xi5, tiny_swarm, delta=0.2, free=('d', 'gamma'))
    assert len(table) == 1
    assert 0.0 <= table.column('gate_error')[0] <= 1.0
