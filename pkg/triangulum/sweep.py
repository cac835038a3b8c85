"""
Parameter sweeps of the probabilistic protocol: acceptance width, detector
efficiency, input mana, Kerr-deformed inputs and the resulting gate error.
"""

import numpy as np

from triangulum import log
from triangulum.circuit import CircuitParams, ConversionCircuit, DEFAULT_FREE, optimize_probabilistic, scan_parameter
from triangulum.error import DegeneratePostselection, InvalidArgument
from triangulum.fock import build_kerr_trisqueezed, build_trisqueezed, fock_overlap
from triangulum.phase import mana
from triangulum.report import CsvTable
from triangulum.teleport import gate_error

# allowance on M_in >= P M_out for grid error in the manas
MANA_BOUND_SLACK = 0.01


class SweepTable:
    """
    Rows of a sweep with named columns.
    """

    def __init__(self, name: str, columns: list):
        self.name = name
        self.columns = list(columns)
        self.rows = []

    def add(self, *values):
        if len(values) != len(self.columns):
            raise InvalidArgument('sweep '+self.name+' expects '+str(len(self.columns))+' values per row')
        self.rows.append(tuple(values))

    def column(self, name: str) -> np.ndarray:
        return np.array([row[self.columns.index(name)] for row in self.rows], dtype=float)

    def __len__(self):
        return len(self.rows)

    def to_csv(self, path: str, notes: list=None) -> CsvTable:
        table = CsvTable(path, self.columns, notes)
        for row in self.rows:
            table.add_row(row)
        return table


def _output_mana(circuit: ConversionCircuit, params: CircuitParams) -> float:
    return circuit.output_conditional_state(params)[1]


def delta_sweep(circuit: ConversionCircuit, params: CircuitParams, deltas, with_mana: bool=False) -> SweepTable:
    """
    Fidelity and success probability against the acceptance half-width.
    """
    table = SweepTable('delta', ['delta', 'fidelity', 'probability', 'mana_out'])
    for delta in deltas:
        point = params.with_values(delta=float(delta))
        fid, prob = circuit.evaluate(point)
        table.add(float(delta), fid, prob, _output_mana(circuit, point) if with_mana else float('nan'))
    return table


def eta_sweep(circuit: ConversionCircuit, params: CircuitParams, etas, with_mana: bool=False) -> SweepTable:
    """
    Fidelity and success probability against the homodyne efficiency.
    """
    table = SweepTable('eta', ['eta', 'fidelity', 'probability', 'mana_out'])
    for eta in etas:
        point = params.with_values(eta=float(eta))
        fid, prob = circuit.evaluate(point)
        table.add(float(eta), fid, prob, _output_mana(circuit, point) if with_mana else float('nan'))
    return table


def param_sweep(circuit: ConversionCircuit, params: CircuitParams, name: str, values) -> SweepTable:
    table = SweepTable(name, [name, 'fidelity', 'probability'])
    for row in scan_parameter(circuit, params, name, values):
        table.add(*row)
    return table


def mana_sweep(triplicities, r: float, xi_target: float, config, base: CircuitParams=None, free=DEFAULT_FREE, cutoff: int=None, scheme=None) -> SweepTable:
    """
    Re-optimizes the circuit for inputs of growing mana against one target.

    Every row records whether the monotone bound M_in >= P M_out holds.
    """
    table = SweepTable('mana', ['t', 'mana_in', 'fidelity', 'probability', 'mana_out', 'bound_ok'])
    x0 = None
    for t in triplicities:
        state = build_trisqueezed(t, cutoff)
        m_in = mana(state)
        circuit = ConversionCircuit.from_state(state, r, xi_target, scheme)
        result = optimize_probabilistic(circuit, config, free, base, x0=x0)
        x0 = result.best_x
        best = CircuitParams.from_dict(result.extra['params'])
        fid, prob = result.extra['fidelity'], result.extra['probability']
        m_out = _output_mana(circuit, best)
        ok = prob * m_out <= m_in + MANA_BOUND_SLACK
        if not ok:
            log.warn('mana bound violated at t =', t, ': P M_out =', format(prob * m_out, '.4f'), '> M_in =', format(m_in, '.4f'))
        table.add(float(abs(t)), m_in, fid, prob, m_out, ok)
    return table


def kerr_input_fidelity(g3: float, kerr: float, tau: float=1.0, cutoff: int=None) -> float:
    """
    Returns |<trisqueezed(g3 tau)|kerr-trisqueezed>|².
    """
    ideal = build_trisqueezed(g3 * tau, cutoff)
    deformed = build_kerr_trisqueezed(g3, kerr, tau, cutoff)
    return abs(fock_overlap(ideal, deformed)) ** 2


def _kerr_point(t: float, ratio: float, r: float, xi_target: float, config, base: CircuitParams, free, cutoff: int, scheme, x0):
    if not ratio > 0.0:
        raise InvalidArgument('t/K must be positive, got '+str(ratio))
    kerr = t / ratio
    circuit = ConversionCircuit.from_kerr(t, kerr, 1.0, r, xi_target, scheme, cutoff=cutoff)
    result = optimize_probabilistic(circuit, config, free, base, x0=x0)
    return (circuit, result, kerr_input_fidelity(t, kerr, 1.0, cutoff))


def kerr_sweep(t: float, ratios, r: float, xi_target: float, config, base: CircuitParams=None, free=DEFAULT_FREE + ('gamma',), cutoff: int=None, scheme=None) -> SweepTable:
    """
    Re-optimizes the circuit for Kerr-deformed inputs of decreasing t/K.

    The interaction time is fixed to 1, so t is the triplicity g3 and the
    Kerr rate is t divided by the ratio.
    """
    table = SweepTable('kerr', ['t_over_k', 'input_fidelity', 'fidelity', 'probability'])
    x0 = None
    for ratio in ratios:
        _, result, f_in = _kerr_point(t, ratio, r, xi_target, config, base, free, cutoff, scheme, x0)
        x0 = result.best_x
        table.add(float(ratio), f_in, result.extra['fidelity'], result.extra['probability'])
    return table


def gate_error_sweep(t: float, ratios, r: float, xi_target: float, config, delta: float=None, base: CircuitParams=None, free=DEFAULT_FREE + ('gamma',), cutoff: int=None, scheme=None) -> SweepTable:
    """
    Gate error of the teleported cubic phase gate on a GKP |+> input, for
    ancillas converted from Kerr-deformed inputs.
    """
    table = SweepTable('gate-error', ['t_over_k', 'input_fidelity', 'output_fidelity', 'gate_error'])
    x0 = None
    for ratio in ratios:
        circuit, result, f_in = _kerr_point(t, ratio, r, xi_target, config, base, free, cutoff, scheme, x0)
        x0 = result.best_x
        best = CircuitParams.from_dict(result.extra['params'])
        try:
            eps = gate_error(circuit.conditional_state(best), r, xi_target, delta)
        except DegeneratePostselection as e:
            log.warn('skipping t/K =', ratio, ':', e)
            continue
        table.add(float(ratio), f_in, result.extra['fidelity'], eps)
    return table


def gate_error_delta_sweep(circuit: ConversionCircuit, params: CircuitParams, deltas) -> SweepTable:
    """
    Gate error of one conditional output state against the GKP peak width.
    """
    state = circuit.conditional_state(params)
    table = SweepTable('gkp-delta', ['gkp_delta', 'gate_error'])
    for delta in deltas:
        table.add(float(delta), gate_error(state, circuit.r, circuit.xi_target, float(delta)))
    return table
