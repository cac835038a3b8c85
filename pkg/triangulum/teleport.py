"""
Gate teleportation with converted ancillas: the feed-forward corrections that
absorb the Gaussian conversion into the gadget, and the gate error seen by a
GKP |+> input.

The gadget couples the input (mode 1) and the ancilla (mode 2) with
C_Z = exp(2i q1 q2) and post-selects p = 0 on mode 1.
"""

import math
from dataclasses import dataclass, asdict

import numpy as np

from triangulum.config import defaults
from triangulum.error import DegeneratePostselection, InvalidArgument
from triangulum.fock import FockOperator, matrix_exponential, quadrature_operators
from triangulum.quadrature import gauss_legendre
from triangulum.wavefunction import QuadWavefunction, cubic_phase_wavefunction, gkp_comb


@dataclass(frozen=True)
class FeedForwardCorrection:
    """
    The squeezing S = exp(-i s (qp + pq)/2) and displacement
    D = exp(-i(q p - p q)) on the ancilla rail, commuted through C_Z.

    Commuting turns S D into
    S exp(-i squeeze_phase q1 q2) D exp(-i displacement_phase q1).
    """
    squeeze_strength: float
    q: float
    p: float
    displacement_phase: float
    squeeze_phase: float

    def outcome_phase(self, x: float) -> tuple:
        """
        Returns (constant, linear) such that, for the mode-1 outcome x, the
        extra phases act on the ancilla rail as exp(-i(constant + linear q2)).
        """
        return (self.displacement_phase * x, self.squeeze_phase * x)

    def two_mode_operator(self, cutoff: int) -> FockOperator:
        """
        Returns S exp(-i squeeze_phase q1 q2) D exp(-i displacement_phase q1)
        on two modes truncated at `cutoff` each.
        """
        q1, q2, p2 = _two_mode_quadratures(cutoff)
        squeeze = matrix_exponential(FockOperator(-0.5j * self.squeeze_strength * (q2 @ p2 + p2 @ q2)))
        shift = matrix_exponential(FockOperator(-1j * (self.q * p2 - self.p * q2)))
        coupled = matrix_exponential(FockOperator(-1j * self.squeeze_phase * (q1 @ q2)))
        kick = matrix_exponential(FockOperator(-1j * self.displacement_phase * q1))
        return squeeze @ coupled @ shift @ kick

    def to_dict(self) -> dict:
        return asdict(self)


def _two_mode_quadratures(cutoff: int):
    q, p = quadrature_operators(cutoff)
    eye = np.eye(cutoff + 1)
    return (np.kron(q.matrix, eye), np.kron(eye, q.matrix), np.kron(eye, p.matrix))


def controlled_phase(cutoff: int) -> FockOperator:
    q1, q2, _ = _two_mode_quadratures(cutoff)
    return matrix_exponential(FockOperator(2j * (q1 @ q2)))


def commuted_corrections(s: float, q: float, p: float) -> FeedForwardCorrection:
    """
    Returns the corrections C_Z† (1 ⊗ S D) C_Z in closed form.

    Conjugating by C_Z shifts p2 by q1, so the displacement picks up
    exp(-i q q1) and the squeezing picks up exp(-2i(e^(s/2) - 1) q1 q2).
    """
    for (name, value) in (('s', s), ('q', q), ('p', p)):
        if not math.isfinite(value):
            raise InvalidArgument(name+' must be finite')
    return FeedForwardCorrection(
        squeeze_strength=float(s),
        q=float(q),
        p=float(p),
        displacement_phase=float(q),
        squeeze_phase=2.0 * math.expm1(0.5 * s),
    )


def _gadget_filter(x, delta: float) -> np.ndarray:
    return gkp_comb(x, delta)


def teleported_wavefunction(input_psi: QuadWavefunction, ancilla: QuadWavefunction, nodes: int=None) -> QuadWavefunction:
    """
    Returns the normalized ancilla-rail wavefunction after the gadget,
    psi(q) ~ ancilla(q) int dq' input(q') exp(2i q q').

    A momentum-representation input enters through its amplitude at -q; a
    position-representation input is Fourier transformed by quadrature.
    """
    if nodes is None:
        nodes = defaults().get_int('gkp.nodes')
    if input_psi.representation == 'momentum':
        def factor(q):
            return input_psi(-q)
    elif input_psi.representation == 'position':
        xs, ws = gauss_legendre(-input_psi.domain_halfwidth, input_psi.domain_halfwidth, nodes)
        amp = ws * input_psi(xs)

        def factor(q):
            flat = q.ravel()
            return (np.exp(2j * np.outer(flat, xs)) @ amp).reshape(q.shape)
    else:
        raise InvalidArgument('unknown representation "'+str(input_psi.representation)+'"')

    reach = ancilla.domain_halfwidth
    psi = QuadWavefunction(lambda q: ancilla(q) * factor(q), reach)
    norm = psi.norm(nodes)
    if not norm > 1e-300:
        raise DegeneratePostselection('the p = 0 outcome of the gadget has zero probability')
    return psi.normalized(nodes)


class PureAncilla:
    """
    Density kernel of a pure ancilla, for the mixed-state gate-error path.
    """

    def __init__(self, psi: QuadWavefunction):
        self.psi = psi

    def kernel(self, x, y=None) -> np.ndarray:
        a = self.psi(np.asarray(x, dtype=float).ravel())
        b = a if y is None else self.psi(np.asarray(y, dtype=float).ravel())
        return np.outer(a, b.conj())


def _gate_axis(nodes: int=None):
    cfg = defaults()
    if nodes is None:
        nodes = cfg.get_int('gkp.nodes')
    hw = cfg.get_float('gkp.halfwidth')
    return gauss_legendre(-hw, hw, nodes)


def _resolve_delta(delta: float) -> float:
    if delta is None:
        delta = defaults().get_float('gkp.delta')
    if not 0.0 < delta < 1.0:
        raise InvalidArgument('GKP peak width must lie in (0, 1), got '+str(delta))
    return float(delta)


def gate_error(ancilla, r: float, xi_target: float, delta: float=None, nodes: int=None) -> float:
    """
    Returns 1 - <psi|rho|psi> between the gadget outputs for the ideal cubic
    phase ancilla (psi) and for `ancilla` (rho), with a GKP |+> input.

    `ancilla` is anything exposing `kernel(x)`, the position-space density
    matrix on the points x; a conditional output state of the conversion
    circuit qualifies.
    """
    delta = _resolve_delta(delta)
    x, w = _gate_axis(nodes)
    f = _gadget_filter(x, delta)
    ideal = cubic_phase_wavefunction(r, xi_target)(x) * f
    ideal_norm = float(np.sum(w * np.abs(ideal) ** 2))
    rho = ancilla.kernel(x) * np.outer(f, f)
    trace = float(np.real(np.sum(w * np.diag(rho))))
    if not trace > 1e-300:
        raise DegeneratePostselection('the ancilla leaves no weight on the GKP comb')
    v = w * ideal
    fid = float(np.real(np.conj(v) @ rho @ v)) / (ideal_norm * trace)
    return min(max(1.0 - fid, 0.0), 1.0)


def gate_error_pure(ancilla_psi: QuadWavefunction, r: float, xi_target: float, delta: float=None, nodes: int=None) -> float:
    delta = _resolve_delta(delta)
    x, w = _gate_axis(nodes)
    f = _gadget_filter(x, delta)
    ideal = cubic_phase_wavefunction(r, xi_target)(x) * f
    actual = ancilla_psi(x) * f
    ov = np.sum(w * np.conj(ideal) * actual)
    norms = np.sum(w * np.abs(ideal) ** 2) * np.sum(w * np.abs(actual) ** 2)
    if not norms > 1e-300:
        raise DegeneratePostselection('the ancilla leaves no weight on the GKP comb')
    return min(max(1.0 - float(abs(ov) ** 2 / norms), 0.0), 1.0)
