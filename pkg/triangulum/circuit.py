"""
The probabilistic conversion circuit: a beam splitter mixes the input with a
displaced squeezed ancilla, the ancilla rail is rotated, the input rail is
measured by binned homodyne detection and the kept rail is displaced.

All quantities are evaluated as quadrature sums over position wavefunctions.
"""

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, asdict, replace, fields

import numpy as np
from scipy import special

from triangulum import log
from triangulum.config import defaults
from triangulum.error import DegeneratePostselection, InvalidArgument, SingularKernel
from triangulum.fock import (
    FockVector,
    build_displaced_squeezed,
    build_kerr_trisqueezed,
    build_trisqueezed,
    ladder_operators,
    matrix_exponential,
    FockOperator,
)
from triangulum.optim import Bounds, maximize
from triangulum.phase import WignerGrid, widening, wigner_wavefunctions
from triangulum.quadrature import QuadratureScheme, gauss_legendre
from triangulum.wavefunction import (
    QuadWavefunction,
    cubic_phase_wavefunction,
    displaced_squeezed_wavefunction,
    hermite_functions,
    position_wavefunction,
)

FIDELITY_CEILING = 1.0 + 1e-6

MIN_PROBABILITY = 1e-12

# rotation taking triplicity t to t exp(i pi/2)
INPUT_ROTATION = -math.pi / 6.0

PARAMETER_BOUNDS = {
    'theta': (0.0, math.pi / 2.0),
    'xi': (0.0, 1.5),
    'q_beta': (0.0, 1.5),
    'p_beta': (-1.5, 1.5),
    'gamma': (-math.pi + 0.05, -0.05),
    'd': (-3.0, 0.0),
    'q_n': (-1.0, 1.0),
    'delta': (0.01, 1.0),
    'eta': (0.1, 1.0),
}

DEFAULT_FREE = ('theta', 'q_beta', 'xi', 'd')

# overlap kernels kept per circuit; each holds q0_nodes x q2_nodes complex values
KERNEL_CACHE_SIZE = 4


@dataclass(frozen=True)
class CircuitParams:
    """
    Knobs of the conversion circuit.

    `theta` is the beam-splitter angle, `xi` and `q_beta + i p_beta` the ancilla
    squeezing and displacement, `gamma` the rotation of the ancilla rail, `d`
    the final momentum displacement, `q_n` and `delta` the accepted homodyne
    bin and `eta` the detector efficiency.
    """
    theta: float = 0.0
    xi: float = 0.0
    q_beta: float = 0.0
    p_beta: float = 0.0
    gamma: float = -math.pi / 2.0
    d: float = 0.0
    q_n: float = 0.0
    delta: float = 0.1
    eta: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise InvalidArgument('circuit parameter '+f.name+' must be finite')
            object.__setattr__(self, f.name, float(value))
        if not self.delta > 0.0:
            raise InvalidArgument('bin half-width delta must be positive')
        if not 0.0 < self.eta <= 1.0:
            raise InvalidArgument('detector efficiency must lie in (0, 1], got '+str(self.eta))

    @staticmethod
    def names() -> list:
        return [f.name for f in fields(CircuitParams)]

    @staticmethod
    def from_defaults(**values):
        cfg = defaults()
        base = {'gamma': cfg.get_float('circuit.gamma'), 'delta': cfg.get_float('circuit.delta')}
        base.update(values)
        return CircuitParams(**base)

    @staticmethod
    def from_dict(data: dict):
        unknown = set(data.keys()) - set(CircuitParams.names())
        if len(unknown) > 0:
            raise InvalidArgument('unknown circuit parameters: '+', '.join(sorted(unknown)))
        return CircuitParams(**{k: float(v) for (k, v) in data.items()})

    def with_values(self, **values):
        return replace(self, **values)

    def to_dict(self) -> dict:
        return asdict(self)

    def smearing(self) -> float:
        """
        Returns the standard deviation of the detector noise, sqrt((1 - eta)/(4 eta)).
        """
        return math.sqrt((1.0 - self.eta) / (4.0 * self.eta))

    def check_bounds(self, names=None):
        """
        Raises if any named parameter leaves its optimization range.
        """
        for name in (names if names is not None else PARAMETER_BOUNDS.keys()):
            lo, hi = PARAMETER_BOUNDS[name]
            value = getattr(self, name)
            if value < lo or value > hi:
                raise InvalidArgument('parameter '+name+' = '+str(value)+' outside of ['+str(lo)+', '+str(hi)+']')


def overlap_kernel(q0, q2, gamma: float):
    """
    Returns int d²alpha <q2|alpha>* <q0|alpha e^(-i gamma)>.

    Divided by pi this is the position-space propagator of exp(-i gamma n).
    """
    s = math.sin(gamma)
    if abs(s) < 1e-12:
        raise SingularKernel('rotation angle '+str(gamma)+' is a multiple of pi')
    q0 = np.asarray(q0, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    pref = math.sqrt(2.0 / math.pi) * math.pi / np.sqrt(1.0 - np.exp(-2j * gamma))
    return pref * np.exp(1j / s * (-2.0 * q0 * q2 + (q0 * q0 + q2 * q2) * math.cos(gamma)))


def rotate_input(state: FockVector) -> FockVector:
    """
    Rotates a state so that triplicity t becomes t exp(i pi/2).
    """
    n = np.arange(state.get_cutoff() + 1)
    return FockVector(state.get_amplitudes() * np.exp(-1j * INPUT_ROTATION * n))


class ConditionalState:
    """
    Output of the circuit conditioned on a bin of homodyne outcomes.

    Holds the unnormalized output wavefunctions for the sampled outcomes q_k,
    carried on the ancilla-rail quadrature nodes, and their mixing weights.
    The density matrix is sum_k weights[k] |psi_k><psi_k|, with unit trace.
    """

    def __init__(self, amplitudes, weights, nodes, node_weights, gamma: float, d: float, reach: float):
        # amplitudes[k, j] = g_k(q2_j): the pre-rotation ancilla-rail wavefunction
        self.amplitudes = amplitudes
        self.weights = weights
        self.nodes = nodes
        self.node_weights = node_weights
        self.gamma = gamma
        self.d = d
        self.reach = reach

    def evaluate(self, x) -> np.ndarray:
        """
        Returns psi_k(x) for every sampled outcome, with shape (len(x), k).
        """
        x = np.asarray(x, dtype=float).ravel()
        kernel = overlap_kernel(x[:, np.newaxis], self.nodes[np.newaxis, :], self.gamma) / math.pi
        out = kernel @ (self.node_weights * self.amplitudes).T
        return np.exp(1j * self.d * x)[:, np.newaxis] * out

    def wavefunction(self, k: int) -> QuadWavefunction:
        column = self.node_weights * self.amplitudes[k]

        def evaluate(x):
            flat = x.ravel()
            kernel = overlap_kernel(flat[:, np.newaxis], self.nodes[np.newaxis, :], self.gamma) / math.pi
            return (np.exp(1j * self.d * flat) * (kernel @ column)).reshape(x.shape)

        return QuadWavefunction(evaluate, self.reach)

    def wavefunctions(self) -> list:
        return [self.wavefunction(k) for k in range(self.amplitudes.shape[0])]

    def kernel(self, x, y=None) -> np.ndarray:
        """
        Returns the density matrix <x|rho|y> on the given points.
        """
        a = self.evaluate(x)
        b = a if y is None else self.evaluate(y)
        return (a * self.weights) @ b.conj().T

    def gram(self) -> np.ndarray:
        g = self.amplitudes
        return (g.conj() * self.node_weights) @ g.T

    def purity(self) -> float:
        gram = self.gram()
        return float(np.real(np.sum(np.outer(self.weights, self.weights) * np.abs(gram) ** 2)))

    def overlaps(self, psi: QuadWavefunction, nodes: int=None) -> np.ndarray:
        """
        Returns <psi|psi_k> for every sampled outcome.
        """
        if nodes is None:
            x, w = self.nodes, self.node_weights
        else:
            x, w = gauss_legendre(-self.reach, self.reach, nodes)
        return (w * np.conj(psi(x))) @ self.evaluate(x)

    def fidelity(self, psi: QuadWavefunction, nodes: int=None) -> float:
        f = float(np.sum(self.weights * np.abs(self.overlaps(psi, nodes)) ** 2))
        return min(max(f, 0.0), FIDELITY_CEILING)

    def wigner(self, q_axis, p_axis=None, check: bool=True) -> WignerGrid:
        if p_axis is None:
            p_axis = q_axis
        return wigner_wavefunctions(self.wavefunctions(), self.weights, q_axis, p_axis, check=check)

    def mana(self) -> float:
        return self.wigner_widened().mana()

    def wigner_widened(self) -> WignerGrid:
        return widening(lambda axis: self.wigner(axis, axis), fallback=True)


class ConversionCircuit:
    """
    The circuit for a fixed input state and cubic phase target.
    """

    def __init__(self, input_psi: QuadWavefunction, r: float, xi_target: float, scheme: QuadratureScheme=None, input_state: FockVector=None):
        self.input_psi = input_psi
        self.input_state = input_state
        self.r = float(r)
        self.xi_target = float(xi_target)
        self.scheme = scheme if scheme is not None else QuadratureScheme.from_defaults()
        self._q0, self._w0 = self.scheme.q0_rule()
        self._q2, self._w2 = self.scheme.q2_rule()
        self._kernels = OrderedDict()
        self._kernel_lock = threading.Lock()

    @staticmethod
    def from_state(state: FockVector, r: float, xi_target: float, scheme: QuadratureScheme=None, rotate: bool=True):
        if rotate:
            state = rotate_input(state)
        return ConversionCircuit(position_wavefunction(state), r, xi_target, scheme, state)

    @staticmethod
    def from_triplicity(t: complex, r: float, xi_target: float, scheme: QuadratureScheme=None, rotate: bool=True, cutoff: int=None):
        return ConversionCircuit.from_state(build_trisqueezed(t, cutoff), r, xi_target, scheme, rotate)

    @staticmethod
    def from_kerr(g3: float, kerr: float, tau: float, r: float, xi_target: float, scheme: QuadratureScheme=None, rotate: bool=True, cutoff: int=None):
        return ConversionCircuit.from_state(build_kerr_trisqueezed(g3, kerr, tau, cutoff), r, xi_target, scheme, rotate)

    def with_scheme(self, scheme: QuadratureScheme):
        return ConversionCircuit(self.input_psi, self.r, self.xi_target, scheme, self.input_state)

    def target(self, d: float=0.0) -> QuadWavefunction:
        return cubic_phase_wavefunction(self.r, self.xi_target, d)

    def _kernel_matrix(self, gamma: float) -> np.ndarray:
        # least recently used kernels are dropped once KERNEL_CACHE_SIZE are held
        with self._kernel_lock:
            kernel = self._kernels.get(gamma)
            if kernel is not None:
                self._kernels.move_to_end(gamma)
                return kernel
        kernel = overlap_kernel(self._q0[:, np.newaxis], self._q2[np.newaxis, :], gamma) / math.pi
        with self._kernel_lock:
            self._kernels[gamma] = kernel
            while len(self._kernels) > KERNEL_CACHE_SIZE:
                self._kernels.popitem(last=False)
        return kernel

    def cached_kernels(self) -> int:
        return len(self._kernels)

    def _rails(self, params: CircuitParams, q: np.ndarray):
        # input and ancilla amplitudes along q2 for each outcome q
        c, s = math.cos(params.theta), math.sin(params.theta)
        ancilla = displaced_squeezed_wavefunction(params.xi, complex(params.q_beta, params.p_beta))
        qq = q[:, np.newaxis]
        x2 = self._q2[np.newaxis, :]
        return (self.input_psi(qq * c + x2 * s), ancilla(-qq * s + x2 * c))

    def _outcome_rule(self, params: CircuitParams):
        """
        Returns outcome nodes and their acceptance-weighted quadrature weights.
        """
        if params.eta >= 1.0:
            return self.scheme.bin_rule(params.q_n, params.delta)
        sigma = params.smearing()
        q, w = self.scheme.smear_rule(params.q_n, params.delta, sigma)
        root = math.sqrt(2.0) * sigma
        accept = 0.5 * (special.erf((params.q_n + params.delta - q) / root) - special.erf((params.q_n - params.delta - q) / root))
        return q, w * accept

    def _amplitudes(self, params: CircuitParams):
        q, w = self._outcome_rule(params)
        a, b = self._rails(params, q)
        g = a * b
        density = np.abs(a) ** 2 * np.abs(b) ** 2
        return q, w, g, density @ self._w2

    def overlap(self, params: CircuitParams, q: float) -> complex:
        """
        Returns <target displaced by -d|psi_out^q> for one homodyne outcome.
        """
        a, b = self._rails(params, np.array([float(q)]))
        v = (self._w0 * np.conj(self.target(params.d)(self._q0))) @ self._kernel_matrix(params.gamma)
        return complex((a * b)[0] @ (self._w2 * v))

    def success_probability(self, params: CircuitParams) -> float:
        q, w, g, dens = self._amplitudes(params)
        return float(np.sum(w * dens))

    def evaluate(self, params: CircuitParams):
        """
        Returns (fidelity, probability) of the conditional output state, for
        efficient or inefficient detection according to `params.eta`.
        """
        q, w, g, dens = self._amplitudes(params)
        prob = float(np.sum(w * dens))
        if prob < MIN_PROBABILITY:
            raise DegeneratePostselection('success probability '+format(prob, '.3e')+' is below '+format(MIN_PROBABILITY, '.0e'))
        v = (self._w0 * np.conj(self.target(params.d)(self._q0))) @ self._kernel_matrix(params.gamma)
        ov = g @ (self._w2 * v)
        fid = float(np.sum(w * np.abs(ov) ** 2)) / prob
        return (min(max(fid, 0.0), FIDELITY_CEILING), prob)

    def conditional_fidelity(self, params: CircuitParams) -> float:
        if params.eta < 1.0:
            raise InvalidArgument('use conditional_fidelity_inefficient for eta < 1')
        return self.evaluate(params)[0]

    def conditional_fidelity_inefficient(self, params: CircuitParams):
        return self.evaluate(params)

    def conditional_state(self, params: CircuitParams) -> ConditionalState:
        q, w, g, dens = self._amplitudes(params)
        prob = float(np.sum(w * dens))
        if prob < MIN_PROBABILITY:
            raise DegeneratePostselection('success probability '+format(prob, '.3e')+' is below '+format(MIN_PROBABILITY, '.0e'))
        return ConditionalState(g, w / prob, self._q2, self._w2, params.gamma, params.d, self.scheme.q2_halfwidth)

    def output_conditional_state(self, params: CircuitParams, q_axis=None, p_axis=None):
        """
        Returns the Wigner function of the conditional output and its mana.
        """
        state = self.conditional_state(params)
        if q_axis is None:
            grid = state.wigner_widened()
        else:
            grid = state.wigner(q_axis, p_axis)
        return (grid, grid.mana())

    def objective(self, base: CircuitParams, free):
        """
        Returns x -> fidelity with the `free` parameters taken from x; failed
        post-selection scores 0.
        """
        free = list(free)

        def evaluate(x):
            params = base.with_values(**{name: float(v) for (name, v) in zip(free, x)})
            try:
                return self.evaluate(params)[0]
            except DegeneratePostselection:
                return 0.0
        return evaluate


def free_bounds(free, overrides: dict=None) -> Bounds:
    """
    Returns the search box for the free parameters, with optional overrides
    that must stay inside the default ranges.
    """
    pairs = []
    for name in free:
        if name not in PARAMETER_BOUNDS:
            raise InvalidArgument('parameter "'+name+'" cannot be optimized')
        lo, hi = PARAMETER_BOUNDS[name]
        if overrides is not None and name in overrides:
            new_lo, new_hi = overrides[name]
            if new_lo < lo or new_hi > hi or new_lo > new_hi:
                raise InvalidArgument('bounds for '+name+' must lie inside ['+str(lo)+', '+str(hi)+']')
            lo, hi = new_lo, new_hi
        pairs.append((lo, hi))
    return Bounds.from_pairs(pairs)


def optimize_probabilistic(circuit: ConversionCircuit, config, free=DEFAULT_FREE, base: CircuitParams=None, progress=None, bounds: dict=None, x0=None):
    """
    Maximizes the conditional fidelity over the `free` circuit parameters.
    """
    if base is None:
        base = CircuitParams.from_defaults()
    free = list(free)
    box = free_bounds(free, bounds)
    log.info('optimizing circuit parameters', ', '.join(free))
    result = maximize(circuit.objective(base, free), box, config, progress, x0)
    best = base.with_values(**{name: v for (name, v) in zip(free, result.best_x)})
    fid, prob = circuit.evaluate(best)
    result.extra = {
        'free': free,
        'params': best.to_dict(),
        'fidelity': fid,
        'probability': prob,
        'r': circuit.r,
        'xi_target': circuit.xi_target,
    }
    return result


def scan_parameter(circuit: ConversionCircuit, params: CircuitParams, name: str, values) -> list:
    """
    Returns rows (value, fidelity, probability) with one parameter varied.
    """
    if name not in CircuitParams.names():
        raise InvalidArgument('unknown circuit parameter "'+name+'"')
    rows = []
    for value in values:
        fid, prob = circuit.evaluate(params.with_values(**{name: float(value)}))
        rows.append((float(value), fid, prob))
    return rows


def simulate_fock(state: FockVector, params: CircuitParams, r: float, xi_target: float, cutoff: int=40, scheme: QuadratureScheme=None):
    """
    Runs the circuit on a two-mode truncated Fock space.

    Returns (fidelity, probability) for efficient detection; used to check
    the quadrature pipeline.
    """
    if params.eta < 1.0:
        raise InvalidArgument('the two-mode check covers efficient detection only')
    scheme = scheme if scheme is not None else QuadratureScheme.from_defaults()
    size = cutoff + 1
    psi_in = state.resize(cutoff).get_amplitudes()
    psi_anc = build_displaced_squeezed(params.xi, complex(params.q_beta, params.p_beta), cutoff).get_amplitudes()

    a, _ = ladder_operators(cutoff)
    eye = np.eye(size)
    a1 = np.kron(a.matrix, eye)
    a2 = np.kron(eye, a.matrix)
    generator = params.theta * (a1 @ a2.conj().T - a1.conj().T @ a2)
    mixer = matrix_exponential(FockOperator(generator)).matrix
    joint = (mixer @ np.kron(psi_in, psi_anc)).reshape(size, size)
    joint = joint * np.exp(-1j * params.gamma * np.arange(size))[np.newaxis, :]

    q, w = scheme.bin_rule(params.q_n, params.delta)
    phi = hermite_functions(cutoff, q)
    rail = phi.T @ joint
    x0, w0 = scheme.q0_rule()
    target = cubic_phase_wavefunction(r, xi_target, params.d)(x0)
    coeffs = hermite_functions(cutoff, x0) @ (w0 * target)
    prob = float(np.sum(w * np.sum(np.abs(rail) ** 2, axis=1)))
    if prob < MIN_PROBABILITY:
        raise DegeneratePostselection('success probability '+format(prob, '.3e')+' is below '+format(MIN_PROBABILITY, '.0e'))
    ov = rail @ np.conj(coeffs)
    return (float(np.sum(w * np.abs(ov) ** 2)) / prob, prob)
