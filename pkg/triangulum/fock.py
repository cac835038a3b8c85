"""
Truncated Fock-space states and operators.

Quadratures follow hbar = 1/2: q = (a + a†)/2 and p = (a - a†)/(2i), so the
vacuum has <q²> = <p²> = 1/4.
"""

import json
import math

import numpy as np
from scipy import linalg

from triangulum import log
from triangulum.config import defaults
from triangulum.error import InvalidArgument, TruncationError

HERMITIAN_TOL = 1e-12

MAX_TRIPLICITY = 0.2


def db_to_xi(db: float) -> float:
    """
    Converts a squeezing level in decibels into the (negative) squeezing
    parameter of an anti-squeezed position quadrature.
    """
    return -math.log(10.0 ** (db / 20.0))


def xi_to_db(xi: float) -> float:
    return 20.0 * abs(xi) / math.log(10.0)


class FockOperator:
    """
    A square matrix on the truncated Fock space {|0>, ..., |cutoff>}.
    """

    # numpy scalars defer to __rmul__ instead of broadcasting
    __array_ufunc__ = None

    def __init__(self, matrix):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidArgument('operator matrix must be square, got shape '+str(m.shape))
        m.setflags(write=False)
        self.matrix = m

    @staticmethod
    def identity(cutoff: int):
        return FockOperator(np.eye(cutoff + 1))

    def get_cutoff(self) -> int:
        return self.matrix.shape[0] - 1

    def dag(self):
        return FockOperator(self.matrix.conj().T)

    def is_hermitian(self, tol: float=HERMITIAN_TOL) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, rtol=0.0, atol=tol))

    def apply(self, state):
        """
        Returns the (renormalized) state obtained by acting on `state`.
        """
        return FockVector(self.matrix @ state.amplitudes)

    def __matmul__(self, other):
        return FockOperator(self.matrix @ other.matrix)

    def __add__(self, other):
        return FockOperator(self.matrix + other.matrix)

    def __sub__(self, other):
        return FockOperator(self.matrix - other.matrix)

    def __mul__(self, scalar):
        return FockOperator(self.matrix * scalar)

    def __rmul__(self, scalar):
        return FockOperator(self.matrix * scalar)

    def __neg__(self):
        return FockOperator(-self.matrix)


class FockVector:
    """
    A normalized pure state in the truncated Fock basis.
    """

    def __init__(self, amplitudes):
        c = np.array(amplitudes, dtype=complex).ravel()
        if c.size < 2:
            raise InvalidArgument('a Fock vector needs a cutoff of at least 1')
        if not np.all(np.isfinite(c)):
            raise InvalidArgument('Fock amplitudes must be finite')
        norm = np.linalg.norm(c)
        if norm == 0.0:
            raise InvalidArgument('cannot normalize the zero vector')
        c = c / norm
        c.setflags(write=False)
        self.amplitudes = c

    @staticmethod
    def basis(n: int, cutoff: int):
        if n < 0 or n > cutoff:
            raise InvalidArgument('Fock index '+str(n)+' outside of [0, '+str(cutoff)+']')
        c = np.zeros(cutoff + 1, dtype=complex)
        c[n] = 1.0
        return FockVector(c)

    def get_cutoff(self) -> int:
        return self.amplitudes.size - 1

    def get_amplitudes(self) -> np.ndarray:
        return self.amplitudes

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def support(self) -> np.ndarray:
        """
        Returns the Fock indices with nonzero amplitude.
        """
        return np.flatnonzero(self.amplitudes != 0.0)

    def tail_mass(self, fraction: float=None) -> float:
        """
        Returns the probability carried by the top `fraction` of Fock indices.
        """
        if fraction is None:
            fraction = defaults().get_float('fock.tail_fraction')
        size = self.amplitudes.size
        count = max(1, int(math.ceil(fraction * size)))
        return float(np.sum(np.abs(self.amplitudes[size - count:]) ** 2))

    def check_tail(self, tolerance: float=None, warning: float=None):
        """
        Raises a truncation error when the tail mass reaches `tolerance` and
        warns when it reaches `warning`.

        Truncated three-photon evolutions keep a tail that shrinks only slowly
        with the cutoff, so the default limit is loose and the warning is not.
        """
        cfg = defaults()
        if tolerance is None:
            tolerance = cfg.get_float('fock.tail_limit')
        if warning is None:
            warning = min(tolerance, cfg.get_float('fock.tail_warning'))
        tail = self.tail_mass()
        if tail >= warning and tail < tolerance:
            log.warn('tail mass', format(tail, '.3e'), 'at cutoff', self.get_cutoff(), '; results may shift with --cutoff', 2 * self.get_cutoff())
        if not tail < tolerance:
            cutoff = self.get_cutoff()
            raise TruncationError(
                'tail mass '+format(tail, '.3e')+' above '+format(tolerance, '.1e')+' at cutoff '+str(cutoff)+'; try --cutoff '+str(2*cutoff),
                suggested_cutoff=2*cutoff,
            )
        return self

    def resize(self, cutoff: int):
        """
        Pads with zeros, or truncates and renormalizes, to the new cutoff.
        """
        c = np.zeros(cutoff + 1, dtype=complex)
        keep = min(cutoff, self.get_cutoff()) + 1
        c[:keep] = self.amplitudes[:keep]
        return FockVector(c)

    def density(self):
        return FockDensity(np.outer(self.amplitudes, self.amplitudes.conj()))

    def to_dict(self) -> dict:
        return {
            'cutoff': self.get_cutoff(),
            'amplitudes': [[float(z.real), float(z.imag)] for z in self.amplitudes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_json(text: str):
        data = json.loads(text)
        amps = np.array([complex(re, im) for (re, im) in data['amplitudes']])
        if amps.size != int(data['cutoff']) + 1:
            raise InvalidArgument('amplitude count does not match the cutoff')
        return FockVector(amps)


class FockDensity:
    """
    A density matrix in the truncated Fock basis, normalized to unit trace.
    """

    def __init__(self, matrix):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise InvalidArgument('density matrix must be square with cutoff >= 1')
        trace = np.trace(m).real
        if not trace > 0.0:
            raise InvalidArgument('density matrix must have positive trace')
        m = m / trace
        m.setflags(write=False)
        self.matrix = m

    def get_cutoff(self) -> int:
        return self.matrix.shape[0] - 1

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def to_dict(self) -> dict:
        return {
            'cutoff': self.get_cutoff(),
            'matrix': [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_json(text: str):
        data = json.loads(text)
        m = np.array([[complex(re, im) for (re, im) in row] for row in data['matrix']])
        return FockDensity(m)


def as_density(state) -> np.ndarray:
    """
    Returns the density matrix of a Fock vector or density.
    """
    if isinstance(state, FockVector):
        return np.outer(state.amplitudes, state.amplitudes.conj())
    if isinstance(state, FockDensity):
        return state.matrix
    raise InvalidArgument('expected a FockVector or FockDensity, got '+type(state).__name__)


def ladder_operators(cutoff: int):
    """
    Returns the annihilation and creation operators truncated at `cutoff`.
    """
    if cutoff < 1:
        raise InvalidArgument('cutoff must be at least 1, got '+str(cutoff))
    a = np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1)
    return (FockOperator(a), FockOperator(a.T))


def number_operator(cutoff: int) -> FockOperator:
    return FockOperator(np.diag(np.arange(cutoff + 1, dtype=float)))


def quadrature_operators(cutoff: int):
    """
    Returns (q, p) with q = (a + a†)/2 and p = (a - a†)/(2i).
    """
    a, ad = ladder_operators(cutoff)
    q = 0.5 * (a + ad)
    p = (a - ad) * (-0.5j)
    return (q, p)


def matrix_exponential(generator: FockOperator) -> FockOperator:
    """
    Returns exp(M) for the generator M.

    Generators of the form iH with H Hermitian go through an eigendecomposition
    of H, which keeps the result unitary; anything else is handed to scipy's
    scaling-and-squaring `expm`.
    """
    m = generator.matrix
    if not np.all(np.isfinite(m)):
        raise InvalidArgument('generator has non-finite entries')
    h = -1j * m
    if np.allclose(h, h.conj().T, rtol=0.0, atol=HERMITIAN_TOL):
        h = 0.5 * (h + h.conj().T)
        vals, vecs = linalg.eigh(h)
        return FockOperator((vecs * np.exp(1j * vals)) @ vecs.conj().T)
    return FockOperator(linalg.expm(m))


def displacement_operator(alpha: complex, cutoff: int) -> FockOperator:
    a, ad = ladder_operators(cutoff)
    return matrix_exponential(alpha * ad - np.conj(alpha) * a)


def squeeze_operator(xi: complex, cutoff: int) -> FockOperator:
    """
    Returns S(xi) = exp(xi*/2 a² - xi/2 a†²).
    """
    a, ad = ladder_operators(cutoff)
    return matrix_exponential(0.5 * np.conj(xi) * (a @ a) - 0.5 * xi * (ad @ ad))


def rotation_operator(gamma: float, cutoff: int) -> FockOperator:
    """
    Returns exp(-i gamma n).
    """
    return FockOperator(np.diag(np.exp(-1j * gamma * np.arange(cutoff + 1))))


def _resolve_cutoff(cutoff: int) -> int:
    if cutoff is None:
        cutoff = defaults().get_int('fock.cutoff')
    if cutoff < 1:
        raise InvalidArgument('cutoff must be at least 1, got '+str(cutoff))
    return int(cutoff)


def _evolve_vacuum(hamiltonian: np.ndarray, cutoff: int, tolerance: float) -> FockVector:
    # three-photon terms and diagonal terms preserve n mod 3
    idx = np.arange(0, cutoff + 1, 3)
    block = hamiltonian[np.ix_(idx, idx)]
    u = matrix_exponential(FockOperator(1j * block))
    c = np.zeros(cutoff + 1, dtype=complex)
    c[idx] = u.matrix[:, 0]
    return FockVector(c).check_tail(tolerance)


def build_trisqueezed(t: complex, cutoff: int=None, tolerance: float=None) -> FockVector:
    """
    Returns exp(i(t* a³ + t a†³))|0>.
    """
    t = complex(t)
    if abs(t) > MAX_TRIPLICITY:
        raise InvalidArgument('triplicity |t| = '+str(abs(t))+' exceeds '+str(MAX_TRIPLICITY))
    cutoff = _resolve_cutoff(cutoff)
    a, _ = ladder_operators(cutoff)
    a3 = a.matrix @ a.matrix @ a.matrix
    h = np.conj(t) * a3 + t * a3.conj().T
    return _evolve_vacuum(h, cutoff, tolerance)


def build_kerr_trisqueezed(g3: float, kerr: float, tau: float, cutoff: int=None, tolerance: float=None) -> FockVector:
    """
    Returns exp(i tau (g3(a³ + a†³) + K a†² a²))|0>, whose triplicity is g3·tau.
    """
    if abs(g3 * tau) > MAX_TRIPLICITY:
        raise InvalidArgument('triplicity g3*tau = '+str(g3 * tau)+' exceeds '+str(MAX_TRIPLICITY))
    cutoff = _resolve_cutoff(cutoff)
    a, _ = ladder_operators(cutoff)
    a3 = a.matrix @ a.matrix @ a.matrix
    n = np.arange(cutoff + 1, dtype=float)
    h = g3 * (a3 + a3.conj().T) + kerr * np.diag(n * (n - 1.0))
    return _evolve_vacuum(tau * h, cutoff, tolerance)


def build_displaced_squeezed(xi: complex, beta: complex, cutoff: int=None) -> FockVector:
    """
    Returns D(beta) S(xi)|0>.
    """
    cutoff = _resolve_cutoff(cutoff)
    vac = FockVector.basis(0, cutoff)
    return displacement_operator(beta, cutoff).apply(squeeze_operator(xi, cutoff).apply(vac))


def fock_overlap(a: FockVector, b: FockVector) -> complex:
    """
    Returns <a|b>.
    """
    if a.get_cutoff() != b.get_cutoff():
        raise InvalidArgument('cutoff mismatch: '+str(a.get_cutoff())+' vs '+str(b.get_cutoff()))
    return complex(np.vdot(a.amplitudes, b.amplitudes))
