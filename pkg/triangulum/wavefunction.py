"""
Quadrature-representation wavefunctions of the states used by both protocols.
"""

import math

import numpy as np

from triangulum.config import defaults
from triangulum.error import InvalidArgument
from triangulum.fock import FockVector
from triangulum.quadrature import gauss_legendre

# (2/pi)^(1/4), the vacuum amplitude at the origin for hbar = 1/2
VACUUM_PEAK = (2.0 / math.pi) ** 0.25


class QuadWavefunction:
    """
    A complex amplitude as a function of one quadrature.

    `domain_halfwidth` is the recommended integration bound: the amplitude is
    negligible outside of [-domain_halfwidth, domain_halfwidth].
    """

    def __init__(self, evaluator, domain_halfwidth: float, representation: str='position'):
        if not domain_halfwidth > 0.0:
            raise InvalidArgument('domain half-width must be positive')
        self._evaluator = evaluator
        self.domain_halfwidth = float(domain_halfwidth)
        self.representation = representation

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self._evaluator(np.asarray(x, dtype=float)), dtype=complex)

    def get_domain(self) -> tuple:
        return (-self.domain_halfwidth, self.domain_halfwidth)

    def norm(self, nodes: int=800) -> float:
        """
        Returns the integral of |psi|² over the recommended domain.
        """
        x, w = gauss_legendre(-self.domain_halfwidth, self.domain_halfwidth, nodes)
        return float(np.sum(w * np.abs(self(x)) ** 2))

    def normalized(self, nodes: int=800):
        scale = 1.0 / math.sqrt(self.norm(nodes))
        inner = self._evaluator
        return QuadWavefunction(lambda x: scale * inner(x), self.domain_halfwidth, self.representation)

    def inner(self, other, nodes: int=800) -> complex:
        """
        Returns <self|other> by quadrature over the wider of the two domains.
        """
        hw = max(self.domain_halfwidth, other.domain_halfwidth)
        x, w = gauss_legendre(-hw, hw, nodes)
        return complex(np.sum(w * np.conj(self(x)) * other(x)))

    def with_phase(self, phase_fn):
        """
        Returns x -> exp(i phase_fn(x)) psi(x).
        """
        inner = self._evaluator
        return QuadWavefunction(lambda x: np.exp(1j * phase_fn(x)) * inner(x), self.domain_halfwidth, self.representation)


def hermite_functions(n_max: int, q) -> np.ndarray:
    """
    Returns the oscillator eigenfunctions phi_0 .. phi_{n_max} at `q` as rows.

    Uses the normalized three-term recurrence
    phi_{n+1} = (2q/sqrt(n+1)) phi_n - sqrt(n/(n+1)) phi_{n-1}.
    """
    q = np.asarray(q, dtype=float)
    out = np.empty((n_max + 1,) + q.shape)
    out[0] = VACUUM_PEAK * np.exp(-q * q)
    if n_max >= 1:
        out[1] = 2.0 * q * out[0]
    for n in range(1, n_max):
        out[n + 1] = (2.0 * q / math.sqrt(n + 1)) * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def position_wavefunction(state: FockVector) -> QuadWavefunction:
    """
    Expands a Fock vector in the position basis.
    """
    c = state.get_amplitudes()
    n_max = state.get_cutoff()
    significant = np.flatnonzero(np.abs(c) ** 2 > 1e-14)
    n_eff = int(significant[-1]) if significant.size > 0 else 0

    def evaluate(q):
        phi = hermite_functions(n_max, q.ravel())
        return (c @ phi).reshape(q.shape)

    return QuadWavefunction(evaluate, math.sqrt(n_eff + 0.5) + 3.0)


def _gaussian_halfwidth(width: float, center: float=0.0) -> float:
    # |psi|² ~ exp(-2 (q - center)² / width²) drops below 1e-16 here
    return abs(center) + width * math.sqrt(0.5 * 37.0) + 1.0


def cubic_phase_wavefunction(r: float, xi_target: float, d: float=0.0) -> QuadWavefunction:
    """
    Returns the squeezed cubic phase state
    (2/pi)^(1/4) e^(xi/2) exp(-e^(2xi) q²) exp(i r q³) exp(-i q d).
    """
    for (name, value) in (('r', r), ('xi_target', xi_target), ('d', d)):
        if not math.isfinite(value):
            raise InvalidArgument(name+' must be finite')
    if r < 0.0:
        raise InvalidArgument('cubicity must be non-negative, got '+str(r))
    c = math.exp(2.0 * xi_target)
    peak = VACUUM_PEAK * math.exp(0.5 * xi_target)

    def evaluate(q):
        return peak * np.exp(-c * q * q + 1j * (r * q ** 3 - q * d))

    return QuadWavefunction(evaluate, _gaussian_halfwidth(1.0 / math.sqrt(c)))


def displaced_squeezed_wavefunction(xi: complex, beta: complex) -> QuadWavefunction:
    """
    Returns the position wavefunction of D(beta) S(xi)|0>.
    """
    xi = complex(xi)
    beta = complex(beta)
    qb, pb = beta.real, beta.imag
    if xi.imag == 0.0:
        c = math.exp(2.0 * xi.real)
        peak = VACUUM_PEAK * math.exp(0.5 * xi.real)

        def evaluate(q):
            return peak * np.exp(-c * (q - qb) ** 2 + 1j * pb * (2.0 * q - qb))

        return QuadWavefunction(evaluate, _gaussian_halfwidth(1.0 / math.sqrt(c), qb))

    r = abs(xi)
    zeta = xi * math.tanh(r) / r
    k = (1.0 + zeta) / (1.0 - zeta)
    peak = VACUUM_PEAK * (1.0 - abs(zeta) ** 2) ** 0.25 / np.sqrt(1.0 - zeta)

    def evaluate(q):
        return peak * np.exp(-k * (q - qb) ** 2 + 1j * pb * (2.0 * q - qb))

    return QuadWavefunction(evaluate, _gaussian_halfwidth(1.0 / math.sqrt(k.real), qb))


def _comb_orders(delta: float, floor: float) -> np.ndarray:
    s_max = int(math.ceil(math.sqrt(-math.log(floor) / (2.0 * math.pi * delta * delta))))
    return np.arange(-s_max, s_max + 1)


def gkp_comb(x, delta: float, floor: float=None) -> np.ndarray:
    """
    Returns sum_s exp(-2 pi delta² s²) exp(-(x - 2 s sqrt(pi))² / (2 delta²)).

    Orders whose envelope weight falls below `floor` are dropped.
    """
    if not 0.0 < delta < 1.0:
        raise InvalidArgument('GKP peak width must lie in (0, 1), got '+str(delta))
    if floor is None:
        floor = defaults().get_float('gkp.weight_floor')
    x = np.asarray(x, dtype=float)
    s = _comb_orders(delta, floor)
    weights = np.exp(-2.0 * math.pi * delta * delta * s * s)
    centers = 2.0 * s * math.sqrt(math.pi)
    diff = x[..., np.newaxis] - centers
    return np.sum(weights * np.exp(-diff * diff / (2.0 * delta * delta)), axis=-1)


def gkp_plus_momentum(delta: float, floor: float=None) -> QuadWavefunction:
    """
    Returns the finite-energy GKP |+> state in the momentum representation.
    """
    if floor is None:
        floor = defaults().get_float('gkp.weight_floor')
    if not 0.0 < delta < 1.0:
        raise InvalidArgument('GKP peak width must lie in (0, 1), got '+str(delta))
    s = _comb_orders(delta, floor)
    weights = np.exp(-2.0 * math.pi * delta * delta * s * s)
    centers = 2.0 * s * math.sqrt(math.pi)
    gap = centers[:, np.newaxis] - centers[np.newaxis, :]
    norm2 = math.sqrt(math.pi) * delta * np.sum(np.outer(weights, weights) * np.exp(-gap * gap / (4.0 * delta * delta)))
    scale = 1.0 / math.sqrt(norm2)

    def evaluate(p):
        return scale * gkp_comb(p, delta, floor)

    return QuadWavefunction(evaluate, float(centers[-1]) + 8.0 * delta, representation='momentum')
