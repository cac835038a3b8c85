"""
Characteristic functions, Wigner functions, mana and fidelity.

The characteristic function of a state is chi(x, y) = Tr[D(alpha) rho] with
alpha = (x + iy)/2, and its Wigner function is recovered by
W(q, p) = (1/4pi²) int chi(x, y) exp(i(xp - yq)) dx dy.
"""

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from triangulum import log
from triangulum.config import defaults
from triangulum.error import DomainTooSmall, IntegrationError, InvalidArgument, NoRoot
from triangulum.fock import as_density, build_trisqueezed
from triangulum.quadrature import PlaneRule, gauss_legendre
from triangulum.wavefunction import VACUUM_PEAK

FIDELITY_CEILING = 1.0 + 1e-6


@dataclass(frozen=True)
class PhasePoint:
    q: float
    p: float

    def __post_init__(self):
        if not (math.isfinite(self.q) and math.isfinite(self.p)):
            raise InvalidArgument('phase-space point must be finite')

    def to_alpha(self) -> complex:
        return complex(self.q, self.p) / 2.0

    def __neg__(self):
        return PhasePoint(-self.q, -self.p)


def _laguerre_prefactor(hi: int, lo: int, mag2):
    return np.exp(0.5 * (special.gammaln(lo + 1) - special.gammaln(hi + 1)) - 0.5 * mag2)


def displacement_element(m: int, n: int, alpha):
    """
    Returns <m|D(alpha)|n> through the associated Laguerre polynomials.

    `alpha` may be an array, in which case the result has its shape.
    """
    if m < 0 or n < 0:
        raise InvalidArgument('Fock indices must be non-negative')
    alpha = np.asarray(alpha, dtype=complex)
    mag2 = np.abs(alpha) ** 2
    if m >= n:
        k = m - n
        return _laguerre_prefactor(m, n, mag2) * alpha ** k * special.eval_genlaguerre(n, k, mag2)
    k = n - m
    return _laguerre_prefactor(n, m, mag2) * (-np.conj(alpha)) ** k * special.eval_genlaguerre(m, k, mag2)


def displacement_matrix(alpha: complex, cutoff: int) -> np.ndarray:
    """
    Returns the (cutoff+1)² matrix of displacement elements at a single alpha.
    """
    out = np.empty((cutoff + 1, cutoff + 1), dtype=complex)
    for m in range(cutoff + 1):
        for n in range(cutoff + 1):
            out[m, n] = displacement_element(m, n, alpha)
    return out


class FockCharacteristic:
    """
    Characteristic function of a Fock-basis state by the sum over its support.
    """

    def __init__(self, state):
        rho = as_density(state)
        occupied = np.flatnonzero(np.any(rho != 0.0, axis=0) | np.any(rho != 0.0, axis=1))
        self.indices = occupied
        self.rho = rho[np.ix_(occupied, occupied)]

    def __call__(self, x, y) -> np.ndarray:
        alpha = 0.5 * (np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float))
        mag2 = np.abs(alpha) ** 2
        out = np.zeros(alpha.shape, dtype=complex)
        idx = self.indices
        for i in range(idx.size):
            for j in range(i + 1):
                hi, lo = int(idx[i]), int(idx[j])
                k = hi - lo
                base = _laguerre_prefactor(hi, lo, mag2) * special.eval_genlaguerre(lo, k, mag2)
                # chi = sum_{n n'} rho[n, n'] <n'|D|n>
                out += self.rho[j, i] * base * alpha ** k
                if i != j:
                    out += self.rho[i, j] * base * (-np.conj(alpha)) ** k
        return out


class CubicPhaseCharacteristic:
    """
    Closed-form characteristic function of the squeezed cubic phase state.
    """

    def __init__(self, r: float, xi_target: float, d: float=0.0):
        self.r = float(r)
        self.xi_target = float(xi_target)
        self.d = float(d)
        self.c = math.exp(2.0 * xi_target)
        self.norm2 = math.sqrt(2.0 / math.pi) * math.exp(xi_target)

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        a = 2.0 * self.c + 1.5j * self.r * x
        return (
            self.norm2
            * np.exp(-self.c * x * x / 8.0 - 1j * self.r * x ** 3 / 32.0 + 0.5j * self.d * x)
            * np.sqrt(math.pi / a)
            * np.exp(-y * y / (4.0 * a))
        )


class WavefunctionCharacteristic:
    """
    Characteristic function of a pure state given by its position wavefunction,
    chi(x, y) = int psi*(s + x/4) psi(s - x/4) exp(iys) ds.
    """

    CHUNK = 2048

    def __init__(self, psi, nodes: int=400):
        self.psi = psi
        self.s, self.w = gauss_legendre(-psi.domain_halfwidth, psi.domain_halfwidth, nodes)

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        flat_x = x.ravel()
        flat_y = y.ravel()
        out = np.empty(flat_x.size, dtype=complex)
        for start in range(0, flat_x.size, self.CHUNK):
            xs = flat_x[start:start+self.CHUNK, np.newaxis]
            ys = flat_y[start:start+self.CHUNK, np.newaxis]
            f = np.conj(self.psi(self.s + 0.25 * xs)) * self.psi(self.s - 0.25 * xs)
            out[start:start+self.CHUNK] = np.sum(self.w * f * np.exp(1j * ys * self.s), axis=1)
        return out.reshape(x.shape)


def characteristic_fn(rho, r: PhasePoint) -> complex:
    """
    Evaluates the characteristic function of a Fock state at one point.
    """
    return complex(FockCharacteristic(rho)(r.q, r.p))


def fidelity_char(chi_a, chi_b, rule: PlaneRule=None, tail_tolerance: float=1e-3) -> float:
    """
    Returns (1/4pi) int chi_a(r) chi_b(-r) dr, clamped to [0, 1 + 1e-6].

    Raises an integration error when the integrand has not decayed at the
    edge of the integration square.
    """
    if rule is None:
        rule = PlaneRule.from_defaults()
    values = chi_a(rule.x, rule.y) * chi_b(-rule.x, -rule.y)
    if tail_tolerance is not None:
        edge = rule.axis[-1]
        ring = (np.abs(rule.x) >= edge) | (np.abs(rule.y) >= edge)
        tail = float(np.max(np.abs(values[ring])))
        if tail > tail_tolerance:
            raise IntegrationError('characteristic integrand is '+format(tail, '.2e')+' at the edge of ['+str(-rule.halfwidth)+', '+str(rule.halfwidth)+']²')
    f = float(np.real(rule.integrate(values))) / (4.0 * math.pi)
    return min(max(f, 0.0), FIDELITY_CEILING)


class WignerGrid:
    """
    Wigner function sampled on a rectangular grid, `values[i, j] = W(q_i, p_j)`.
    """

    def __init__(self, q_axis, p_axis, values):
        self.q_axis = np.asarray(q_axis, dtype=float)
        self.p_axis = np.asarray(p_axis, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (self.q_axis.size, self.p_axis.size):
            raise InvalidArgument('Wigner values do not match the grid axes')

    def integral(self) -> float:
        return float(integrate.trapezoid(integrate.trapezoid(self.values, self.p_axis, axis=1), self.q_axis))

    def abs_integral(self) -> float:
        return float(integrate.trapezoid(integrate.trapezoid(np.abs(self.values), self.p_axis, axis=1), self.q_axis))

    def mana(self, clamp: bool=False) -> float:
        m = math.log2(self.abs_integral())
        return max(m, 0.0) if clamp else m

    def boundary_max(self) -> float:
        v = np.abs(self.values)
        return float(max(v[0, :].max(), v[-1, :].max(), v[:, 0].max(), v[:, -1].max()))

    def min(self) -> float:
        return float(self.values.min())

    def slice_q(self, q: float):
        """
        Returns the cross-section W(q, .) at the grid row nearest to `q`.
        """
        i = int(np.argmin(np.abs(self.q_axis - q)))
        return (self.p_axis, self.values[i, :])

    def slice_p(self, p: float):
        j = int(np.argmin(np.abs(self.p_axis - p)))
        return (self.q_axis, self.values[:, j])

    def to_csv(self, stream):
        writer = csv.writer(stream)
        writer.writerow(['q', 'p', 'W'])
        for (i, q) in enumerate(self.q_axis):
            for (j, p) in enumerate(self.p_axis):
                writer.writerow([repr(float(q)), repr(float(p)), repr(float(self.values[i, j]))])

    def to_dict(self) -> dict:
        return {
            'q_axis': self.q_axis.tolist(),
            'p_axis': self.p_axis.tolist(),
            'values': self.values.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def default_axis(halfwidth: float=None, spacing: float=None) -> np.ndarray:
    """
    Returns a uniform axis over [-halfwidth, halfwidth] including both ends.
    """
    cfg = defaults()
    if halfwidth is None:
        halfwidth = cfg.get_float('wigner.halfwidth')
    if spacing is None:
        spacing = cfg.get_float('wigner.spacing')
    count = int(round(2.0 * halfwidth / spacing)) + 1
    return np.linspace(-halfwidth, halfwidth, count)


def _wig_laguerre_val(L: int, x, c):
    # Clenshaw evaluation of sum_k c_k L_k^L(x) with normalized Laguerre terms
    if len(c) == 1:
        y0 = c[0]
        y1 = 0
    elif len(c) == 2:
        y0 = c[0]
        y1 = c[1]
    else:
        k = len(c)
        y0 = c[-2]
        y1 = c[-1]
        for i in range(3, len(c) + 1):
            k -= 1
            y0, y1 = c[-i] - y1 * (float((k - 1) * (L + k - 1)) / ((L + k) * k)) ** 0.5, \
                y0 - y1 * ((L + 2 * k - 1) - x) * ((L + k) * k) ** -0.5
    return y0 - y1 * ((L + 1) - x) * (L + 1) ** -0.5


def wigner_points(rho, q, p) -> np.ndarray:
    """
    Evaluates the Wigner function of a Fock state at arbitrary points.
    """
    matrix = as_density(rho)
    size = matrix.shape[0]
    a2 = 2.0 * (np.asarray(q, dtype=float) + 1j * np.asarray(p, dtype=float))
    b = np.abs(a2) ** 2
    w0 = (2.0 * matrix[0, -1]) * np.ones_like(a2)
    matrix = matrix * (2.0 * np.ones((size, size)) - np.eye(size))
    L = size - 1
    while L > 0:
        L -= 1
        diag = np.diag(matrix, L)
        if np.any(diag != 0.0):
            w0 = _wig_laguerre_val(L, b, diag) + w0 * a2 * (L + 1) ** -0.5
        else:
            w0 = w0 * a2 * (L + 1) ** -0.5
    return np.real(w0 * np.exp(-0.5 * b)) * (2.0 / math.pi)


def wigner_from_characteristic(chi, q_axis, p_axis, halfwidth: float=None, nodes: int=None) -> np.ndarray:
    """
    Fourier-transforms a characteristic function onto the (q, p) grid.
    """
    cfg = defaults()
    if halfwidth is None:
        halfwidth = cfg.get_float('wigner.chi_halfwidth')
    if nodes is None:
        nodes = cfg.get_int('wigner.chi_nodes')
    x, w = gauss_legendre(-halfwidth, halfwidth, nodes)
    gx, gy = np.meshgrid(x, x, indexing='ij')
    a = np.outer(w, w) * chi(gx, gy)
    eq = np.exp(-1j * np.outer(np.asarray(q_axis, dtype=float), x))
    ep = np.exp(1j * np.outer(x, np.asarray(p_axis, dtype=float)))
    return np.real(eq @ a.T @ ep) / (4.0 * math.pi ** 2)


def _check_boundary(grid: WignerGrid, tolerance: float):
    edge = grid.boundary_max()
    if edge > tolerance:
        raise DomainTooSmall('Wigner function reaches '+format(edge, '.2e')+' on the grid boundary at half-width '+str(grid.q_axis[-1]), grid=grid)


def wigner_grid(rho, q_axis=None, p_axis=None, method: str='laguerre', check: bool=True) -> WignerGrid:
    """
    Samples the Wigner function of a Fock state on a grid.

    `method` selects the Laguerre kernel ('laguerre') or the Fourier transform
    of the characteristic function ('fourier').
    """
    if q_axis is None:
        q_axis = default_axis()
    if p_axis is None:
        p_axis = q_axis
    q_axis = np.asarray(q_axis, dtype=float)
    p_axis = np.asarray(p_axis, dtype=float)
    if method == 'laguerre':
        gq, gp = np.meshgrid(q_axis, p_axis, indexing='ij')
        values = wigner_points(rho, gq, gp)
    elif method == 'fourier':
        values = wigner_from_characteristic(FockCharacteristic(rho), q_axis, p_axis)
    else:
        raise InvalidArgument('unknown Wigner method "'+method+'"')
    grid = WignerGrid(q_axis, p_axis, values)
    if check:
        _check_boundary(grid, defaults().get_float('wigner.boundary_tolerance'))
    return grid


def wigner_wavefunctions(states, weights, q_axis, p_axis, check: bool=True) -> WignerGrid:
    """
    Wigner function of the mixture sum_k weights[k] |psi_k><psi_k| of position
    wavefunctions, by W(q, p) = (2/pi) int psi*(q+y) psi(q-y) exp(4ipy) dy.

    The y integral runs on the lattice of `q_axis`, which must be uniform, so
    every wavefunction is sampled once on a single line of points.
    """
    q_axis = np.asarray(q_axis, dtype=float)
    p_axis = np.asarray(p_axis, dtype=float)
    if q_axis.size < 2:
        raise InvalidArgument('the position axis needs at least two points')
    h = float(q_axis[1] - q_axis[0])
    if not np.allclose(np.diff(q_axis), h, rtol=1e-9, atol=1e-12):
        raise InvalidArgument('the position axis must be uniformly spaced')
    reach = max(psi.domain_halfwidth for psi in states)
    J = int(math.ceil(reach / h))
    lattice = q_axis[0] + h * np.arange(-J, q_axis.size + J)
    offsets = np.arange(-J, J + 1)
    rows = np.arange(q_axis.size)[:, np.newaxis]
    plus = rows + offsets + J
    minus = rows - offsets + J
    f = np.zeros(plus.shape, dtype=complex)
    for (psi, weight) in zip(states, weights):
        line = psi(lattice)
        f += weight * np.conj(line[plus]) * line[minus]
    kernel = h * np.exp(4j * np.outer(h * offsets, p_axis))
    values = np.real(f @ kernel) * (2.0 / math.pi)
    grid = WignerGrid(q_axis, p_axis, values)
    if check:
        _check_boundary(grid, defaults().get_float('wigner.boundary_tolerance'))
    return grid


def widening(compute, fallback: bool=False) -> WignerGrid:
    """
    Calls `compute(axis)` on the default axis and then on each configured wider
    axis until the Wigner function fits inside the window.

    With `fallback` the widest grid is returned, with a warning, when nothing
    fits; its mana is then a lower bound.
    """
    cfg = defaults()
    widths = [cfg.get_float('wigner.halfwidth')] + [float(h) for h in cfg.require('wigner.widen')]
    last = None
    for hw in widths:
        try:
            return compute(default_axis(hw))
        except DomainTooSmall as e:
            log.info('widening Wigner window beyond half-width', hw)
            last = e
    if fallback and last.grid is not None:
        log.warn(str(last)+'; the mana is a lower bound')
        return last.grid
    raise last


def mana(rho, method: str='laguerre') -> float:
    """
    Returns the Wigner logarithmic negativity log2 int |W| of a Fock state.

    Trisqueezed states keep faint fringes far from the origin, so the widest
    window is accepted even when it cuts them off.
    """
    return widening(lambda axis: wigner_grid(rho, axis, axis, method=method), fallback=True).mana()


def cubic_phase_mana(r: float, xi_target: float, dy: float=0.005, size: int=2**16) -> float:
    """
    Mana of the squeezed cubic phase state.

    Its Wigner function factors as exp(-2cq²) G(4p - 6rq²), so the phase-space
    integral of |W| reduces to a one-dimensional integral of |G|.
    """
    if r < 0.0:
        raise InvalidArgument('cubicity must be non-negative, got '+str(r))
    c = math.exp(2.0 * xi_target)
    y = dy * (np.arange(size) - size // 2)
    h = np.exp(-2.0 * c * y * y - 2j * r * y ** 3)
    peak2 = VACUUM_PEAK ** 2 * math.exp(xi_target)
    g = (2.0 / math.pi) * peak2 * dy * size * np.abs(np.fft.ifft(h))
    du = 2.0 * math.pi / (size * dy)
    total = math.sqrt(math.pi / (2.0 * c)) * 0.25 * du * float(np.sum(g))
    return math.log2(total)


def find_matching_cubicity(t: complex, xi_target: float, cutoff: int=None, upper: float=2.0) -> float:
    """
    Returns the cubicity whose cubic phase state carries the same mana as the
    trisqueezed state of triplicity `t`.
    """
    target = mana(build_trisqueezed(t, cutoff))

    def gap(r):
        return cubic_phase_mana(r, xi_target) - target

    lo, hi = gap(0.0), gap(upper)
    if lo * hi > 0.0:
        raise NoRoot('no cubicity in [0, '+str(upper)+'] matches mana '+format(target, '.4f'))
    return float(optimize.brentq(gap, 0.0, upper, xtol=1e-7))
