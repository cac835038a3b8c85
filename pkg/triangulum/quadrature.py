"""
Gauss-Legendre rules on intervals and on square patches of phase space.
"""

from dataclasses import dataclass, asdict, replace

import numpy as np

from triangulum.config import defaults
from triangulum.error import InvalidArgument


def gauss_legendre(lo: float, hi: float, n: int):
    """
    Returns the `n` Gauss-Legendre nodes and weights mapped onto [lo, hi].
    """
    if n < 1:
        raise InvalidArgument('a quadrature rule needs at least one node')
    if not hi > lo:
        raise InvalidArgument('empty integration interval ['+str(lo)+', '+str(hi)+']')
    x, w = np.polynomial.legendre.leggauss(int(n))
    half = 0.5 * (hi - lo)
    return half * x + 0.5 * (hi + lo), half * w


class PlaneRule:
    """
    Tensor Gauss-Legendre rule on the square [-halfwidth, halfwidth]².
    """

    def __init__(self, halfwidth: float, nodes: int):
        self.halfwidth = float(halfwidth)
        self.nodes = int(nodes)
        x, w = gauss_legendre(-self.halfwidth, self.halfwidth, self.nodes)
        self.axis = x
        self.axis_weights = w
        gx, gy = np.meshgrid(x, x, indexing='ij')
        self.x = gx.ravel()
        self.y = gy.ravel()
        self.weights = np.outer(w, w).ravel()

    @staticmethod
    def from_defaults(table: str='characteristic'):
        cfg = defaults()
        return PlaneRule(cfg.get_float(table+'.halfwidth'), cfg.get_int(table+'.nodes'))

    def doubled(self):
        return PlaneRule(self.halfwidth, 2 * self.nodes)

    def integrate(self, values: np.ndarray):
        return np.sum(self.weights * values)

    def __repr__(self):
        return 'PlaneRule(halfwidth='+str(self.halfwidth)+', nodes='+str(self.nodes)+')'


@dataclass(frozen=True)
class QuadratureScheme:
    """
    Node counts and half-widths for the integration axes of the conversion circuit.

    `q0` runs over the target wavefunction, `q2` over the second output mode,
    the bin axis over the accepted homodyne window, and the smear axis over
    the window widened by `smear_width` standard deviations of detector noise.
    """
    q0_halfwidth: float = 8.0
    q0_nodes: int = 240
    q2_halfwidth: float = 8.0
    q2_nodes: int = 240
    bin_nodes: int = 32
    smear_nodes: int = 64
    smear_width: float = 5.0

    def __post_init__(self):
        for name in ('q0_nodes', 'q2_nodes', 'bin_nodes', 'smear_nodes'):
            if getattr(self, name) < 1:
                raise InvalidArgument(name+' must be positive')
        for name in ('q0_halfwidth', 'q2_halfwidth', 'smear_width'):
            if not getattr(self, name) > 0.0:
                raise InvalidArgument(name+' must be positive')

    @staticmethod
    def from_defaults():
        cfg = defaults()
        return QuadratureScheme(
            q0_halfwidth=cfg.get_float('circuit.q0_halfwidth'),
            q0_nodes=cfg.get_int('circuit.q0_nodes'),
            q2_halfwidth=cfg.get_float('circuit.q2_halfwidth'),
            q2_nodes=cfg.get_int('circuit.q2_nodes'),
            bin_nodes=cfg.get_int('circuit.bin_nodes'),
            smear_nodes=cfg.get_int('circuit.smear_nodes'),
            smear_width=cfg.get_float('circuit.smear_width'),
        )

    def doubled(self, axis: str=None):
        """
        Returns a scheme with twice the nodes on `axis` (or on every axis).
        """
        axes = ('q0', 'q2', 'bin', 'smear') if axis is None else (axis,)
        changes = {}
        for a in axes:
            key = a+'_nodes'
            if not hasattr(self, key):
                raise InvalidArgument('unknown quadrature axis "'+a+'"')
            changes[key] = 2 * getattr(self, key)
        return replace(self, **changes)

    def q0_rule(self):
        return gauss_legendre(-self.q0_halfwidth, self.q0_halfwidth, self.q0_nodes)

    def q2_rule(self):
        return gauss_legendre(-self.q2_halfwidth, self.q2_halfwidth, self.q2_nodes)

    def bin_rule(self, center: float, halfwidth: float):
        return gauss_legendre(center - halfwidth, center + halfwidth, self.bin_nodes)

    def smear_rule(self, center: float, halfwidth: float, sigma: float):
        """
        Composite rule over the bin widened by `smear_width` standard deviations,
        split at the bin edges where the smeared acceptance changes fastest.
        """
        reach = self.smear_width * sigma
        edge = max(1, self.smear_nodes // 4)
        inner = max(1, self.smear_nodes - 2 * edge)
        parts = [
            gauss_legendre(center - halfwidth - reach, center - halfwidth, edge),
            gauss_legendre(center - halfwidth, center + halfwidth, inner),
            gauss_legendre(center + halfwidth, center + halfwidth + reach, edge),
        ]
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])

    def to_dict(self) -> dict:
        return asdict(self)
