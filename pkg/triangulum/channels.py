"""
Single-mode Gaussian channels acting on characteristic functions, and the
deterministic squeeze-and-displace conversion protocol.

A channel (X, Y, l) maps chi(r) to
exp(-r^T Omega^T Y Omega r / 4 + i l^T Omega r) chi(Omega^T X^T Omega r).
"""

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import linalg

from triangulum import log
from triangulum.error import ConstraintViolation, InvalidArgument
from triangulum.fock import build_trisqueezed, db_to_xi
from triangulum.optim import Bounds, maximize
from triangulum.phase import (
    FIDELITY_CEILING,
    CubicPhaseCharacteristic,
    FockCharacteristic,
    WignerGrid,
    default_axis,
    find_matching_cubicity,
    fidelity_char,
    wigner_from_characteristic,
    wigner_points,
)
from triangulum.quadrature import PlaneRule

OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])

PHYSICAL_TOL = -1e-9

# below this |det X| the change of variables is ill-conditioned
SINGULAR_DET = 1e-9


@dataclass(frozen=True)
class GaussianChannel:
    X: np.ndarray
    Y: np.ndarray
    l: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float).reshape(2, 2)
        Y = np.array(self.Y, dtype=float).reshape(2, 2)
        l = np.array(self.l, dtype=float).reshape(2)
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y)) and np.all(np.isfinite(l))):
            raise InvalidArgument('channel entries must be finite')
        if abs(Y[0, 1] - Y[1, 0]) > 1e-12:
            raise InvalidArgument('noise matrix Y must be symmetric')
        object.__setattr__(self, 'X', X)
        object.__setattr__(self, 'Y', Y)
        object.__setattr__(self, 'l', l)

    @staticmethod
    def identity():
        return GaussianChannel(np.eye(2), np.zeros((2, 2)), np.zeros(2))

    @staticmethod
    def squeeze_displace(a: float, l_p: float, l_q: float=0.0):
        """
        Pure squeezing X = diag(a, 1/a) followed by the displacement (l_q, l_p).
        """
        if a == 0.0:
            raise InvalidArgument('squeezing factor must be nonzero')
        return GaussianChannel(np.diag([a, 1.0 / a]), np.zeros((2, 2)), np.array([l_q, l_p]))

    def determinant(self) -> float:
        return float(np.linalg.det(self.X))

    def diagonal(self) -> tuple:
        return (float(self.X[0, 0]), float(self.X[1, 1]))

    def is_noiseless(self, tol: float=1e-14) -> bool:
        return bool(np.all(np.abs(self.Y) <= tol))

    def argument_map(self) -> np.ndarray:
        """
        Returns Omega^T X^T Omega, the linear map applied to the argument of chi.
        """
        return OMEGA.T @ self.X.T @ OMEGA

    def to_dict(self) -> dict:
        return {'X': self.X.tolist(), 'Y': self.Y.tolist(), 'l': self.l.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_json(text: str):
        data = json.loads(text)
        return GaussianChannel(data['X'], data['Y'], data['l'])


@dataclass(frozen=True)
class SymplecticParams:
    g: float
    e: float
    c: float


def symplectic_matrix(p: SymplecticParams) -> np.ndarray:
    """
    Returns [[g, g e], [c g, 1/g + c g e]], which has unit determinant.
    """
    if p.g == 0.0:
        raise InvalidArgument('symplectic parameter g must be nonzero')
    return np.array([[p.g, p.g * p.e], [p.c * p.g, 1.0 / p.g + p.c * p.g * p.e]])


def is_physical(ch: GaussianChannel, tol: float=PHYSICAL_TOL):
    """
    Checks Y ± i(Omega - X Omega X^T) ⪰ 0.

    Returns the verdict and the smallest eigenvalue over both signs.
    """
    gap = OMEGA - ch.X @ OMEGA @ ch.X.T
    lowest = math.inf
    for sign in (1.0, -1.0):
        h = ch.Y + sign * 1j * gap
        lowest = min(lowest, float(linalg.eigvalsh(h)[0]))
    return (lowest >= tol, lowest)


def _envelope(ch: GaussianChannel, x, y) -> np.ndarray:
    # Omega r = (y, -x)
    quad = ch.Y[0, 0] * y * y - 2.0 * ch.Y[0, 1] * x * y + ch.Y[1, 1] * x * x
    shift = ch.l[0] * y - ch.l[1] * x
    return np.exp(-0.25 * quad + 1j * shift)


def apply_channel(chi, ch: GaussianChannel, check: bool=True):
    """
    Returns the characteristic function of the channel output.
    """
    if check:
        ok, lowest = is_physical(ch)
        if not ok:
            raise ConstraintViolation('channel is unphysical: smallest eigenvalue '+format(lowest, '.3e'))
    m = ch.argument_map()

    def transformed(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return _envelope(ch, x, y) * chi(m[0, 0] * x + m[0, 1] * y, m[1, 0] * x + m[1, 1] * y)

    return transformed


def channel_output_wigner(state, ch: GaussianChannel, q_axis=None, p_axis=None) -> WignerGrid:
    """
    Wigner function of the state sent through `ch`.

    Noiseless symplectic channels pull the input Wigner function back along
    the affine map; anything else goes through the characteristic function.
    """
    if q_axis is None:
        q_axis = default_axis()
    if p_axis is None:
        p_axis = q_axis
    gq, gp = np.meshgrid(q_axis, p_axis, indexing='ij')
    if ch.is_noiseless() and abs(ch.determinant() - 1.0) < 1e-12:
        inv = np.linalg.inv(ch.X)
        dq = gq - ch.l[0]
        dp = gp - ch.l[1]
        values = wigner_points(state, inv[0, 0] * dq + inv[0, 1] * dp, inv[1, 0] * dq + inv[1, 1] * dp)
    else:
        values = wigner_from_characteristic(apply_channel(FockCharacteristic(state), ch), q_axis, p_axis)
    return WignerGrid(q_axis, p_axis, values)


class DetMode(Enum):
    FULL_CPTP = 0
    SYMPLECTIC = 1
    SQUEEZE_DISPLACE = 2

    @staticmethod
    def choices() -> list:
        return ['full-cptp', 'symplectic', 'squeeze-displace']

    @staticmethod
    def from_str(s: str):
        try:
            i = DetMode.choices().index(s.lower())
        except ValueError:
            raise InvalidArgument('invalid mode "'+s+'": can be one of '+str(DetMode.choices()))
        return DetMode(i)

    @staticmethod
    def from_arg(s):
        if isinstance(s, DetMode):
            return s
        elif isinstance(s, int):
            return DetMode(s)
        return DetMode.from_str(s)

    def __str__(self):
        return DetMode.choices()[self.value]

    def bounds(self) -> Bounds:
        if self == DetMode.FULL_CPTP:
            return Bounds.from_pairs([(-2.5, 2.5)] * 4 + [(-1.0, 1.0)] * 3 + [(-1.0, 1.0)] * 2)
        elif self == DetMode.SYMPLECTIC:
            return Bounds.from_pairs([(0.2, 3.0), (-1.0, 1.0), (-1.0, 1.0)])
        return Bounds.from_pairs([(0.2, 3.0), (-1.0, 1.0)])

    def identity_point(self) -> list:
        if self == DetMode.FULL_CPTP:
            return [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        elif self == DetMode.SYMPLECTIC:
            return [1.0, 0.0, 0.0]
        return [1.0, 0.0]

    def channel(self, x) -> GaussianChannel:
        """
        Builds the channel encoded by the parameter vector `x`.
        """
        x = [float(v) for v in x]
        if self == DetMode.FULL_CPTP:
            factor = np.array([[x[4], 0.0], [x[5], x[6]]])
            return GaussianChannel(np.array(x[0:4]).reshape(2, 2), factor @ factor.T, np.array(x[7:9]))
        elif self == DetMode.SYMPLECTIC:
            X = symplectic_matrix(SymplecticParams(x[0], x[1], x[2]))
            return GaussianChannel(X, np.zeros((2, 2)), np.zeros(2))
        return GaussianChannel.squeeze_displace(x[0], x[1])


class DeterministicProblem:
    """
    Fidelity between a channel-transformed trisqueezed state and a cubic phase
    target.

    The input characteristic function is tabulated once on the quadrature
    rule; each channel is handled by the substitution u = Omega^T X^T Omega r,
    so that only the closed-form target is evaluated per call.
    """

    def __init__(self, t: complex, r: float, xi_target: float, cutoff: int=None, rule: PlaneRule=None):
        self.t = complex(t)
        self.r = float(r)
        self.xi_target = float(xi_target)
        self.rule = rule if rule is not None else PlaneRule.from_defaults()
        self.state = build_trisqueezed(t, cutoff)
        self.chi_in = FockCharacteristic(self.state)
        self.target = CubicPhaseCharacteristic(r, xi_target)
        self._chi_values = self.chi_in(self.rule.x, self.rule.y)

    def fidelity(self, ch: GaussianChannel) -> float:
        det = ch.determinant()
        if abs(det) < SINGULAR_DET:
            return fidelity_char(apply_channel(self.chi_in, ch, check=False), self.target, self.rule, tail_tolerance=None)
        inv = np.linalg.inv(ch.argument_map())
        x = inv[0, 0] * self.rule.x + inv[0, 1] * self.rule.y
        y = inv[1, 0] * self.rule.x + inv[1, 1] * self.rule.y
        g = _envelope(ch, x, y) * self.target(-x, -y)
        f = float(np.real(self.rule.integrate(self._chi_values * g))) / (4.0 * math.pi * abs(det))
        return min(max(f, 0.0), FIDELITY_CEILING)

    def objective(self, mode: DetMode):
        """
        Returns x -> fidelity, with 0 for unphysical channels.
        """
        def evaluate(x):
            ch = mode.channel(x)
            if not is_physical(ch)[0]:
                return 0.0
            return self.fidelity(ch)
        return evaluate


def det_objective(t: complex, r: float, xi_target: float, ch: GaussianChannel, cutoff: int=None, rule: PlaneRule=None, check: bool=True) -> float:
    """
    Fidelity of the trisqueezed state sent through `ch` with the cubic phase target.

    With `check` unset, channels printed to a few digits that sit just outside
    the physical set are evaluated as given.
    """
    if check:
        ok, lowest = is_physical(ch)
        if not ok:
            raise ConstraintViolation('channel is unphysical: smallest eigenvalue '+format(lowest, '.3e'))
    chi_in = FockCharacteristic(build_trisqueezed(t, cutoff))
    return fidelity_char(apply_channel(chi_in, ch, check=False), CubicPhaseCharacteristic(r, xi_target), rule)


def optimize_deterministic(t: complex, r: float, xi_target: float, mode, config, progress=None, cutoff: int=None, rule: PlaneRule=None, seed_identity: bool=True, problem: DeterministicProblem=None):
    """
    Searches the channel family of `mode` for the highest conversion fidelity.
    """
    mode = DetMode.from_arg(mode)
    if problem is None:
        problem = DeterministicProblem(t, r, xi_target, cutoff, rule)
    log.info('optimizing', str(mode), 'channel for t =', t, 'and r =', r)
    x0 = mode.identity_point() if seed_identity else None
    result = maximize(problem.objective(mode), mode.bounds(), config, progress, x0)
    ch = mode.channel(result.best_x)
    result.extra = {
        'mode': str(mode),
        't': [problem.t.real, problem.t.imag],
        'r': problem.r,
        'xi_target': problem.xi_target,
        'channel': ch.to_dict(),
        'diagonal': list(ch.diagonal()),
        'determinant': ch.determinant(),
    }
    return result


def squeezing_trend(t: complex, squeezing_dbs, config, cutoff: int=None) -> list:
    """
    Optimal squeeze-and-displace fidelity against mana-matched cubic phase
    targets of increasing squeezing.

    Returns rows of (squeezing in dB, matched cubicity, fidelity).
    """
    rows = []
    for db in squeezing_dbs:
        xi = db_to_xi(db)
        r = find_matching_cubicity(t, xi, cutoff)
        result = optimize_deterministic(t, r, xi, DetMode.SQUEEZE_DISPLACE, config, cutoff=cutoff)
        rows.append((float(db), r, result.best_value))
    return rows
