"""
Box-bounded, derivative-free global optimizers.

Both optimizers minimize. Fidelity searches go through `maximize`, which
negates the objective and reports results with `sense = 'max'`.
"""

import itertools
import json
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import optimize

from triangulum.config import defaults
from triangulum.error import InvalidArgument


@dataclass(frozen=True)
class Bounds:
    """
    Componentwise box `lower <= x <= upper`.
    """
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        object.__setattr__(self, 'lower', lo)
        object.__setattr__(self, 'upper', hi)
        if len(lo) != len(hi):
            raise InvalidArgument('bounds have mismatched lengths '+str(len(lo))+' and '+str(len(hi)))
        if not all(math.isfinite(v) for v in lo + hi):
            raise InvalidArgument('bounds must be finite')
        for (i, (a, b)) in enumerate(zip(lo, hi)):
            if a > b:
                raise InvalidArgument('lower bound '+str(a)+' exceeds upper bound '+str(b)+' in component '+str(i))

    @staticmethod
    def from_pairs(pairs):
        pairs = list(pairs)
        return Bounds(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def dim(self) -> int:
        return len(self.lower)

    def arrays(self):
        return (np.array(self.lower), np.array(self.upper))

    def clip(self, x) -> np.ndarray:
        lo, hi = self.arrays()
        return np.clip(x, lo, hi)

    def contains(self, x) -> bool:
        lo, hi = self.arrays()
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= lo) and np.all(x <= hi))

    def require_volume(self):
        lo, hi = self.arrays()
        if self.dim() == 0 or np.all(hi == lo):
            raise InvalidArgument('cannot search a zero-size box')

    def to_list(self) -> list:
        return [[a, b] for (a, b) in zip(self.lower, self.upper)]


@dataclass(frozen=True)
class SwarmConfig:
    n_particles: int = 64
    n_iter: int = 100
    alpha: float = 0.05
    beta: float = 1.05
    inertia: float = 0.5
    seed: int = None
    init: str = 'random'
    threads: int = 1

    def __post_init__(self):
        if self.n_particles < 2:
            raise InvalidArgument('a swarm needs at least 2 particles')
        if self.n_iter < 0:
            raise InvalidArgument('iteration count must be non-negative')
        if not all(math.isfinite(v) for v in (self.alpha, self.beta, self.inertia)):
            raise InvalidArgument('swarm rates must be finite')
        if self.init not in ('random', 'grid'):
            raise InvalidArgument('unknown swarm initialization "'+str(self.init)+'"')
        if self.threads < 1:
            raise InvalidArgument('thread count must be at least 1')

    @staticmethod
    def from_defaults(**overrides):
        cfg = defaults()
        values = {
            'n_particles': cfg.get_int('swarm.particles'),
            'n_iter': cfg.get_int('swarm.iterations'),
            'alpha': cfg.get_float('swarm.alpha'),
            'beta': cfg.get_float('swarm.beta'),
            'inertia': cfg.get_float('swarm.inertia'),
        }
        values.update({k: v for (k, v) in overrides.items() if v is not None})
        return SwarmConfig(**values)

    def budget(self) -> dict:
        return {'particles': self.n_particles, 'iterations': self.n_iter}


@dataclass(frozen=True)
class EvolutionConfig:
    population: int = 48
    n_iter: int = 200
    mutation: float = 0.7
    crossover: float = 0.9
    seed: int = None
    threads: int = 1

    def __post_init__(self):
        if self.population < 4:
            raise InvalidArgument('differential evolution needs a population of at least 4')
        if self.n_iter < 1:
            raise InvalidArgument('iteration count must be positive')
        if not 0.0 <= self.crossover <= 1.0:
            raise InvalidArgument('crossover rate must lie in [0, 1]')
        if not 0.0 < self.mutation < 2.0:
            raise InvalidArgument('differential weight must lie in (0, 2)')
        if self.threads < 1:
            raise InvalidArgument('thread count must be at least 1')

    @staticmethod
    def from_defaults(**overrides):
        cfg = defaults()
        values = {
            'population': cfg.get_int('evolution.population'),
            'n_iter': cfg.get_int('evolution.iterations'),
            'mutation': cfg.get_float('evolution.mutation'),
            'crossover': cfg.get_float('evolution.crossover'),
        }
        values.update({k: v for (k, v) in overrides.items() if v is not None})
        return EvolutionConfig(**values)

    def budget(self) -> dict:
        return {'population': self.population, 'iterations': self.n_iter}


@dataclass
class OptResult:
    best_x: list
    best_value: float
    evaluations: int
    seed: int = None
    method: str = 'pso'
    sense: str = 'min'
    budget: dict = field(default_factory=dict)
    history: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str):
        return OptResult(**json.loads(text))


class _Evaluator:
    """
    Counts objective calls and maps non-finite values to +inf.
    """

    def __init__(self, objective, threads: int):
        self.objective = objective
        self.threads = threads
        self.count = 0
        self.best = math.inf
        self._lock = threading.Lock()

    def __call__(self, x) -> float:
        value = float(self.objective(np.array(x, dtype=float)))
        if not math.isfinite(value):
            value = math.inf
        with self._lock:
            self.count += 1
            if value < self.best:
                self.best = value
        return value

    def population(self, xs: np.ndarray) -> np.ndarray:
        rows = [row for row in xs]
        if self.threads == 1:
            return np.array(list(map(self, rows)))
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return np.array(list(pool.map(self, rows)))


def _grid_start(bounds: Bounds, count: int) -> np.ndarray:
    lo, hi = bounds.arrays()
    per_axis = max(2, int(math.ceil(count ** (1.0 / bounds.dim()))))
    axes = [np.linspace(a, b, per_axis) for (a, b) in zip(lo, hi)]
    points = itertools.islice(itertools.product(*axes), count)
    return np.array(list(points))


def pso_minimize(objective, bounds: Bounds, config: SwarmConfig, progress=None, x0=None) -> OptResult:
    """
    Particle swarm minimization with inertia `config.inertia`, global-best
    rate `config.alpha` and personal-best rate `config.beta`.
    """
    bounds.require_volume()
    rng = np.random.default_rng(config.seed)
    lo, hi = bounds.arrays()
    n, d = config.n_particles, bounds.dim()
    if config.init == 'grid':
        x = _grid_start(bounds, n)
    else:
        x = lo + rng.random((n, d)) * (hi - lo)
    if x0 is not None:
        x[0] = bounds.clip(np.asarray(x0, dtype=float))
    v = np.zeros((n, d))

    evaluator = _Evaluator(objective, config.threads)
    f = evaluator.population(x)
    pbest = x.copy()
    pval = f.copy()
    # argmin keeps the lowest index on ties
    g = int(np.argmin(pval))
    gbest = pbest[g].copy()
    gval = float(pval[g])
    history = [gval]
    if progress is not None:
        progress(0, gval, evaluator.count)

    for it in range(1, config.n_iter + 1):
        e1 = rng.random((n, d))
        e2 = rng.random((n, d))
        v = config.inertia * v + config.alpha * e1 * (gbest - x) + config.beta * e2 * (pbest - x)
        x = np.clip(x + v, lo, hi)
        f = evaluator.population(x)
        improved = f < pval
        pbest[improved] = x[improved]
        pval[improved] = f[improved]
        g = int(np.argmin(pval))
        if pval[g] < gval:
            gval = float(pval[g])
            gbest = pbest[g].copy()
        history.append(gval)
        if progress is not None:
            progress(it, gval, evaluator.count)

    return OptResult(
        best_x=gbest.tolist(),
        best_value=gval,
        evaluations=evaluator.count,
        seed=config.seed,
        method='pso',
        budget=config.budget(),
        history=history,
    )


def de_minimize(objective, bounds: Bounds, config: EvolutionConfig, progress=None, x0=None) -> OptResult:
    """
    Differential evolution (rand/1/bin) through scipy, without polishing.

    Fixed components (equal lower and upper bound) are held out of the search.
    """
    bounds.require_volume()
    lo, hi = bounds.arrays()
    free = hi > lo
    base = lo.copy()

    def expand(z):
        full = base.copy()
        full[free] = z
        return full

    evaluator = _Evaluator(lambda z: objective(expand(z)), config.threads)
    history = []

    def record(xk, convergence=None):
        history.append(evaluator.best)
        if progress is not None:
            progress(len(history), evaluator.best, evaluator.count)

    dim = int(np.count_nonzero(free))
    popsize = max(1, int(math.ceil(config.population / dim)))
    workers = 1
    pool = None
    if config.threads > 1:
        pool = ThreadPoolExecutor(max_workers=config.threads)
        workers = pool.map
    try:
        res = optimize.differential_evolution(
            evaluator,
            bounds=list(zip(lo[free], hi[free])),
            strategy='rand1bin',
            maxiter=config.n_iter,
            popsize=popsize,
            mutation=config.mutation,
            recombination=config.crossover,
            seed=np.random.default_rng(config.seed),
            tol=0.0,
            atol=0.0,
            polish=False,
            updating='deferred',
            workers=workers,
            callback=record,
            x0=None if x0 is None else bounds.clip(np.asarray(x0, dtype=float))[free],
        )
    finally:
        if pool is not None:
            pool.shutdown()

    return OptResult(
        best_x=expand(res.x).tolist(),
        best_value=float(res.fun),
        evaluations=evaluator.count,
        seed=config.seed,
        method='de',
        budget=config.budget(),
        history=history,
    )


def grid_refine(objective, center, radius, nodes: int, bounds: Bounds=None) -> OptResult:
    """
    Evaluates a tensor grid of `nodes` points per axis spanning `center ± radius`
    and returns the best point; the center itself wins ties.
    """
    center = np.asarray(center, dtype=float)
    radius = np.broadcast_to(np.asarray(radius, dtype=float), center.shape)
    if not np.all(radius > 0.0):
        raise InvalidArgument('refinement radius must be positive')
    if nodes < 1:
        raise InvalidArgument('refinement needs at least one node per axis')
    evaluator = _Evaluator(objective, 1)
    best_x = center.copy()
    best_value = evaluator(best_x)
    if nodes > 1:
        axes = [np.linspace(c - h, c + h, nodes) for (c, h) in zip(center, radius)]
        for point in itertools.product(*axes):
            x = np.array(point)
            if bounds is not None:
                x = bounds.clip(x)
            value = evaluator(x)
            if value < best_value:
                best_value = value
                best_x = x
    return OptResult(
        best_x=best_x.tolist(),
        best_value=float(best_value),
        evaluations=evaluator.count,
        method='grid',
        budget={'nodes': nodes, 'radius': radius.tolist()},
        history=[float(best_value)],
    )


def _negate(result: OptResult) -> OptResult:
    result.best_value = -result.best_value
    result.history = [-h for h in result.history]
    result.sense = 'max'
    return result


def maximize(objective, bounds: Bounds, config, progress=None, x0=None) -> OptResult:
    """
    Maximizes `objective` with the optimizer selected by the type of `config`.
    """
    def loss(x):
        return -objective(x)

    def report(it, value, evaluations):
        progress(it, -value, evaluations)

    relay = None if progress is None else report
    if isinstance(config, SwarmConfig):
        return _negate(pso_minimize(loss, bounds, config, relay, x0))
    if isinstance(config, EvolutionConfig):
        return _negate(de_minimize(loss, bounds, config, relay, x0))
    raise InvalidArgument('unsupported optimizer configuration '+type(config).__name__)


def refine_max(objective, result: OptResult, radius, nodes: int, bounds: Bounds=None) -> OptResult:
    """
    Polishes a maximization result on a local grid.
    """
    polished = grid_refine(lambda x: -objective(x), result.best_x, radius, nodes, bounds)
    polished.evaluations += result.evaluations
    polished.seed = result.seed
    return _negate(polished)
