import numpy as np
import pytest

from triangulum.error import InvalidArgument
from triangulum.optim import (
    Bounds,
    EvolutionConfig,
    OptResult,
    SwarmConfig,
    de_minimize,
    grid_refine,
    maximize,
    pso_minimize,
    refine_max,
)


def sphere(x):
    return float(np.sum(x * x))


def rastrigin(x):
    return float(10.0 * len(x) + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


@pytest.fixture
def box4():
    return Bounds.from_pairs([(-5.0, 5.0)] * 4)


def test_bounds_validation():
    with pytest.raises(InvalidArgument):
        Bounds((0.0, 1.0), (1.0,))
    with pytest.raises(InvalidArgument):
        Bounds((2.0,), (1.0,))
    with pytest.raises(InvalidArgument):
        Bounds((0.0,), (float('inf'),))
    with pytest.raises(InvalidArgument):
        Bounds((1.0,), (1.0,)).require_volume()
    b = Bounds.from_pairs([(0.0, 1.0), (-1.0, 1.0)])
    assert b.contains([0.5, 0.0]) and not b.contains([1.5, 0.0])
    assert np.allclose(b.clip([2.0, -3.0]), [1.0, -1.0])


def test_swarm_config_defaults_and_overrides():
    cfg = SwarmConfig.from_defaults(n_particles=None, n_iter=7)
    assert cfg.n_iter == 7
    assert cfg.n_particles == 64
    with pytest.raises(InvalidArgument):
        SwarmConfig(n_particles=1)
    with pytest.raises(InvalidArgument):
        EvolutionConfig(population=3)


def test_pso_finds_sphere_minimum(box4):
    cfg = SwarmConfig(n_particles=200, n_iter=200, alpha=1.5, beta=1.5, inertia=0.5, seed=11)
    result = pso_minimize(sphere, box4, cfg)
    assert result.best_value < 1e-6
    assert result.evaluations == 200 * 201


def test_pso_stays_in_box_and_history_is_monotone(box4):
    outside = []

    def watched(x):
        if not box4.contains(x):
            outside.append(x)
        return sphere(x - 4.0)

    cfg = SwarmConfig(n_particles=20, n_iter=30, alpha=1.5, beta=1.5, seed=2)
    result = pso_minimize(watched, box4, cfg)
    assert len(outside) == 0
    assert all(b <= a for (a, b) in zip(result.history, result.history[1:]))
    assert len(result.history) == 31


def test_pso_is_deterministic_for_a_seed(box4):
    cfg = SwarmConfig(n_particles=16, n_iter=10, seed=5)
    a = pso_minimize(sphere, box4, cfg)
    b = pso_minimize(sphere, box4, cfg)
    assert a.best_x == b.best_x
    assert a.history == b.history


def test_pso_threads_do_not_change_result(box4):
    one = pso_minimize(sphere, box4, SwarmConfig(n_particles=16, n_iter=10, seed=5))
    many = pso_minimize(sphere, box4, SwarmConfig(n_particles=16, n_iter=10, seed=5, threads=4))
    assert one.best_x == many.best_x


def test_pso_keeps_seeded_point(box4):
    cfg = SwarmConfig(n_particles=4, n_iter=0, seed=0)
    result = pso_minimize(sphere, box4, cfg, x0=[0.0, 0.0, 0.0, 0.0])
    assert result.best_value == 0.0


def test_non_finite_objective_is_worst(box4):
    def nan_far(x):
        return float('nan') if x[0] > 0.0 else sphere(x)

    result = pso_minimize(nan_far, box4, SwarmConfig(n_particles=10, n_iter=5, seed=1))
    assert np.isfinite(result.best_value)


def test_de_finds_sphere_minimum(box4):
    result = de_minimize(sphere, box4, EvolutionConfig(population=40, n_iter=300, seed=3))
    assert result.best_value < 1e-6
    assert result.method == 'de'


def test_de_holds_fixed_components():
    box = Bounds.from_pairs([(-2.0, 2.0), (0.5, 0.5), (-2.0, 2.0)])
    seen = []

    def record(x):
        seen.append(x[1])
        return sphere(x)

    result = de_minimize(record, box, EvolutionConfig(population=12, n_iter=20, seed=0))
    assert all(v == 0.5 for v in seen)
    assert result.best_x[1] == 0.5


def test_progress_reports_every_iteration(box4):
    calls = []
    pso_minimize(sphere, box4, SwarmConfig(n_particles=8, n_iter=4, seed=0), progress=lambda *a: calls.append(a))
    assert [c[0] for c in calls] == [0, 1, 2, 3, 4]


def test_maximize_negates():
    box = Bounds.from_pairs([(-1.0, 1.0)])
    result = maximize(lambda x: 1.0 - float(x[0] ** 2), box, SwarmConfig(n_particles=10, n_iter=20, alpha=1.5, beta=1.5, seed=4))
    assert result.sense == 'max'
    assert 0.99 < result.best_value <= 1.0
    assert all(b >= a for (a, b) in zip(result.history, result.history[1:]))
    with pytest.raises(InvalidArgument):
        maximize(sphere, box, object())


def test_grid_refine_center_wins_ties():
    flat = grid_refine(lambda x: 1.0, [0.3, 0.4], 0.1, 5)
    assert flat.best_x == [0.3, 0.4]
    assert flat.evaluations == 1 + 25
    single = grid_refine(sphere, [0.3], 0.1, 1)
    assert single.best_x == [0.3] and single.evaluations == 1


def test_grid_refine_improves():
    result = grid_refine(sphere, [0.1, -0.1], 0.1, 3)
    assert result.best_value == 0.0


def test_refine_max_accumulates_evaluations():
    box = Bounds.from_pairs([(-1.0, 1.0)])
    coarse = maximize(lambda x: -float(x[0] ** 2), box, SwarmConfig(n_particles=4, n_iter=1, seed=9))
    polished = refine_max(lambda x: -float(x[0] ** 2), coarse, 0.05, 11, box)
    assert polished.best_value >= coarse.best_value
    assert polished.evaluations == coarse.evaluations + 12


def test_result_json_round_trip():
    result = OptResult(best_x=[0.1, 0.2], best_value=0.5, evaluations=10, seed=3, extra={'mode': 'x'})
    assert OptResult.from_json(result.to_json()) == result


def test_both_optimizers_escape_rastrigin_minima():
    box = Bounds.from_pairs([(-5.12, 5.12)] * 2)
    swarm = pso_minimize(rastrigin, box, SwarmConfig(n_particles=100, n_iter=150, alpha=1.5, beta=1.5, inertia=0.5, seed=7))
    evolution = de_minimize(rastrigin, box, EvolutionConfig(population=40, n_iter=300, seed=7))
    # every other local minimum lies above 0.99
    assert swarm.best_value < 0.5
    assert evolution.best_value < 0.5
    assert np.abs(np.array(evolution.best_x)).max() < 0.1
