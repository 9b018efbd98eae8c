"""End-to-end checks against the exact oracles; run with `pytest -m slow`."""

import math
import time

import numpy as np
import pytest

from box_geometry import weakly_dominated_mask
from dataset_generator import DatasetKind, generate
from exact_hypervolume import ExactAlgo, all_contributions_exact, con_exact, hyp
from lc_race import RaceConfig, solve

pytestmark = pytest.mark.slow

GUARANTEE_TRIALS = 1000
GUARANTEE_DELTA = 0.05


def _random_instance(rng):
    n = int(rng.integers(2, 9))
    d = int(rng.integers(2, 6))
    return generate(DatasetKind.RANDOM1, n, d, int(rng.integers(2 ** 32)))


@pytest.fixture(scope="module")
def guarantee_runs():
    """Solve GUARANTEE_TRIALS random fronts, recording every round snapshot"""
    rng = np.random.default_rng(20240601)
    runs = []
    for trial in range(GUARANTEE_TRIALS):
        front = _random_instance(rng)
        exact = all_contributions_exact(front)
        snapshots = []
        config = RaceConfig(epsilon=0.01, delta=GUARANTEE_DELTA, seed=trial)
        result = solve(front, config, observer=snapshots.append)
        runs.append((front, exact, config, result, snapshots))
    return runs


def test_hso_matches_inclusion_exclusion_on_random_fronts():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    for _ in range(200):
        front = generate(DatasetKind.RANDOM1, int(rng.integers(2, 11)), int(rng.integers(2, 7)),
                         int(rng.integers(2 ** 32)))
        hso = hyp(front, ExactAlgo.HSO)
        oracle = hyp(front, ExactAlgo.INCLUSION_EXCLUSION)
        assert abs(hso - oracle) <= 1e-9 * hso
    assert time.perf_counter() - start < 10.0


def test_failure_rate_within_delta(guarantee_runs):
    failures = sum(
        exact[result.index] > 1.01 * exact.min() * (1 + 1e-12)
        for _, exact, _, result, _ in guarantee_runs
    )
    margin = 3 * math.sqrt(GUARANTEE_DELTA * (1 - GUARANTEE_DELTA) / GUARANTEE_TRIALS)
    assert failures / GUARANTEE_TRIALS <= GUARANTEE_DELTA + margin


def test_confidence_intervals_hold_at_round_boundaries(guarantee_runs):
    events = 0
    checks = 0
    for _, exact, _, _, snapshots in guarantee_runs:
        for snapshot in snapshots:
            for box in snapshot.boxes:
                if box.exact:
                    continue
                checks += 1
                if abs(box.estimate - exact[box.index]) > box.width:
                    events += 1
    assert checks > 0
    assert events / checks <= GUARANTEE_DELTA


def test_separated_instances_return_the_exact_minimum():
    rng = np.random.default_rng(7)
    hits = 0
    trials = 0
    while trials < 500:
        front = _random_instance(rng)
        exact = all_contributions_exact(front)
        ordered = np.sort(exact)
        if not ordered[0] > 0 or ordered[1] / ordered[0] <= 1.01:
            continue
        result = solve(front, RaceConfig(epsilon=0.01, delta=0.05, seed=trials))
        hits += result.index == int(np.argmin(exact))
        trials += 1
    assert hits / trials >= 0.93


def test_exact_ties_end_by_abortion(staircase):
    start = time.perf_counter()
    for seed in range(100):
        result = solve(staircase, RaceConfig(epsilon=0.01, delta=1e-6, seed=seed))
        assert result.eliminated_order == ()
        assert con_exact(staircase, result.index) <= 1.01
    assert time.perf_counter() - start < 30.0


@pytest.mark.parametrize("n, limit", [(100, 5.0), (1000, 60.0)])
def test_linear_front_in_100_dimensions(n, limit):
    front = generate(DatasetKind.LINEAR, n, 100, 0)
    result = solve(front, RaceConfig(epsilon=1e-2, delta=1e-6))
    assert 0 <= result.index < n
    assert result.elapsed < limit


def test_racing_beats_exact_contributions():
    front = generate(DatasetKind.LINEAR, 10, 12, 0)
    solve_times = [solve(front, RaceConfig(seed=seed)).elapsed for seed in range(20)]

    start = time.perf_counter()
    all_contributions_exact(front, ExactAlgo.HSO)
    exact_seconds = time.perf_counter() - start

    assert float(np.median(solve_times)) * 10 <= exact_seconds


@pytest.mark.parametrize("kind, constraint", [
    (DatasetKind.LINEAR, lambda p: p.sum(axis=1)),
    (DatasetKind.SPHERICAL, lambda p: (p ** 2).sum(axis=1)),
    (DatasetKind.CONCAVE, lambda p: np.sqrt(p).sum(axis=1)),
])
@pytest.mark.parametrize("d", [3, 10, 100])
def test_surface_datasets_at_scale(kind, constraint, d):
    points = generate(kind, 10_000, d, d).points
    assert np.all((points >= 0.0) & (points <= 1.0))
    assert np.max(np.abs(constraint(points) - 1.0)) <= 1e-9


@pytest.mark.parametrize("kind", [DatasetKind.RANDOM1, DatasetKind.RANDOM2])
def test_random_datasets_are_antichains(kind):
    points = generate(kind, 50, 5, 11).points
    assert not weakly_dominated_mask(points).any()


def test_replay_and_scaling(guarantee_runs):
    for front, _, config, result, _ in guarantee_runs[:50]:
        assert solve(front, config) == result
        assert solve(front.scaled(0, 10.0), config).index == result.index
