import itertools

import numpy as np
import pytest

from fcbc.core import Assignment, Instance, clustering_cost, compute_violations
from fcbc.errors import BudgetInfeasibleError, GuardExceeded
from fcbc.oracle import brute_force, brute_force_fcbc

from conftest import line_instance, random_instance, step_instance, t1_instance


def test_t1_utilitarian_zero():
    res = brute_force(t1_instance(), (2, 1), 1.0, "util")
    assert res.best_value == 0.0 and res.enumerated == 16
    assert sorted(np.bincount(res.best_assignment.labels)) == [2, 2]


def test_step_below_radius():
    assert brute_force(step_instance(), (0, 2), 99.0, "egal").best_value == 0.5
    assert brute_force(step_instance(), (0, 2), 100.0, "egal").best_value == 0.0


def test_single_point():
    inst = Instance(colors=[0], alpha=[0.5], beta=[0.25], p=2, points=[0.0])
    res = brute_force(inst, (0,), 0.0, "egal")
    # share 1 against an upper bound of 1/2
    assert res.enumerated == 1 and res.best_deltas.delta == (0.5,)


def test_guard_and_budget():
    inst = random_instance(np.random.default_rng(0), 30)
    with pytest.raises(GuardExceeded):
        brute_force(inst, (0, 1), 1e9, "util")
    with pytest.raises(BudgetInfeasibleError):
        brute_force(step_instance(), (0, 2), 0.5, "util")


def test_matches_naive_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(15):
        inst = random_instance(rng, int(rng.integers(3, 7)), H=int(rng.integers(1, 4)))
        S = tuple(rng.choice(inst.n, min(2, inst.n), replace=False))
        U = 1.5
        for kind in ("util", "egal", "leximin"):
            best = None
            for lab in itertools.product(range(len(S)), repeat=inst.n):
                a = Assignment.from_labels(S, lab)
                if clustering_cost(a, inst) > U:
                    continue
                v = compute_violations(a, inst)
                key = {"util": (v.utilitarian,), "egal": (v.egalitarian,)}.get(kind, v.leximin_key())
                best = key if best is None or key < best else best
            if best is None:
                with pytest.raises(BudgetInfeasibleError):
                    brute_force(inst, S, U, kind)
                continue
            res = brute_force(inst, S, U, kind)
            got = res.best_deltas
            key = {"util": (got.utilitarian,), "egal": (got.egalitarian,)}.get(kind, got.leximin_key())
            assert np.allclose(key, best, atol=1e-12)
            assert clustering_cost(res.best_assignment, inst) <= U


def test_free_centers_on_line():
    # with the centers free the closed form 1/2 - 2m/n' appears: m = 1, n' = 5 -> 0.1
    S, res = brute_force_fcbc(line_instance(), 2, 3.0, "egal")
    assert res.best_value == pytest.approx(0.1, abs=1e-12)
    assert clustering_cost(res.best_assignment, line_instance()) <= 3.0
