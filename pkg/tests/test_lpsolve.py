import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fcbc.core import (Assignment, Instance, clustering_cost, compute_violations,
                       nearest_assignment)
from fcbc.errors import StructuralError
from fcbc.lpsolve import (build_feasibility_lp, check_feasibility, nonconvexity_counterexample,
                          write_lp)
from fcbc.simplex import simplex_backend, solve_box_lp

from conftest import random_instance, step_instance


def test_row_counts():
    inst = Instance(colors=[0, 1, 0, 1], alpha=[.6, .6], beta=[.4, .4], p=1,
                    points=np.arange(4.0))
    lp = build_feasibility_lp(inst, (0, 3), 10.0, (0.1, 0.1))
    assert lp.n_vars == 8
    assert lp.A_ub.shape == (9, 8) and lp.ub_names[0] == "cost"
    assert lp.A_eq.shape == (4, 8)
    assert sum(name.startswith(("lo_", "hi_")) for name in lp.ub_names) == 8


def test_center_pruning_keeps_only_self_columns():
    inst = step_instance()
    lp = build_feasibility_lp(inst, (0, 2), 0.5, (1, 1))
    assert sorted(map(tuple, lp.pairs)) == [(0, 0), (1, 2)]
    assert lp.A_ub.shape[0] == 8  # no cost row for p = inf
    assert not check_feasibility(lp).feasible


def test_full_violation_rows_are_vacuous(rng):
    inst = random_instance(rng, 10)
    lp = build_feasibility_lp(inst, (0, 1), 1e6, (1, 1))
    A = lp.A_ub.toarray()[1 if lp.has_cost_row else 0:]
    # every coefficient is (beta - 1) - [color] <= 0 or [color] - (alpha + 1) <= 0
    assert np.all(A <= 1e-12)


def test_negative_budget_and_wrong_delta_length():
    inst = step_instance()
    with pytest.raises(StructuralError):
        build_feasibility_lp(inst, (0, 2), -1.0, (1, 1))
    with pytest.raises(StructuralError):
        build_feasibility_lp(inst, (0, 2), 5.0, (1, 1, 1))


def test_feasible_with_nearest_cost(rng):
    for _ in range(10):
        inst = random_instance(rng, 12)
        S = (0, 5, 7)
        U = clustering_cost(nearest_assignment(inst, S), inst)
        out = check_feasibility(build_feasibility_lp(inst, S, U * (1 + 1e-12), (1, 1)))
        assert out.feasible
        assert np.abs(out.solution.weights.sum(axis=0) - 1).max() < 1e-12


def test_step_instance_verdicts():
    inst = step_instance()
    lp = build_feasibility_lp(inst, (0, 2), 99, (0.49, 0.49))
    assert not check_feasibility(lp).feasible
    assert not check_feasibility(lp, simplex_backend).feasible
    out = check_feasibility(build_feasibility_lp(inst, (0, 2), 100, (0.0, 0.0)))
    assert out.feasible
    assert compute_violations(out.solution, inst).delta == (0.0, 0.0)


def test_step_instance_lp_agrees_with_enumeration():
    inst = step_instance()
    for U in (99.0, 100.0):
        D = inst.distances((0, 2))
        exact = False
        for lab in itertools.product(range(2), repeat=4):
            if max(D[l, j] for j, l in enumerate(lab)) <= U:
                v = compute_violations(Assignment.from_labels((0, 2), lab), inst)
                exact |= max(v) <= 0.49
        lp_says = check_feasibility(build_feasibility_lp(inst, (0, 2), U, (0.49, 0.49))).feasible
        assert lp_says == exact == (U >= 100)


def test_witness_rescored_within_deltas(rng):
    for _ in range(25):
        inst = random_instance(rng, int(rng.integers(4, 20)))
        S = tuple(rng.choice(inst.n, 2, replace=False))
        U = clustering_cost(nearest_assignment(inst, S), inst) * 1.5
        d = rng.uniform(0, 0.5, 2)
        out = check_feasibility(build_feasibility_lp(inst, S, U, d))
        if out.feasible:
            assert np.all(compute_violations(out.solution, inst).as_array() <= d + 1e-7)
            assert clustering_cost(out.solution, inst) <= U * (1 + 1e-7)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_monotone_feasibility(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(4, 10)))
    S = (0, 1)
    U = clustering_cost(nearest_assignment(inst, S), inst) * rng.uniform(1, 2)
    d1 = rng.uniform(0, 1, 2)
    d2 = np.minimum(d1 + rng.uniform(0, 0.5, 2), 1)
    if check_feasibility(build_feasibility_lp(inst, S, U, d1)).feasible:
        assert check_feasibility(build_feasibility_lp(inst, S, U, d2)).feasible


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10 ** 6), c=st.floats(0.01, 100))
def test_feasibility_invariant_under_scaling(seed, c):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 8)
    scaled = Instance(colors=inst.colors, alpha=inst.alpha, beta=inst.beta, p=inst.p,
                      points=inst.points * c)
    S = (0, 1)
    U = clustering_cost(nearest_assignment(inst, S), inst) * rng.uniform(0.9, 1.5)
    d = rng.uniform(0, 0.4, 2)
    a = check_feasibility(build_feasibility_lp(inst, S, U, d)).feasible
    b = check_feasibility(build_feasibility_lp(scaled, S, U * c, d)).feasible
    assert a == b


def test_simplex_matches_highs_verdicts():
    rng = np.random.default_rng(4)
    for _ in range(40):
        inst = random_instance(rng, int(rng.integers(3, 8)))
        S = tuple(rng.choice(inst.n, 2, replace=False))
        U = clustering_cost(nearest_assignment(inst, S), inst) * rng.uniform(0.8, 1.3)
        lp = build_feasibility_lp(inst, S, U, rng.uniform(0, 0.5, 2))
        assert check_feasibility(lp).feasible == check_feasibility(lp, simplex_backend).feasible


def test_simplex_small_lp():
    status, x = solve_box_lp(np.array([1.0, 2.0]), np.zeros((0, 2)), [],
                             np.array([[1.0, 1.0]]), [1.0])
    assert status == "feasible" and np.allclose(x, [1, 0])
    status, _ = solve_box_lp(np.array([0.0]), np.array([[1.0]]), [-1.0], np.zeros((0, 1)), [])
    assert status == "infeasible"


def test_nonconvexity_construction():
    w = nonconvexity_counterexample(24)
    assert abs(w.excess - 1 / 8) <= 1e-12
    assert abs(w.lhs - (24 / 12 + 1 / 8)) <= 1e-12
    big = 24.0 ** 2
    for x, d in ((w.x1, w.deltas1), (w.x2, w.deltas2)):
        assert build_feasibility_lp(w.instance, w.centers, big, d).residual(x) <= 1e-12
    lp = build_feasibility_lp(w.instance, w.centers, big, w.deltas_mid)
    vals = lp.row_values(w.midpoint)
    assert vals["lo_1_0"] == pytest.approx(1 / 8, abs=1e-12)
    others = {k: v for k, v in vals.items() if k != "lo_1_0"}
    assert max(others.values()) <= 1e-12
    assert np.allclose(w.midpoint.sum(axis=0), 1)


def test_write_lp_format():
    inst = Instance(colors=[0, 1], alpha=[.5, .5], beta=[.5, .5], p=1, points=[0.0, 1.0])
    text = write_lp(build_feasibility_lp(inst, (0,), 2.0, (0, 0)))
    assert "Subject To" in text and " asg_0:" in text and "cost:" in text
    assert text.rstrip().endswith("End")
    assert "0 <= x_0_1 <= 1" in text
