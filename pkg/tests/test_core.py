import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fcbc.core import (Assignment, Instance, Objective, ViolationVector, clustering_cost,
                       compute_violations, min_cluster_size, nearest_assignment,
                       objective_value, parse_p, per_cluster_violations, pof,
                       proportional_bounds, snap_ceil, snap_floor)
from fcbc.errors import StructuralError

from conftest import line_instance


def _line(points, colors, p=2, alpha=(0.5, 0.5), beta=(0.5, 0.5)):
    return Instance(colors=colors, alpha=alpha, beta=beta, p=p, points=np.asarray(points, float))


def test_cost_self_assignment_is_zero():
    inst = _line([3.0], [0], alpha=[0.9], beta=[0.1])
    assert clustering_cost(Assignment.from_labels((0,), [0]), inst) == 0.0


@pytest.mark.parametrize("p,expected", [(2, 5.0), (1, 7.0), ("center", 4.0)])
def test_cost_three_four(p, expected):
    # point 1 is 3 away from center 0, point 3 is 4 away from center 2
    inst = _line([0.0, 3.0, 10.0, 14.0], [0, 1, 0, 1], p=p)
    asg = Assignment.from_labels((0, 2), [0, 0, 1, 1])
    assert clustering_cost(asg, inst) == pytest.approx(expected, abs=1e-12)


def test_cost_dimension_mismatch():
    inst = _line([0.0, 1.0], [0, 1])
    with pytest.raises(StructuralError):
        clustering_cost(Assignment.from_labels((0,), [0, 0, 0]), inst)


def test_fractional_cost_is_linear_inside_power():
    inst = _line([0.0, 2.0], [0, 1], p=1)
    x = Assignment((0, 1), np.array([[1.0, 0.25], [0.0, 0.75]]))
    assert clustering_cost(x, inst) == pytest.approx(0.5)


def test_violation_balanced_pair():
    inst = _line([0.0, 1.0], [0, 1])
    v = compute_violations(Assignment.from_labels((0,), [0, 0]), inst)
    assert v.delta == (0.0, 0.0)


def test_violation_three_to_one():
    inst = _line([0, 1, 2, 3], [0, 0, 0, 1])
    v = compute_violations(Assignment.from_labels((0,), [0, 0, 0, 0]), inst)
    assert v.delta == (0.25, 0.25)


def test_violation_line_nearest_is_monochromatic():
    inst = line_instance()
    v = compute_violations(nearest_assignment(inst, (2, 7)), inst)
    assert v.delta == (0.5, 0.5)


def test_empty_cluster_skipped():
    inst = _line([0, 1], [0, 1])
    v = compute_violations(Assignment.from_labels((0, 1), [0, 0]), inst)
    assert v.delta == (0.0, 0.0)


@pytest.mark.parametrize("d,util,egal", [((0, 0), 0, 0), ((0.25, 0.25), 0.5, 0.25)])
def test_objective_values(d, util, egal):
    assert objective_value(d, "utilitarian") == util
    assert objective_value(d, Objective.EGALITARIAN) == egal


def test_min_cluster_size_integral():
    asg = Assignment.from_labels((0, 1), [0] * 3 + [1] * 5)
    assert min_cluster_size(asg) == 3


def test_min_cluster_size_fractional_uses_ceiling_of_large_masses():
    W = np.array([[0.5, 0.5, 0.9, 0.0], [0.5, 0.5, 0.1, 1.0]])
    # masses 1.9 and 2.1 -> ceilings 2 and 3
    assert min_cluster_size(Assignment((0, 1), W)) == 2


def test_min_cluster_size_all_small_masses():
    W = np.full((3, 2), 1 / 3)
    with pytest.raises(StructuralError):
        min_cluster_size(Assignment((0, 1, 0), W))


@pytest.mark.parametrize("a,b,r", [(10, 10, 1.0), (15, 10, 1.5), (0, 10, 0.0)])
def test_pof(a, b, r):
    assert pof(a, b) == r


def test_pof_zero_denominator():
    with pytest.raises(StructuralError):
        pof(1, 0)


def test_parse_p_and_objective_aliases():
    assert parse_p("median") == 1 and parse_p("means") == 2 and parse_p("center") == math.inf
    assert Objective.parse("lex") is Objective.LEXIMIN
    with pytest.raises(StructuralError):
        parse_p(3)


def test_instance_rejects_bad_bounds():
    with pytest.raises(StructuralError):
        _line([0, 1], [0, 1], alpha=[0.4, 0.5], beta=[0.5, 0.5])
    with pytest.raises(StructuralError):
        Instance(colors=[0, 1], alpha=[.5, .5], beta=[.5, .5], points=[0, 1],
                 distance_matrix=np.zeros((2, 2)))


def test_proportional_bounds():
    alpha, beta = proportional_bounds([0, 0, 0, 1], 0.1)
    assert np.allclose(alpha, [0.825, 0.275]) and np.allclose(beta, [0.675, 0.225])


def test_snap_helpers():
    assert snap_floor(2.9999999999) == 3 and snap_ceil(3.0000000001) == 3
    assert snap_floor(2.5) == 2 and snap_ceil(2.5) == 3


def test_nearest_assignment_ties_go_to_first_center():
    inst = _line([0.0, 1.0, 2.0], [0, 1, 0])
    assert list(nearest_assignment(inst, (0, 2)).labels) == [0, 0, 1]


def test_distance_matrix_and_points_agree(rng):
    pts = rng.normal(size=(12, 3))
    a = Instance(colors=np.arange(12) % 2, alpha=[.6, .6], beta=[.4, .4], points=pts)
    D = np.linalg.norm(pts[:, None] - pts[None], axis=2)
    b = Instance(colors=np.arange(12) % 2, alpha=[.6, .6], beta=[.4, .4], distance_matrix=D)
    S = (1, 5, 7)
    assert np.allclose(a.distances(S), b.distances(S), atol=1e-12)


labels_st = st.lists(st.integers(0, 2), min_size=1, max_size=12)


@settings(max_examples=60, deadline=None)
@given(labels=labels_st, colors=st.lists(st.integers(0, 1), min_size=12, max_size=12),
       d=st.floats(0.0, 0.4))
def test_violations_are_tight_bounds(labels, colors, d):
    n = len(labels)
    colors = np.array(colors[:n])
    colors[0] = 0
    if n > 1:
        colors[1] = 1
    H = 2 if n > 1 else 1
    alpha = np.full(H, 0.5 + d) if H == 2 else [0.9]
    beta = np.full(H, 0.5 - d) if H == 2 else [0.1]
    inst = Instance(colors=colors, alpha=np.minimum(alpha, 0.99), beta=np.maximum(beta, 0.01),
                    points=np.arange(n, dtype=float))
    asg = Assignment.from_labels((0, 0, 0), labels)
    v = compute_violations(asg, inst).as_array()
    sizes = asg.masses
    counts = asg.weights @ inst.color_onehot
    tight = np.zeros(H, dtype=bool)
    for i in np.flatnonzero(sizes > 0):
        share = counts[i] / sizes[i]
        assert np.all(share <= inst.alpha + v + 1e-12)
        assert np.all(share >= inst.beta - v - 1e-12)
        tight |= np.isclose(share, inst.alpha + v) | np.isclose(share, inst.beta - v)
    assert np.all(tight | (v == 0))


@settings(max_examples=40, deadline=None)
@given(labels=st.lists(st.integers(0, 2), min_size=2, max_size=10), seed=st.integers(0, 99))
def test_violations_invariant_under_relabel_and_duplication(labels, seed):
    rng = np.random.default_rng(seed)
    n = len(labels)
    colors = rng.integers(0, 2, n)
    colors[:2] = [0, 1]
    inst = Instance(colors=colors, alpha=[0.6, 0.6], beta=[0.4, 0.4], points=rng.normal(size=(n, 2)))
    asg = Assignment.from_labels((0, 1, 0), labels)
    perm = np.array([2, 0, 1])
    relabeled = Assignment.from_labels((0, 0, 1), perm[np.asarray(labels)])
    assert compute_violations(asg, inst) == compute_violations(relabeled, inst)
    doubled = Instance(colors=np.r_[colors, colors], alpha=inst.alpha, beta=inst.beta,
                       points=np.r_[inst.points, inst.points])
    asg2 = Assignment.from_labels((0, 1, 0), np.r_[labels, labels])
    assert np.allclose(compute_violations(asg2, doubled).as_array(),
                       compute_violations(asg, inst).as_array(), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 15))
def test_center_cost_at_most_median_cost(seed, n):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 2))
    inst = Instance(colors=np.zeros(n, int), alpha=[0.9], beta=[0.1], p=1, points=pts)
    asg = Assignment.from_labels((0,), np.zeros(n, int))
    assert clustering_cost(asg, inst.with_p("center")) <= clustering_cost(asg, inst) + 1e-12


def test_per_cluster_violations_shape():
    inst = line_instance()
    per = per_cluster_violations(nearest_assignment(inst, (2, 7)), inst)
    assert per.shape == (2, 2) and np.allclose(per, 0.5)


def test_violation_vector_keys():
    v = ViolationVector((0.1, 0.3, 0.2))
    assert v.leximin_key() == (0.3, 0.2, 0.1)
    assert v.utilitarian == pytest.approx(0.6) and v.egalitarian == 0.3
