import itertools

import numpy as np
import pytest

from fcbc.colorblind import (default_seed_method, gonzalez_kcenter, kmeans_pp_seed,
                             kmeanspp_alpha, local_search_kmedian, run_seeder)
from fcbc.core import Instance, clustering_cost
from fcbc.errors import StructuralError


def _inst(points, p=2):
    pts = np.asarray(points, float)
    n = pts.shape[0]
    return Instance(colors=np.zeros(n, int), alpha=[0.9], beta=[0.1], p=p, points=pts)


def test_kmeanspp_coinciding_groups_cost_zero():
    pts = np.repeat([[0.0, 0.0], [5.0, 5.0], [9.0, -3.0]], 4, axis=0)
    res = kmeans_pp_seed(_inst(pts), 3, rng_seed=3)
    assert res.cost == 0.0


def test_kmeanspp_single_point():
    res = kmeans_pp_seed(_inst([[1.0, 2.0]]), 1)
    assert res.centers == (0,) and res.cost == 0.0


def test_kmeanspp_deterministic(rng):
    inst = _inst(rng.normal(size=(300, 3)))
    a = kmeans_pp_seed(inst, 5, rng_seed=11)
    b = kmeans_pp_seed(inst, 5, rng_seed=11)
    assert a.centers == b.centers and a.cost == b.cost


def test_kmeanspp_requires_p2():
    with pytest.raises(StructuralError):
        kmeans_pp_seed(_inst([[0.0], [1.0]], p=1), 1)


def test_gonzalez_collinear():
    res = gonzalez_kcenter(_inst([0.0, 4.0, 10.0], p="center"), 2, first=0)
    assert set(res.centers) == {0, 2} and res.cost == 4.0 and res.alpha == 2.0


def test_gonzalez_k_equals_n_and_duplicates():
    assert gonzalez_kcenter(_inst([0.0, 1.0, 5.0], p="center"), 3).cost == 0.0
    assert gonzalez_kcenter(_inst([2.0, 2.0, 2.0], p="center"), 1).cost == 0.0


def test_gonzalez_within_factor_two_of_optimum():
    rng = np.random.default_rng(7)
    for trial in range(60):
        n = int(rng.integers(2, 11))
        k = int(rng.integers(1, min(3, n) + 1))
        inst = _inst(rng.normal(size=(n, 2)), p="center")
        best = min(inst.distances(S).min(axis=0).max()
                   for S in itertools.combinations(range(n), k))
        assert gonzalez_kcenter(inst, k).cost <= 2 * best + 1e-12


def test_local_search_line():
    res = local_search_kmedian(_inst([0.0, 1.0, 10.0], p=1), 1, rng_seed=0)
    assert res.centers == (1,) and res.cost == pytest.approx(10.0)


def test_local_search_k_equals_n_and_determinism(rng):
    assert local_search_kmedian(_inst([0.0, 3.0, 7.0], p=1), 3).cost == 0.0
    inst = _inst(rng.normal(size=(60, 2)), p=1)
    assert local_search_kmedian(inst, 4, 5).cost == local_search_kmedian(inst, 4, 5).cost


@pytest.mark.parametrize("method,p", [("kmeans++", 2), ("gonzalez", "center"),
                                      ("local-search", 1)])
def test_seed_cost_matches_core(method, p, rng):
    inst = _inst(rng.normal(size=(40, 2)), p=p)
    res = run_seeder(inst, 4, method, rng_seed=2)
    assert res.cost == clustering_cost(res.nearest_assignment, inst)
    assert res.method == method


def test_k_larger_than_n():
    with pytest.raises(StructuralError):
        gonzalez_kcenter(_inst([0.0, 1.0]), 3)


def test_defaults():
    assert default_seed_method(1.0) == "local-search"
    assert default_seed_method(2.0) == "kmeans++"
    assert default_seed_method(float("inf")) == "gonzalez"
    assert kmeanspp_alpha(1) == 2.0
