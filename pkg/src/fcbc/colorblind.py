"""Color-blind seeders that supply the center set and the POF denominator.

All three restrict centers to data points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Assignment, Instance, clustering_cost, nearest_assignment
from .errors import StructuralError


@dataclass(frozen=True, eq=False)
class SeedResult:
    centers: tuple[int, ...]
    nearest_assignment: Assignment
    cost: float
    alpha: float
    method: str


def kmeanspp_alpha(k: int) -> float:
    """Numeric stand-in for the O(log k) ratio of k-means++."""
    return 2.0 * math.log(k) + 2.0


def _check_k(instance: Instance, k: int):
    if k < 1 or k > instance.n:
        raise StructuralError(f"need 1 <= k <= n, got k={k}, n={instance.n}")


def _result(instance, centers, alpha, method) -> SeedResult:
    centers = tuple(int(c) for c in centers)
    asg = nearest_assignment(instance, centers)
    return SeedResult(centers, asg, clustering_cost(asg, instance), float(alpha), method)


def _sample_seeds(instance: Instance, k: int, rng: np.random.Generator, power: float):
    """Sequential D^power sampling; falls back to unused points once every
    remaining point coincides with a center."""
    n = instance.n
    centers = [int(rng.integers(n))]
    closest = instance.distances([centers[0]])[0]
    while len(centers) < k:
        w = closest ** power
        total = w.sum()
        if total > 0:
            c = int(rng.choice(n, p=w / total))
        else:
            free = np.setdiff1d(np.arange(n), centers)
            c = int(rng.choice(free))
        centers.append(c)
        closest = np.minimum(closest, instance.distances([c])[0])
    return centers


def kmeans_pp_seed(instance: Instance, k: int, rng_seed: int = 0, max_iter: int = 50,
                   alpha: float | None = None) -> SeedResult:
    """k-means++ seeding followed by Lloyd refinement over data-point centers.

    Each refinement step moves a center to the member closest to the cluster
    mean (or the squared-distance medoid when only a metric is known), and
    the step is kept only if the total cost drops.
    """
    if instance.p != 2.0:
        raise StructuralError("k-means++ seeding expects p = 2")
    _check_k(instance, k)
    rng = np.random.default_rng(rng_seed)
    centers = _sample_seeds(instance, k, rng, power=2.0)
    cost = _sq_cost(instance, centers)
    for _ in range(max_iter):
        labels = np.argmin(instance.distances(centers), axis=0)
        proposal = list(centers)
        for t in range(k):
            members = np.flatnonzero(labels == t)
            if members.size == 0:
                continue
            proposal[t] = _representative(instance, members)
        if len(set(proposal)) < k:
            break
        new_cost = _sq_cost(instance, proposal)
        if new_cost >= cost * (1 - 1e-12):
            break
        centers, cost = proposal, new_cost
    return _result(instance, centers, kmeanspp_alpha(k) if alpha is None else alpha,
                   "kmeans++")


def _sq_cost(instance, centers) -> float:
    return float(np.sum(instance.distances(centers).min(axis=0) ** 2))


def _representative(instance: Instance, members: np.ndarray) -> int:
    if instance.points is not None:
        pts = instance.points[members]
        mean = pts.mean(axis=0)
        return int(members[np.argmin(np.sum((pts - mean) ** 2, axis=1))])
    D = instance.distances(members)[:, members]
    return int(members[np.argmin(np.sum(D ** 2, axis=1))])


def gonzalez_kcenter(instance: Instance, k: int, first: int = 0) -> SeedResult:
    """Farthest-point traversal starting from ``first``; 2-approximate radius."""
    _check_k(instance, k)
    if not 0 <= first < instance.n:
        raise StructuralError("first center out of range")
    centers = [int(first)]
    closest = instance.distances([first])[0].copy()
    while len(centers) < k:
        # among equally far points argmax takes the lowest index
        c = int(np.argmax(closest))
        if closest[c] == 0:
            free = np.setdiff1d(np.arange(instance.n), centers)
            c = int(free[0])
        centers.append(c)
        closest = np.minimum(closest, instance.distances([c])[0])
    return _result(instance, centers, 2.0, "gonzalez")


def local_search_kmedian(instance: Instance, k: int, rng_seed: int = 0,
                         tol: float = 1e-4, max_rounds: int = 1000) -> SeedResult:
    """Single-swap local search from a D-sampled start.

    A swap is taken only if it lowers the cost below ``(1 - tol)`` times the
    current cost; the best such swap is applied each round.
    """
    if instance.p != 1.0:
        raise StructuralError("k-median local search expects p = 1")
    _check_k(instance, k)
    rng = np.random.default_rng(rng_seed)
    centers = _sample_seeds(instance, k, rng, power=1.0)
    n = instance.n
    for _ in range(max_rounds):
        D = instance.distances(centers)
        cost = float(D.min(axis=0).sum())
        if cost == 0:
            break
        order = np.argsort(D, axis=0, kind="stable")
        first = D[order[0], np.arange(n)]
        second = D[order[1], np.arange(n)] if k > 1 else np.full(n, np.inf)
        # excl[t, j]: distance of j to its closest center once center t is removed
        excl = np.where(order[0][None, :] == np.arange(k)[:, None], second[None, :],
                        first[None, :])
        best = (cost * (1 - tol), None)
        in_set = set(centers)
        for q in range(n):
            if q in in_set:
                continue
            dq = instance.distances([q])[0]
            totals = np.minimum(excl, dq[None, :]).sum(axis=1)
            t = int(np.argmin(totals))
            if totals[t] < best[0]:
                best = (float(totals[t]), (t, q))
        if best[1] is None:
            break
        t, q = best[1]
        centers[t] = q
    return _result(instance, centers, 5.0, "local-search")


SEEDERS = {
    "kmeans++": kmeans_pp_seed,
    "gonzalez": gonzalez_kcenter,
    "local-search": local_search_kmedian,
}


def default_seed_method(p: float) -> str:
    return {1.0: "local-search", 2.0: "kmeans++"}.get(p, "gonzalez")


def run_seeder(instance: Instance, k: int, method: str | None = None, rng_seed: int = 0,
               alpha: float | None = None) -> SeedResult:
    method = method or default_seed_method(instance.p)
    if method == "kmeans++":
        return kmeans_pp_seed(instance, k, rng_seed, alpha=alpha)
    if method == "gonzalez":
        res = gonzalez_kcenter(instance, k, first=0)
    elif method == "local-search":
        res = local_search_kmedian(instance, k, rng_seed)
    else:
        raise StructuralError(f"unknown seed method {method!r}")
    if alpha is not None:
        res = SeedResult(res.centers, res.nearest_assignment, res.cost, float(alpha), res.method)
    return res
