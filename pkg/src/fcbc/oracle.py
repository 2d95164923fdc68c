"""Exhaustive solver over all integral assignments, for tiny instances only."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import Assignment, Instance, Objective, ViolationVector, TOL
from .errors import BudgetInfeasibleError, GuardExceeded, StructuralError

GUARD = 10 ** 7
_CHUNK = 1 << 16


@dataclass(frozen=True, eq=False)
class OracleResult:
    objective: Objective
    best_deltas: ViolationVector
    best_value: float
    best_assignment: Assignment
    enumerated: int
    n_within_budget: int


def _score(deltas: np.ndarray, kind: Objective) -> np.ndarray:
    """Sort keys, one row per candidate; smaller is better."""
    if kind is Objective.UTILITARIAN:
        return deltas.sum(axis=1, keepdims=True)
    if kind is Objective.EGALITARIAN:
        return deltas.max(axis=1, keepdims=True)
    return -np.sort(-deltas, axis=1)


def _labels_block(start: int, stop: int, k: int, n: int) -> np.ndarray:
    """Base-k digits of ``start..stop-1``: row r holds the labels of point 0..n-1."""
    codes = np.arange(start, stop, dtype=np.int64)
    out = np.empty((codes.size, n), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        out[:, j] = codes % k
        codes //= k
    return out


def brute_force(instance: Instance, S, U: float, objective="utilitarian",
                guard: int = GUARD) -> OracleResult:
    """Best integral assignment to ``S`` with cost at most ``U``.

    Leximin compares violation vectors sorted in descending order.  Ties are
    broken towards the lowest assignment code (point 0 most significant).
    """
    kind = Objective.parse(objective)
    S = tuple(int(c) for c in S)
    k, n, H = len(S), instance.n, instance.n_colors
    if k == 0:
        raise StructuralError("need at least one center")
    total = k ** n
    if total > guard:
        raise GuardExceeded(f"k^n = {total} exceeds the guard {guard}")
    D = instance.distances(S)
    cost_mat = D if instance.p == math.inf else D ** instance.p
    budget = U if instance.p == math.inf else U ** instance.p
    colors = instance.colors
    cols = np.arange(n)

    best_key, best_code, best_deltas, feasible = None, None, None, 0
    for start in range(0, total, _CHUNK):
        lab = _labels_block(start, min(total, start + _CHUNK), k, n)
        c = cost_mat[lab, cols]
        cost = c.max(axis=1) if instance.p == math.inf else c.sum(axis=1)
        ok = cost <= budget * (1 + 1e-12) + 1e-12
        if not ok.any():
            continue
        lab = lab[ok]
        feasible += lab.shape[0]
        counts = np.zeros((lab.shape[0], k, H))
        rows = np.repeat(np.arange(lab.shape[0]), n)
        np.add.at(counts, (rows, lab.ravel(), np.tile(colors, lab.shape[0])), 1.0)
        sizes = counts.sum(axis=2, keepdims=True)
        share = np.divide(counts, sizes, out=np.zeros_like(counts), where=sizes > 0)
        viol = np.maximum(share - instance.alpha, instance.beta - share)
        viol = np.where(sizes > 0, np.maximum(viol, 0.0), 0.0)
        deltas = viol.max(axis=1)
        key = _score(deltas, kind)
        order = np.lexsort(key.T[::-1])
        idx = int(order[0])
        cand = tuple(key[idx])
        if best_key is None or _less(cand, best_key):
            best_key, best_deltas = cand, deltas[idx]
            best_code = lab[idx]
    if best_key is None:
        raise BudgetInfeasibleError(f"no assignment to {S} has cost <= {U}")
    vv = ViolationVector(tuple(np.clip(best_deltas, 0.0, 1.0)))
    value = vv.utilitarian if kind is Objective.UTILITARIAN else vv.egalitarian
    return OracleResult(kind, vv, value, Assignment.from_labels(S, best_code), total, feasible)


def _less(a, b, tol: float = TOL) -> bool:
    for x, y in zip(a, b):
        if x < y - tol:
            return True
        if x > y + tol:
            return False
    return False


def brute_force_fcbc(instance: Instance, k: int, U: float, objective="utilitarian",
                     guard: int = GUARD) -> tuple[tuple[int, ...], OracleResult]:
    """Also enumerate the center set: every k-subset of the points."""
    kind = Objective.parse(objective)
    best = None
    if math.comb(instance.n, k) * k ** instance.n > guard:
        raise GuardExceeded("center sets times assignments exceed the guard")
    for S in itertools.combinations(range(instance.n), k):
        try:
            res = brute_force(instance, S, U, kind, guard)
        except BudgetInfeasibleError:
            continue
        key = _score(res.best_deltas.as_array()[None, :], kind)[0]
        if best is None or _less(tuple(key), best[0]):
            best = (tuple(key), S, res)
    if best is None:
        raise BudgetInfeasibleError(f"no clustering with {k} centers has cost <= {U}")
    return best[1], best[2]
