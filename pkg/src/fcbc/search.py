"""Searches over discretized violation levels using feasibility LPs.

Every search counts how many LPs it ran so the complexity claims can be
checked from the outside.  Grid levels are handled as integer indices
``0..r`` to keep the walks exact.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import (Assignment, Instance, ViolationVector, min_cluster_size,
                   nearest_assignment, TOL)
from .errors import BudgetInfeasibleError, StructuralError
from .lpsolve import Backend, LPOutcome, build_feasibility_lp, check_feasibility


@dataclass(frozen=True)
class Grid:
    """Levels {0, 1/r, 2/r, ..., 1}."""

    r: int

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 1:
            raise StructuralError("grid resolution r must be a positive integer")

    @classmethod
    def from_epsilon(cls, epsilon: float) -> "Grid":
        if not 0 < epsilon <= 1:
            raise StructuralError("epsilon must lie in (0, 1]")
        r = round(1 / epsilon)
        if abs(r * epsilon - 1) > 1e-9:
            raise StructuralError(f"epsilon={epsilon} is not 1/r for an integer r")
        return cls(int(r))

    @property
    def epsilon(self) -> float:
        return 1.0 / self.r

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.r + 1) / self.r

    def level(self, i: int) -> float:
        return i / self.r

    def __len__(self) -> int:
        return self.r + 1


@dataclass(frozen=True, eq=False)
class SearchResult:
    deltas: ViolationVector
    objective: float
    witness: Assignment
    lp_runs: int
    trace: tuple = ()
    order: tuple = ()


class Probe:
    """Counts feasibility LPs for one (instance, centers, budget)."""

    def __init__(self, instance: Instance, S: Sequence[int], U: float,
                 backend: Backend | None = None):
        self.instance, self.S, self.U, self.backend = instance, tuple(S), U, backend
        self.runs = 0

    def __call__(self, deltas) -> LPOutcome:
        self.runs += 1
        lp = build_feasibility_lp(self.instance, self.S, self.U, deltas)
        return check_feasibility(lp, self.backend)

    def require_budget(self) -> LPOutcome:
        top = self(np.ones(self.instance.n_colors))
        if not top.feasible:
            raise BudgetInfeasibleError(
                f"budget U={self.U} is below the cheapest assignment to the centers")
        return top


HORIZONTAL, DIAGONAL, VERTICAL = 0, 1, 2


def diagonal_walk(probe: Callable[[int, int], object], r: int):
    """Two-color grid walk from the top-right cell.

    ``probe(a, b)`` is asked about levels ``a/r`` and ``b/r``; a truthy
    answer means feasible.  Sweeps left while feasible, then alternates
    between descending the current column and stepping along the
    anti-diagonal one below the best value.  Returns ``(a, b, answer)`` of
    the best cell and the list of probed ``(a, b, feasible)`` cells.
    """
    trace = []

    def check(a, b):
        res = probe(a, b)
        trace.append((a, b, bool(res)))
        return res

    top = check(r, r)
    if not top:
        raise BudgetInfeasibleError("top-right cell (1, 1) is infeasible")
    best = (r, r, top)
    a = b = r
    direction = HORIZONTAL
    while True:
        if direction == HORIZONTAL:
            if a == 0:
                direction = VERTICAL
                continue
            res = check(a - 1, b)
            if res:
                a -= 1
                best = (a, b, res)
            else:
                # column a is the leftmost feasible one; descend it
                direction = VERTICAL
        elif direction == DIAGONAL:
            if a + 1 > r or b - 1 < 0:
                break
            a, b = a + 1, b - 1
            res = check(a, b)
            if res:
                best = (a, b, res)
                direction = VERTICAL
        else:
            if b == 0:
                break
            b -= 1
            res = check(a, b)
            if res:
                best = (a, b, res)
            else:
                direction = DIAGONAL
    return best, trace


def _free_pair_deltas(H, a, b, r, suffix, colors=(0, 1)):
    others = [h for h in range(H) if h not in colors]
    d = np.empty(H)
    d[colors[0]], d[colors[1]] = a / r, b / r
    d[others] = suffix
    return d


def two_color_diagonal(instance: Instance, S, U: float, grid: Grid,
                       fixed_suffix: Sequence[float] = (), backend: Backend | None = None,
                       colors=(0, 1)) -> SearchResult:
    """Utilitarian search over two free colors with the rest held fixed."""
    H = instance.n_colors
    if H < 2:
        raise StructuralError("need at least two colors")
    if len(fixed_suffix) != H - 2:
        raise StructuralError(f"fixed_suffix needs {H - 2} entries")
    probe = Probe(instance, S, U, backend)
    suffix = np.asarray(fixed_suffix, dtype=float)

    def ask(a, b):
        out = probe(_free_pair_deltas(H, a, b, grid.r, suffix, colors))
        return out if out.feasible else None

    (a, b, out), trace = diagonal_walk(ask, grid.r)
    deltas = ViolationVector(tuple(_free_pair_deltas(H, a, b, grid.r, suffix, colors)))
    return SearchResult(deltas, deltas.utilitarian, out.solution, probe.runs, tuple(trace))


def search_utilitarian(instance: Instance, S, U: float, grid: Grid,
                       backend: Backend | None = None) -> SearchResult:
    """Enumerate levels for colors 3..H and walk the first two for each."""
    H = instance.n_colors
    if H < 2:
        raise StructuralError("utilitarian search needs at least two colors")
    if H == 2:
        return two_color_diagonal(instance, S, U, grid, (), backend)
    runs = Probe(instance, S, U, backend)
    runs.require_budget()
    total = runs.runs
    best: SearchResult | None = None
    suffixes = sorted(itertools.product(range(grid.r + 1), repeat=H - 2), key=sum)
    for idx in suffixes:
        if best is not None and sum(idx) / grid.r >= best.objective - TOL:
            break
        try:
            res = two_color_diagonal(instance, S, U, grid, [i / grid.r for i in idx], backend)
        except BudgetInfeasibleError:
            total += 1
            continue
        total += res.lp_runs
        if best is None or res.objective < best.objective - TOL:
            best = res
    assert best is not None  # the all-ones suffix is feasible
    return SearchResult(best.deltas, best.objective, best.witness, total, best.trace)


def symmetric_lambdas(instance: Instance, tol: float = 1e-9):
    """Half-widths (lambda_1, lambda_2) if the two colors' bounds are symmetric
    around midpoints that sum to one, else None."""
    if instance.n_colors != 2:
        return None
    mid = (instance.alpha + instance.beta) / 2
    if abs(mid.sum() - 1) > tol:
        return None
    return tuple((instance.alpha - instance.beta) / 2)


def derived_delta(d1: float, lam1: float, lam2: float) -> float:
    """Violation of the wider color implied by violation d1 of the narrower one."""
    return max(0.0, d1 - (lam2 - lam1))


def two_color_symmetric_search(instance: Instance, S, U: float, grid: Grid,
                               r1: float, r2: float, delta_sym: float,
                               backend: Backend | None = None) -> SearchResult:
    """Binary search on one color's violation; the other follows from it."""
    if instance.n_colors != 2:
        raise StructuralError("symmetric search is for exactly two colors")
    rs = np.array([r1, r2])
    lam = delta_sym * rs
    if (abs(r1 + r2 - 1) > 1e-9
            or not np.allclose(instance.alpha, rs + lam, atol=1e-9, rtol=0)
            or not np.allclose(instance.beta, rs - lam, atol=1e-9, rtol=0)):
        raise StructuralError("instance bounds are not r_i +/- delta_sym * r_i")
    return _symmetric_search(instance, S, U, grid, tuple(lam), backend)


def _symmetric_search(instance, S, U, grid, lam, backend=None) -> SearchResult:
    lead = 0 if lam[0] <= lam[1] else 1
    other = 1 - lead
    probe = Probe(instance, S, U, backend)

    def deltas_for(a):
        d = np.empty(2)
        d[lead] = a / grid.r
        d[other] = derived_delta(a / grid.r, lam[lead], lam[other])
        return d

    best = probe(deltas_for(grid.r))
    if not best.feasible:
        raise BudgetInfeasibleError(f"budget U={U} infeasible at full violation")
    lo, hi = 0, grid.r
    while lo < hi:
        mid = (lo + hi) // 2
        out = probe(deltas_for(mid))
        if out.feasible:
            hi, best = mid, out
        else:
            lo = mid + 1
    deltas = ViolationVector(tuple(deltas_for(hi)))
    return SearchResult(deltas, deltas.utilitarian, best.solution, probe.runs)


def search_egalitarian(instance: Instance, S, U: float, grid: Grid,
                       backend: Backend | None = None) -> SearchResult:
    """Smallest common level feasible for all colors, by binary search."""
    H = instance.n_colors
    probe = Probe(instance, S, U, backend)
    best = probe.require_budget()
    lo, hi = 0, grid.r
    while lo < hi:
        mid = (lo + hi) // 2
        out = probe(np.full(H, mid / grid.r))
        if out.feasible:
            hi, best = mid, out
        else:
            lo = mid + 1
    level = hi / grid.r
    return SearchResult(ViolationVector((level,) * H), level, best.solution, probe.runs)


def search_leximin(instance: Instance, S, U: float, grid: Grid,
                   L_est: int | None = None, rng_seed: int = 0,
                   backend: Backend | None = None) -> SearchResult:
    """Freeze colors one round at a time at the smallest common level the
    still-active colors can share.

    Each round binary-searches that level strictly below the previous
    round's, pads it by ``2 / L_est`` and then asks, color by color, whether
    that color alone could go one grid step below the unpadded level.
    Colors that cannot are frozen; if all can, one is frozen at random.
    ``order`` lists ``(color, level)`` in freezing order.
    """
    H, r, eps = instance.n_colors, grid.r, grid.epsilon
    if L_est is None:
        L_est = min_cluster_size(nearest_assignment(instance, S))
    if L_est < 1:
        raise StructuralError("L_est must be at least 1")
    pad = 2.0 / L_est
    rng = np.random.default_rng(rng_seed)
    probe = Probe(instance, S, U, backend)
    witness = probe.require_budget()

    frozen: dict[int, float] = {}
    order: list[tuple[int, float]] = []
    prev = math.inf
    while len(frozen) < H:
        active = [h for h in range(H) if h not in frozen]

        def vec(active_level, special=None, special_level=None):
            d = np.empty(H)
            for h in range(H):
                d[h] = frozen.get(h, active_level)
            if special is not None:
                d[special] = special_level
            return np.clip(d, 0.0, 1.0)

        # largest grid index strictly below the previous round's level
        top = r if prev == math.inf else math.ceil(prev * r - 1e-9) - 1
        top = min(top, r)
        found = None
        if top >= 0:
            out = probe(vec(top / r)) if not (top == r and not frozen) else witness
            if out.feasible:
                found, witness = top, out
                lo, hi = 0, top
                while lo < hi:
                    mid = (lo + hi) // 2
                    out = probe(vec(mid / r))
                    if out.feasible:
                        hi, witness = mid, out
                    else:
                        lo = mid + 1
                found = hi
        if found is None:
            for h in active:
                frozen[h] = min(prev, 1.0)
                order.append((h, frozen[h]))
            break
        delta = found / r
        level = min(delta + pad, 1.0)
        target = delta - eps
        stuck = []
        for h in active:
            if target < 0:
                stuck.append(h)
                continue
            if not probe(vec(level, h, target)).feasible:
                stuck.append(h)
        if not stuck:
            stuck = [active[int(rng.integers(len(active)))]]
        for h in stuck:
            frozen[h] = level
            order.append((h, level))
        prev = level
    deltas = ViolationVector(tuple(frozen[h] for h in range(H)))
    return SearchResult(deltas, deltas.egalitarian, witness.solution, probe.runs,
                        order=tuple(order))
