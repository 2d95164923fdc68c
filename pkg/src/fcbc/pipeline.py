"""Fair assignment to fixed centers, fair clustering and budget sweeps."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .colorblind import SeedResult, run_seeder
from .core import (Assignment, Instance, Objective, ViolationVector, clustering_cost,
                   compute_violations, min_cluster_size, objective_value)
from .errors import PropertyViolation, StructuralError
from .lpsolve import Backend
from .rounding import randomized_round, round_assignment
from .search import (Grid, SearchResult, _symmetric_search, search_egalitarian,
                     search_leximin, search_utilitarian, symmetric_lambdas)

DEFAULT_EPSILON = 1 / 128
COST_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class SolveReport:
    centers: tuple[int, ...]
    assignment: Assignment
    deltas: ViolationVector
    objective_kind: Objective
    value: float
    cost: float
    budget: float
    pof: float
    min_cluster: int
    lp_runs: int
    runtime_ms: float
    lp_deltas: ViolationVector | None = None
    lp_value: float | None = None
    search_path: str = ""
    order: tuple = ()


@dataclass(frozen=True, eq=False)
class SweepReport:
    seed: SeedResult
    baseline: SolveReport
    levels: tuple[float, ...]
    reports: tuple[SolveReport, ...] = field(default_factory=tuple)

    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.reports])


def within_budget(cost: float, budget: float, p: float) -> bool:
    if p == math.inf:
        return cost <= budget
    return cost <= budget * (1 + COST_RTOL) + 1e-12


def _search(instance, S, U, kind, grid, rng_seed, backend, L_est) -> tuple[SearchResult, str]:
    if kind is Objective.UTILITARIAN:
        lam = symmetric_lambdas(instance)
        if lam is not None:
            return _symmetric_search(instance, S, U, grid, lam, backend), "symmetric"
        return search_utilitarian(instance, S, U, grid, backend), "diagonal"
    if kind is Objective.EGALITARIAN:
        return search_egalitarian(instance, S, U, grid, backend), "binary"
    return search_leximin(instance, S, U, grid, L_est, rng_seed, backend), "leximin"


RANDOM_DRAWS = 32


def _random_within_budget(x, instance, U, rng_seed):
    """Randomized rounding keeps cost only in expectation; redraw until a
    draw fits the budget, or give up after ``RANDOM_DRAWS`` attempts."""
    ss = np.random.SeedSequence(rng_seed)
    for i, child in enumerate(ss.spawn(RANDOM_DRAWS)):
        seed = rng_seed if i == 0 else int(child.generate_state(1)[0])
        xbar = randomized_round(x, instance, rng_seed=seed)
        if within_budget(clustering_cost(xbar, instance), U, instance.p):
            return xbar
    return None


def solve_fabc(instance: Instance, S: Sequence[int], U: float, objective_kind="utilitarian",
               grid: Grid | None = None, rng_seed: int = 0, rounding: str = "flow",
               colorblind_cost: float | None = None, backend: Backend | None = None,
               L_est: int | None = None) -> SolveReport:
    """Search violation levels, round the accepting LP solution, re-score it."""
    t0 = time.perf_counter()
    kind = Objective.parse(objective_kind)
    grid = grid or Grid.from_epsilon(DEFAULT_EPSILON)
    S = tuple(int(c) for c in S)
    res, path = _search(instance, S, U, kind, grid, rng_seed, backend, L_est)
    if rounding == "flow":
        xbar = round_assignment(res.witness, instance)
    elif rounding == "random":
        xbar = _random_within_budget(res.witness, instance, U, rng_seed)
        if xbar is None:
            xbar = round_assignment(res.witness, instance)
            path += "+flow-fallback"
    else:
        raise StructuralError(f"unknown rounding {rounding!r}")
    cost = clustering_cost(xbar, instance)
    if not within_budget(cost, U, instance.p):
        raise PropertyViolation(f"rounded cost {cost!r} exceeds budget {U!r}")
    deltas = compute_violations(xbar, instance)
    pof = cost / colorblind_cost if colorblind_cost else math.nan
    return SolveReport(
        centers=S, assignment=xbar, deltas=deltas, objective_kind=kind,
        value=objective_value(deltas, kind), cost=cost, budget=float(U), pof=pof,
        min_cluster=min_cluster_size(xbar), lp_runs=res.lp_runs,
        runtime_ms=1000 * (time.perf_counter() - t0), lp_deltas=res.deltas,
        lp_value=res.objective, search_path=path, order=res.order)


def solve_fcbc(instance: Instance, k: int, U: float, objective_kind="utilitarian",
               grid: Grid | None = None, seed_method: str | None = None, rng_seed: int = 0,
               expand_budget: bool = False, rounding: str = "flow",
               backend: Backend | None = None) -> SolveReport:
    """Color-blind centers first, then a fair assignment within the budget.

    With ``expand_budget`` the assignment may spend ``(2 + alpha) U`` where
    alpha is the seeder's approximation ratio; otherwise ``U`` itself.
    """
    if U < 0:
        raise StructuralError("budget must be non-negative")
    seed = run_seeder(instance, k, seed_method, rng_seed)
    budget = (2 + seed.alpha) * U if expand_budget else U
    return solve_fabc(instance, seed.centers, budget, objective_kind, grid, rng_seed,
                      rounding, seed.cost, backend)


def baseline_report(instance: Instance, seed: SeedResult, kind: Objective) -> SolveReport:
    asg = seed.nearest_assignment
    deltas = compute_violations(asg, instance)
    return SolveReport(
        centers=seed.centers, assignment=asg, deltas=deltas, objective_kind=kind,
        value=objective_value(deltas, kind), cost=seed.cost, budget=seed.cost, pof=1.0,
        min_cluster=min_cluster_size(asg), lp_runs=0, runtime_ms=0.0, search_path="colorblind")


def pof_sweep(instance: Instance, k: int, objective_kind="utilitarian",
              pof_levels: Sequence[float] = (1.0,), grid: Grid | None = None,
              seed_method: str | None = None, rng_seed: int = 0, rounding: str = "flow",
              backend: Backend | None = None) -> SweepReport:
    """One color-blind solve, then one fair assignment per budget ratio."""
    levels = tuple(float(v) for v in pof_levels)
    if not levels:
        raise StructuralError("pof_levels must be non-empty")
    if any(b < a for a, b in zip(levels, levels[1:])) or levels[0] < 1:
        raise StructuralError("pof_levels must be ascending and at least 1")
    kind = Objective.parse(objective_kind)
    seed = run_seeder(instance, k, seed_method, rng_seed)
    if seed.cost <= 0:
        raise StructuralError("color-blind cost is zero; ratios are undefined")
    reports = []
    for rho in levels:
        reports.append(solve_fabc(instance, seed.centers, rho * seed.cost, kind, grid,
                                  rng_seed, rounding, seed.cost, backend))
    return SweepReport(seed, baseline_report(instance, seed, kind), levels, tuple(reports))
