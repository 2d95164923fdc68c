"""Feasibility LP over fractional assignments for a fixed violation vector.

Rows, in order: the budget row (finite p only), then ``lo_i_h`` / ``hi_i_h``
proportion rows written homogeneously so empty clusters satisfy them
trivially; equalities ``asg_j`` keep each point's weights summing to one.
For p = inf the budget row is replaced by dropping every (center, point)
pair farther apart than U.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .core import Assignment, Instance, ViolationVector, TOL
from .errors import SolverError, StructuralError

FEAS_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class FeasibilityLP:
    centers: tuple[int, ...]
    n: int
    n_colors: int
    p: float
    budget: float
    deltas: tuple[float, ...]
    pairs: np.ndarray          # (m, 2): (center position, point)
    cost_coef: np.ndarray      # d^p per pair (plain d when p = inf)
    A_ub: sp.csr_matrix
    b_ub: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    ub_names: tuple[str, ...]
    eq_names: tuple[str, ...]

    @property
    def n_vars(self) -> int:
        return int(self.pairs.shape[0])

    @property
    def k(self) -> int:
        return len(self.centers)

    @property
    def has_cost_row(self) -> bool:
        return self.p != math.inf

    def to_weights(self, xvec: np.ndarray) -> np.ndarray:
        W = np.zeros((self.k, self.n))
        W[self.pairs[:, 0], self.pairs[:, 1]] = xvec
        return W

    def to_vector(self, weights: np.ndarray) -> np.ndarray:
        """Flatten a (k, n) weight matrix onto this LP's variables.

        Weight on a pruned pair is returned separately by :meth:`residual`.
        """
        return np.asarray(weights, dtype=float)[self.pairs[:, 0], self.pairs[:, 1]]

    def residual(self, weights: np.ndarray) -> float:
        """Largest row violation of a (k, n) weight matrix, including weight
        placed on pairs the LP does not declare and bound violations."""
        W = np.asarray(weights, dtype=float)
        x = self.to_vector(W)
        declared = np.zeros_like(W, dtype=bool)
        declared[self.pairs[:, 0], self.pairs[:, 1]] = True
        worst = float(np.abs(W[~declared]).max()) if (~declared).any() else 0.0
        if self.A_ub.shape[0]:
            worst = max(worst, float(np.max(self.A_ub @ x - self.b_ub)))
        worst = max(worst, float(np.max(np.abs(self.A_eq @ x - self.b_eq))))
        worst = max(worst, float(np.max(-x, initial=0.0)), float(np.max(x - 1, initial=0.0)))
        return worst

    def row_values(self, weights: np.ndarray) -> dict[str, float]:
        """Left-hand side minus right-hand side of every inequality row by name."""
        x = self.to_vector(weights)
        vals = self.A_ub @ x - self.b_ub
        return dict(zip(self.ub_names, map(float, vals)))


@dataclass(frozen=True, eq=False)
class LPOutcome:
    status: str                       # "feasible" | "infeasible"
    solution: Assignment | None = None
    lp_cost: float | None = None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def _as_deltas(deltas, H: int) -> np.ndarray:
    d = np.asarray(list(deltas), dtype=float).ravel()
    if d.size != H:
        raise StructuralError(f"need {H} violation values, got {d.size}")
    if np.any(d < -TOL) or np.any(d > 1 + TOL):
        raise StructuralError("violation values must lie in [0, 1]")
    return np.clip(d, 0.0, 1.0)


def build_feasibility_lp(instance: Instance, S: Sequence[int], U: float,
                         deltas: ViolationVector | Sequence[float]) -> FeasibilityLP:
    S = tuple(int(c) for c in S)
    if not S:
        raise StructuralError("center set must be non-empty")
    if not np.isfinite(U) or U < 0:
        raise StructuralError("budget U must be finite and non-negative")
    H, n, k = instance.n_colors, instance.n, len(S)
    d = _as_deltas(deltas, H)
    D = instance.distances(S)

    if instance.p == math.inf:
        keep = D <= U * (1 + 1e-12)
        ii, jj = np.nonzero(keep)
        cost = D[ii, jj]
    else:
        ii, jj = np.divmod(np.arange(k * n), n)
        cost = D.ravel() ** instance.p
    pairs = np.column_stack([ii, jj]).astype(np.int64)
    m = pairs.shape[0]

    rows, cols, vals, b_ub, names = [], [], [], [], []
    offset = 0
    if instance.p != math.inf:
        budget_p = U ** instance.p
        # scaled to a unit right-hand side so the solver tolerance is relative
        scale = budget_p if budget_p > 0 else 1.0
        rows.append(np.zeros(m, dtype=np.int64))
        cols.append(np.arange(m))
        vals.append(cost / scale)
        b_ub.append(budget_p / scale)
        names.append("cost")
        offset = 1

    pc = instance.colors[jj]
    var = np.arange(m)
    lo_coef = instance.beta - d
    hi_coef = instance.alpha + d
    for h in range(H):
        is_h = (pc == h).astype(float)
        lo_row = offset + 2 * (ii * H + h)
        rows += [lo_row, lo_row + 1]
        cols += [var, var]
        vals += [lo_coef[h] - is_h, is_h - hi_coef[h]]
    for i in range(k):
        for h in range(H):
            names += [f"lo_{i}_{h}", f"hi_{i}_{h}"]
            b_ub += [0.0, 0.0]
    n_ub = offset + 2 * k * H
    A_ub = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n_ub, m))
    A_eq = sp.csr_matrix((np.ones(m), (jj, var)), shape=(n, m))
    return FeasibilityLP(
        centers=S, n=n, n_colors=H, p=instance.p, budget=float(U),
        deltas=tuple(map(float, d)), pairs=pairs, cost_coef=cost,
        A_ub=A_ub, b_ub=np.asarray(b_ub, dtype=float), A_eq=A_eq, b_eq=np.ones(n),
        ub_names=tuple(names), eq_names=tuple(f"asg_{j}" for j in range(n)),
    )


Backend = Callable[[FeasibilityLP], "tuple[str, np.ndarray | None]"]


def highs_backend(lp: FeasibilityLP):
    """Dual simplex through scipy's HiGHS; returns a vertex minimizing cost."""
    c = lp.cost_coef / max(float(lp.cost_coef.max(initial=0.0)), 1.0)
    res = linprog(c, A_ub=lp.A_ub, b_ub=lp.b_ub, A_eq=lp.A_eq, b_eq=lp.b_eq,
                  bounds=(0.0, 1.0), method="highs-ds",
                  options={"primal_feasibility_tolerance": 1e-9,
                           "dual_feasibility_tolerance": 1e-9})
    if res.status == 0:
        return "feasible", np.asarray(res.x, dtype=float)
    if res.status == 2:
        return "infeasible", None
    raise SolverError(f"HiGHS failed: status {res.status} ({res.message})")


def check_feasibility(lp: FeasibilityLP, backend: Backend | None = None) -> LPOutcome:
    """Decide feasibility and return a witness with exact unit column sums."""
    covered = np.zeros(lp.n, dtype=bool)
    covered[lp.pairs[:, 1]] = True
    if not covered.all():
        return LPOutcome("infeasible")
    status, x = (backend or highs_backend)(lp)
    if status == "infeasible":
        return LPOutcome("infeasible")
    x = np.clip(x, 0.0, 1.0)
    W = lp.to_weights(x)
    W[W < 1e-12] = 0.0
    W /= W.sum(axis=0, keepdims=True)
    if lp.residual(W) > FEAS_TOL:
        raise SolverError(f"witness violates rows by {lp.residual(W):.3g}")
    xs = lp.to_vector(W)
    if lp.p == math.inf:
        used = xs > TOL
        lp_cost = float(lp.cost_coef[used].max()) if used.any() else 0.0
    else:
        lp_cost = float(lp.cost_coef @ xs) ** (1.0 / lp.p)
    return LPOutcome("feasible", Assignment(lp.centers, W), lp_cost)


def write_lp(lp: FeasibilityLP, stream=None) -> str:
    """Serialize in the CPLEX LP text format (variables ``x_i_j``)."""
    out = stream if stream is not None else io.StringIO()
    names = [f"x_{i}_{j}" for i, j in lp.pairs]

    def expr(row) -> str:
        row = row.tocoo()
        terms = [f"{v:+.17g} {names[c]}" for c, v in zip(row.col, row.data) if v != 0]
        return " ".join(terms) if terms else "0 " + (names[0] if names else "x")

    out.write("\\ fair assignment feasibility LP\n")
    out.write(f"\\ deltas = {list(lp.deltas)}\nMinimize\n obj: 0\nSubject To\n")
    for r, name in enumerate(lp.ub_names):
        if name == "cost":
            terms = " ".join(f"{v:+.17g} {names[c]}" for c, v in enumerate(lp.cost_coef))
            out.write(f" cost: {terms} <= {lp.budget ** lp.p:.17g}\n")
        else:
            out.write(f" {name}: {expr(lp.A_ub.getrow(r))} <= 0\n")
    for r, name in enumerate(lp.eq_names):
        out.write(f" {name}: {expr(lp.A_eq.getrow(r))} = 1\n")
    out.write("Bounds\n")
    for nm in names:
        out.write(f" 0 <= {nm} <= 1\n")
    out.write("End\n")
    return out.getvalue() if stream is None else ""


@dataclass(frozen=True, eq=False)
class NonConvexityWitness:
    instance: Instance
    centers: tuple[int, int]
    x1: np.ndarray
    deltas1: tuple[float, float]
    x2: np.ndarray
    deltas2: tuple[float, float]
    midpoint: np.ndarray
    deltas_mid: tuple[float, float]
    lhs: float
    rhs: float

    @property
    def excess(self) -> float:
        return self.lhs - self.rhs


def nonconvexity_counterexample(n: int = 24) -> NonConvexityWitness:
    """Two feasible (x, delta) pairs whose average breaks the red lower-bound
    row of the second cluster.

    Reds are points ``0..n/2-1``, blues the rest; beta = 1/2 and alpha = 2/3
    for both colors, blue's violation is pinned at 1.
    """
    if n % 12 or n < 12:
        raise StructuralError("n must be a positive multiple of 12")
    half = n // 2
    colors = np.r_[np.zeros(half, int), np.ones(half, int)]
    pos = np.arange(n, dtype=float)
    inst = Instance(colors=colors, alpha=[2 / 3, 2 / 3], beta=[0.5, 0.5], p=1,
                    distance_matrix=np.abs(pos[:, None] - pos[None, :]))
    S = (0, n - 1)
    reds, blues = np.arange(half), np.arange(half, n)

    x1 = np.zeros((2, n))
    x1[0, reds[: n // 3]] = 1
    x1[0, blues[: n // 3]] = 1
    x1[1] = 1 - x1[0]

    x2 = np.zeros((2, n))
    x2[0, reds] = 1
    x2[0, blues[: n // 6 - 1]] = 1
    x2[1] = 1 - x2[0]

    d1, d2 = (0.0, 1.0), (0.5, 1.0)
    mid = 0.5 * (x1 + x2)
    dmid = (0.25, 1.0)
    big_U = float(n * n)
    for x, d in ((x1, d1), (x2, d2)):
        if build_feasibility_lp(inst, S, big_U, d).residual(x) > 1e-12:
            raise AssertionError("construction is not feasible")
    lp_mid = build_feasibility_lp(inst, S, big_U, dmid)
    red_cluster2 = float(mid[1, reds].sum())
    lhs = (inst.beta[0] - dmid[0]) * float(mid[1].sum())
    # consistency with the LP's own row: lo row = lhs - rhs
    assert abs(lp_mid.row_values(mid)["lo_1_0"] - (lhs - red_cluster2)) < 1e-12
    return NonConvexityWitness(inst, S, x1, d1, x2, d2, mid, dmid, lhs, red_cluster2)
