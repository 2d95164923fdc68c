"""Dense two-phase simplex with Bland's rule.

Only meant for small LPs: it keeps the suite runnable without HiGHS and gives
an independent second opinion on feasibility verdicts.
"""
from __future__ import annotations

import numpy as np

from .errors import SolverError


def _pivot(T: np.ndarray, basis: list[int], r: int, c: int):
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    basis[r] = c


def _run(T: np.ndarray, basis: list[int], n_cols: int, tol: float, max_iter: int):
    """Minimize the objective in the last row over the first ``n_cols`` columns."""
    for _ in range(max_iter):
        reduced = T[-1, :n_cols]
        entering = np.flatnonzero(reduced < -tol)
        if entering.size == 0:
            return
        c = int(entering[0])
        col = T[:-1, c]
        ok = col > tol
        if not ok.any():
            raise SolverError("unbounded direction in simplex")
        ratios = np.full(col.shape, np.inf)
        ratios[ok] = T[:-1, -1][ok] / col[ok]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol)
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, basis, r, c)
    raise SolverError("simplex iteration limit reached")


def solve_box_lp(c, A_ub, b_ub, A_eq, b_eq, tol: float = 1e-9, max_iter: int = 20000):
    """min c.x  s.t.  A_ub x <= b_ub, A_eq x = b_eq, 0 <= x <= 1.

    Returns ``("feasible", x)`` or ``("infeasible", None)``.
    """
    A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
    A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
    m = len(c)
    A_ub = A_ub.reshape(-1, m)
    A_eq = A_eq.reshape(-1, m)
    # upper bounds x <= 1 become explicit rows
    A_ub = np.vstack([A_ub, np.eye(m)])
    b_ub = np.r_[np.asarray(b_ub, dtype=float).ravel(), np.ones(m)]
    n_ub, n_eq = A_ub.shape[0], A_eq.shape[0]
    rows = n_ub + n_eq
    # columns: x (m), slacks (n_ub), artificials (rows)
    A = np.zeros((rows, m + n_ub))
    A[:n_ub, :m] = A_ub
    A[:n_ub, m:] = np.eye(n_ub)
    A[n_ub:, :m] = A_eq
    b = np.r_[b_ub, np.asarray(b_eq, dtype=float).ravel()]
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    n_struct = m + n_ub
    T = np.zeros((rows + 1, n_struct + rows + 1))
    T[:rows, :n_struct] = A
    T[:rows, n_struct:n_struct + rows] = np.eye(rows)
    T[:rows, -1] = b
    T[-1, :n_struct] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n_struct, n_struct + rows))
    _run(T, basis, n_struct + rows, tol, max_iter)
    if -T[-1, -1] > 1e-7:
        return "infeasible", None
    # drive remaining artificials out of the basis where possible
    for r, bv in enumerate(basis):
        if bv >= n_struct:
            nz = np.flatnonzero(np.abs(T[r, :n_struct]) > tol)
            if nz.size:
                _pivot(T, basis, r, int(nz[0]))
    keep = [r for r, bv in enumerate(basis) if bv < n_struct]
    T2 = np.zeros((len(keep) + 1, n_struct + 1))
    T2[:-1, :n_struct] = T[keep, :n_struct]
    T2[:-1, -1] = T[keep, -1]
    basis2 = [basis[r] for r in keep]
    cost = np.zeros(n_struct)
    cost[:m] = c
    T2[-1, :n_struct] = cost
    for r, bv in enumerate(basis2):
        T2[-1] -= cost[bv] * T2[r]
    _run(T2, basis2, n_struct, tol, max_iter)
    x = np.zeros(n_struct)
    for r, bv in enumerate(basis2):
        x[bv] = T2[r, -1]
    return "feasible", np.clip(x[:m], 0.0, 1.0)


def simplex_backend(lp):
    """Backend adapter for :func:`fcbc.lpsolve.check_feasibility`."""
    c = lp.cost_coef / max(float(lp.cost_coef.max(initial=0.0)), 1.0)
    return solve_box_lp(c, lp.A_ub.toarray(), lp.b_ub, lp.A_eq.toarray(), lp.b_eq)
