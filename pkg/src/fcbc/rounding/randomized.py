"""Dependent randomized rounding that keeps marginals in expectation.

Each iteration moves the floating entries along a null direction of the
equality rows that must stay fixed (point sums, integral cluster totals,
integral per-color counts), by one of two step lengths chosen so the move
is unbiased and lands at least one more entry or aggregate on an integer.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..core import Assignment, Instance, is_integral, snap_ceil, snap_floor
from ..errors import SolverError, StructuralError

ZERO_TOL = 1e-9


@dataclass
class RandomRoundingState:
    y: np.ndarray            # (k, n)
    fixed_mask: np.ndarray   # (k, n) bool
    rows: np.ndarray         # active constraint matrix over floating pairs
    row_kinds: list[str]


def _floating(y):
    return (y > ZERO_TOL) & (y < 1 - ZERO_TOL)


def constraint_rows(y: np.ndarray, colors: np.ndarray, H: int):
    """Rows of the reduced equality system over the floating pairs.

    Returns the matrix, a label per row, and the (center, point) index of
    each column.  Rows with no floating pair are dropped, as is a cluster's
    total row when every color with floating pairs in it already has an
    integral count (it is then the sum of those rows).
    """
    k, n = y.shape
    F = _floating(y)
    ci, cj = np.nonzero(F)
    col_of = -np.ones((k, n), dtype=np.int64)
    col_of[ci, cj] = np.arange(ci.size)
    rows, kinds = [], []

    def row(mask):
        r = np.zeros(ci.size)
        r[col_of[mask & F]] = 1.0
        return r

    for j in np.unique(cj):
        m = np.zeros((k, n), dtype=bool)
        m[:, j] = True
        rows.append(row(m))
        kinds.append(f"point_{j}")
    a = y.sum(axis=1)
    onehot = np.eye(H, dtype=bool)[colors]           # (n, H)
    b = y @ onehot.astype(float)
    for i in range(k):
        if not F[i].any():
            continue
        present = [h for h in range(H) if (F[i] & onehot[:, h]).any()]
        b_int = [h for h in present if is_integral(b[i, h], ZERO_TOL)]
        for h in b_int:
            m = np.zeros((k, n), dtype=bool)
            m[i] = onehot[:, h]
            rows.append(row(m))
            kinds.append(f"count_{i}_{h}")
        if is_integral(a[i], ZERO_TOL) and len(b_int) < len(present):
            m = np.zeros((k, n), dtype=bool)
            m[i] = True
            rows.append(row(m))
            kinds.append(f"total_{i}")
    A = np.array(rows) if rows else np.zeros((0, ci.size))
    return A, kinds, np.column_stack([ci, cj])


def null_vector(A: np.ndarray, tol: float = ZERO_TOL) -> np.ndarray:
    """Nonzero r with A r = 0 from the first free column of a row reduction."""
    m, c = A.shape
    if c == 0:
        raise SolverError("no floating columns")
    M = A.astype(float).copy()
    pivots = []
    r = 0
    for col in range(c):
        if r == m:
            break
        p = r + int(np.argmax(np.abs(M[r:, col])))
        if abs(M[p, col]) <= tol:
            continue
        M[[r, p]] = M[[p, r]]
        M[r] /= M[r, col]
        others = np.arange(m) != r
        M[others] -= np.outer(M[others, col], M[r])
        pivots.append(col)
        r += 1
    free = [col for col in range(c) if col not in set(pivots)]
    if not free:
        raise SolverError("reduced system has full column rank")
    f = free[0]
    vec = np.zeros(c)
    vec[f] = 1.0
    for row, pc in enumerate(pivots):
        vec[pc] = -M[row, f]
    if np.abs(A @ vec).max(initial=0.0) > 1e-7:
        raise SolverError("null vector failed the residual check")
    return vec


def _max_step(values, direction, lo, hi):
    """Largest u >= 0 keeping lo <= values + u * direction <= hi."""
    u = np.inf
    up, down = direction > ZERO_TOL, direction < -ZERO_TOL
    if up.any():
        u = min(u, float(np.min((hi[up] - values[up]) / direction[up])))
    if down.any():
        u = min(u, float(np.min((lo[down] - values[down]) / direction[down])))
    return u


def randomized_round(x: Assignment, instance: Instance, S=None, rng_seed: int = 0,
                     on_step: Callable[[int, np.ndarray, np.ndarray], None] | None = None
                     ) -> Assignment:
    """Round ``x`` so that E[result] = x while cluster totals and per-color
    counts end up within floor/ceiling of their fractional values.

    ``on_step(t, y_before, y_after)`` is called after every iteration.
    """
    if S is not None and tuple(S) != x.centers:
        raise StructuralError("S does not match the assignment's centers")
    rng = np.random.default_rng(rng_seed)
    y = x.weights.copy()
    y[y <= ZERO_TOL] = 0.0
    y[y >= 1 - ZERO_TOL] = 1.0
    k, n = y.shape
    H = instance.n_colors
    colors = instance.colors
    onehot = instance.color_onehot
    cap = n * k + k * (H + 1)
    t = 0
    while _floating(y).any():
        t += 1
        if t > cap:
            raise SolverError("randomized rounding exceeded its iteration bound")
        A, _, cols = constraint_rows(y, colors, H)
        rvec = null_vector(A)
        R = np.zeros((k, n))
        R[cols[:, 0], cols[:, 1]] = rvec

        vals = y[cols[:, 0], cols[:, 1]]
        a, b = y.sum(axis=1), (y @ onehot).ravel()
        da, db = R.sum(axis=1), (R @ onehot).ravel()
        agg = np.r_[a, b]
        dagg = np.r_[da, db]
        loose = ~is_integral(agg, ZERO_TOL)
        lo_agg, hi_agg = snap_floor(agg).astype(float), snap_ceil(agg).astype(float)

        def step(sign):
            u = _max_step(vals, sign * rvec, np.zeros_like(vals), np.ones_like(vals))
            if loose.any():
                u = min(u, _max_step(agg[loose], sign * dagg[loose], lo_agg[loose], hi_agg[loose]))
            return u

        u1, u2 = step(1.0), step(-1.0)
        if not (0 < u1 < np.inf and 0 < u2 < np.inf):
            raise SolverError(f"degenerate step sizes u1={u1}, u2={u2}")
        before = y.copy()
        if rng.random() < u2 / (u1 + u2):
            y = y + u1 * R
        else:
            y = y - u2 * R
        y[np.abs(y) <= ZERO_TOL] = 0.0
        y[np.abs(y - 1) <= ZERO_TOL] = 1.0
        if on_step is not None:
            on_step(t, before, y.copy())
    return Assignment(x.centers, y)
