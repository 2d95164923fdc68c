"""Domain model: instances, assignments, costs, proportional violations.

Distances are only ever needed between a handful of centers and all points,
so :class:`Instance` hands out row blocks of the metric instead of insisting
on a full ``n x n`` matrix.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import StructuralError

#: absolute tolerance for proportion / integrality comparisons
TOL = 1e-9
#: masses at or below this are treated as empty clusters
MASS_TOL = 1e-9
#: full distance matrices are cached up to this many points
DENSE_LIMIT = 5000

VALID_P = (1.0, 2.0, math.inf)


class Objective(str, enum.Enum):
    UTILITARIAN = "utilitarian"
    EGALITARIAN = "egalitarian"
    LEXIMIN = "leximin"

    @classmethod
    def parse(cls, value: "str | Objective") -> "Objective":
        if isinstance(value, Objective):
            return value
        aliases = {"util": cls.UTILITARIAN, "egal": cls.EGALITARIAN, "lex": cls.LEXIMIN}
        key = str(value).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise StructuralError(f"unknown objective {value!r}") from None


def parse_p(p) -> float:
    """Accept 1, 2, inf or the names median / means / center."""
    names = {"median": 1.0, "means": 2.0, "center": math.inf, "inf": math.inf}
    if isinstance(p, str):
        if p.lower() in names:
            return names[p.lower()]
        p = float(p)
    p = float(p)
    if p not in VALID_P:
        raise StructuralError(f"p must be one of 1, 2, inf; got {p}")
    return p


def snap_floor(x, tol: float = TOL):
    """Floor that treats values within ``tol`` of an integer as that integer."""
    x = np.asarray(x, dtype=float)
    r = np.rint(x)
    return np.where(np.abs(x - r) <= tol, r, np.floor(x)).astype(np.int64)


def snap_ceil(x, tol: float = TOL):
    x = np.asarray(x, dtype=float)
    r = np.rint(x)
    return np.where(np.abs(x - r) <= tol, r, np.ceil(x)).astype(np.int64)


def is_integral(x, tol: float = TOL):
    x = np.asarray(x, dtype=float)
    return np.abs(x - np.rint(x)) <= tol


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Instance:
    """Colored points with a metric, an objective exponent and per-color bounds.

    Exactly one of ``points`` (Euclidean distances) or ``distance_matrix``
    must be supplied.  Colors are dense integer ids ``0..H-1``.
    """

    colors: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    p: float = 2.0
    points: np.ndarray | None = None
    distance_matrix: np.ndarray | None = None
    color_names: tuple[str, ...] | None = None

    def __post_init__(self):
        colors = np.asarray(self.colors)
        if colors.ndim != 1 or colors.size == 0:
            raise StructuralError("colors must be a non-empty 1-d array")
        if not np.issubdtype(colors.dtype, np.integer):
            if not np.all(np.equal(np.mod(colors, 1), 0)):
                raise StructuralError("colors must be integer ids")
        colors = colors.astype(np.int64)
        alpha = np.asarray(self.alpha, dtype=float).ravel()
        beta = np.asarray(self.beta, dtype=float).ravel()
        if alpha.shape != beta.shape:
            raise StructuralError("alpha and beta must have one entry per color")
        H = alpha.size
        if colors.min() < 0 or colors.max() >= H:
            raise StructuralError(f"color ids must lie in 0..{H - 1}")
        if np.any(beta <= 0) or np.any(beta > alpha + TOL) or np.any(alpha >= 1):
            raise StructuralError("bounds must satisfy 0 < beta_h <= alpha_h < 1")
        object.__setattr__(self, "p", parse_p(self.p))

        n = colors.size
        if (self.points is None) == (self.distance_matrix is None):
            raise StructuralError("give exactly one of points or distance_matrix")
        if self.points is not None:
            pts = np.asarray(self.points, dtype=float)
            if pts.ndim == 1:
                pts = pts[:, None]
            if pts.shape[0] != n:
                raise StructuralError("points and colors disagree on n")
            if not np.all(np.isfinite(pts)):
                raise StructuralError("points must be finite")
            object.__setattr__(self, "points", _frozen(pts))
        else:
            D = np.asarray(self.distance_matrix, dtype=float)
            if D.shape != (n, n):
                raise StructuralError("distance_matrix must be n x n")
            if np.any(D < 0) or np.any(np.abs(np.diag(D)) > 0):
                raise StructuralError("distances must be non-negative with zero diagonal")
            if not np.allclose(D, D.T, rtol=0, atol=1e-12):
                raise StructuralError("distance_matrix must be symmetric")
            object.__setattr__(self, "distance_matrix", _frozen(D))
        if self.color_names is not None and len(self.color_names) != H:
            raise StructuralError("color_names needs one entry per color")
        object.__setattr__(self, "colors", _frozen(colors))
        object.__setattr__(self, "alpha", _frozen(alpha))
        object.__setattr__(self, "beta", _frozen(beta))

    @classmethod
    def from_points(cls, points, colors, p=2.0, alpha=None, beta=None, delta=None,
                    color_names=None) -> "Instance":
        """Build an instance; either give ``alpha``/``beta`` or a slack ``delta``
        around the population proportions."""
        colors = np.asarray(colors)
        if delta is not None:
            alpha, beta = proportional_bounds(colors, delta)
        return cls(colors=colors, alpha=alpha, beta=beta, p=p, points=points,
                   color_names=color_names)

    @property
    def n(self) -> int:
        return int(self.colors.size)

    @property
    def n_colors(self) -> int:
        return int(self.alpha.size)

    @cached_property
    def color_onehot(self) -> np.ndarray:
        onehot = np.zeros((self.n, self.n_colors))
        onehot[np.arange(self.n), self.colors] = 1.0
        onehot.flags.writeable = False
        return onehot

    @cached_property
    def proportions(self) -> np.ndarray:
        return np.bincount(self.colors, minlength=self.n_colors) / self.n

    @cached_property
    def _dense(self) -> np.ndarray | None:
        if self.distance_matrix is not None:
            return self.distance_matrix
        if self.n <= DENSE_LIMIT:
            D = _euclidean_rows(self.points, self.points)
            np.fill_diagonal(D, 0.0)
            D = np.maximum(D, D.T)
            D.flags.writeable = False
            return D
        return None

    def distances(self, rows: Sequence[int] | np.ndarray) -> np.ndarray:
        """Distances from each point in ``rows`` to every point, shape (len(rows), n)."""
        rows = np.asarray(rows, dtype=np.int64)
        if self._dense is not None:
            return self._dense[rows]
        return _euclidean_rows(self.points[rows], self.points)

    def with_p(self, p) -> "Instance":
        return Instance(colors=self.colors, alpha=self.alpha, beta=self.beta, p=p,
                        points=self.points, distance_matrix=self.distance_matrix,
                        color_names=self.color_names)

    def subset(self, idx) -> "Instance":
        """Restrict to the given point indices, keeping bounds unchanged."""
        idx = np.asarray(idx, dtype=np.int64)
        if self.points is not None:
            return Instance(colors=self.colors[idx], alpha=self.alpha, beta=self.beta,
                            p=self.p, points=self.points[idx], color_names=self.color_names)
        return Instance(colors=self.colors[idx], alpha=self.alpha, beta=self.beta, p=self.p,
                        distance_matrix=self.distance_matrix[np.ix_(idx, idx)],
                        color_names=self.color_names)


def _euclidean_rows(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # exact differences rather than the |a|^2 - 2ab + |b|^2 expansion, which
    # loses integrality on lattice fixtures
    out = np.empty((A.shape[0], B.shape[0]))
    for s in range(0, A.shape[0], 256):
        diff = A[s:s + 256, None, :] - B[None, :, :]
        out[s:s + 256] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return out


def proportional_bounds(colors, delta: float, names=None):
    """alpha_h = (1+delta) r_h, beta_h = (1-delta) r_h from dataset proportions.

    alpha is capped just below 1 so the instance invariant alpha_h < 1 holds
    for a dominant color.
    """
    if not 0 <= delta < 1:
        raise StructuralError("delta must lie in [0, 1)")
    colors = np.asarray(colors, dtype=np.int64)
    H = int(colors.max()) + 1
    r = np.bincount(colors, minlength=H) / colors.size
    if np.any(r == 0):
        raise StructuralError("every color id must occur at least once")
    alpha = np.minimum((1 + delta) * r, 1 - 1e-12)
    beta = (1 - delta) * r
    return alpha, beta


@dataclass(frozen=True, eq=False)
class Assignment:
    """Weights ``x[i, j]`` of point ``j`` on the ``i``-th center of ``centers``."""

    centers: tuple[int, ...]
    weights: np.ndarray

    def __post_init__(self):
        centers = tuple(int(c) for c in self.centers)
        W = np.asarray(self.weights, dtype=float)
        if len(centers) == 0:
            raise StructuralError("an assignment needs at least one center")
        if W.ndim != 2 or W.shape[0] != len(centers):
            raise StructuralError("weights must have one row per center")
        if np.any(W < -1e-7) or np.any(W > 1 + 1e-7):
            raise StructuralError("weights must lie in [0, 1]")
        if not np.allclose(W.sum(axis=0), 1.0, rtol=0, atol=1e-7):
            raise StructuralError("every point's weights must sum to 1")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "weights", _frozen(np.clip(W, 0.0, 1.0)))

    @classmethod
    def from_labels(cls, centers: Sequence[int], labels: Iterable[int]) -> "Assignment":
        """Integral assignment; ``labels[j]`` is the position of j's center in ``centers``."""
        labels = np.asarray(list(labels), dtype=np.int64)
        k = len(centers)
        if labels.size and (labels.min() < 0 or labels.max() >= k):
            raise StructuralError("labels must index into centers")
        W = np.zeros((k, labels.size))
        W[labels, np.arange(labels.size)] = 1.0
        return cls(tuple(centers), W)

    @property
    def k(self) -> int:
        return len(self.centers)

    @property
    def n(self) -> int:
        return int(self.weights.shape[1])

    @cached_property
    def integral(self) -> bool:
        W = self.weights
        return bool(np.all((W == 0.0) | (W == 1.0)))

    @property
    def labels(self) -> np.ndarray:
        if not self.integral:
            raise StructuralError("labels are only defined for integral assignments")
        return np.argmax(self.weights, axis=0)

    @property
    def masses(self) -> np.ndarray:
        return self.weights.sum(axis=1)


@dataclass(frozen=True)
class ViolationVector:
    """Per-color worst proportional violation."""

    delta: tuple[float, ...]

    def __post_init__(self):
        d = tuple(float(v) for v in self.delta)
        if any(not (-TOL <= v <= 1 + TOL) for v in d):
            raise StructuralError("violations must lie in [0, 1]")
        object.__setattr__(self, "delta", tuple(min(max(v, 0.0), 1.0) for v in d))

    def __len__(self):
        return len(self.delta)

    def __iter__(self):
        return iter(self.delta)

    def __getitem__(self, h):
        return self.delta[h]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.delta, dtype=float)

    @property
    def utilitarian(self) -> float:
        return float(sum(self.delta))

    @property
    def egalitarian(self) -> float:
        return float(max(self.delta))

    def leximin_key(self) -> tuple[float, ...]:
        return tuple(sorted(self.delta, reverse=True))


@dataclass(frozen=True)
class ClusterStats:
    sizes: np.ndarray
    color_counts: np.ndarray
    min_nonempty_size: float


def _check_dims(assignment: Assignment, instance: Instance):
    if assignment.n != instance.n:
        raise StructuralError(
            f"assignment covers {assignment.n} points, instance has {instance.n}")
    if max(assignment.centers) >= instance.n or min(assignment.centers) < 0:
        raise StructuralError("center index out of range")


def clustering_cost(assignment: Assignment, instance: Instance) -> float:
    """(sum d^p x)^(1/p), or the largest distance carrying weight when p = inf."""
    _check_dims(assignment, instance)
    D = instance.distances(assignment.centers)
    W = assignment.weights
    if instance.p == math.inf:
        used = W > TOL
        return float(D[used].max()) if used.any() else 0.0
    total = float(np.sum(D ** instance.p * W))
    return total ** (1.0 / instance.p)


def cluster_stats(assignment: Assignment, instance: Instance) -> ClusterStats:
    _check_dims(assignment, instance)
    sizes = assignment.masses
    counts = assignment.weights @ instance.color_onehot
    nonempty = sizes > MASS_TOL
    smallest = float(sizes[nonempty].min()) if nonempty.any() else 0.0
    return ClusterStats(sizes=sizes, color_counts=counts, min_nonempty_size=smallest)


def per_cluster_violations(assignment: Assignment, instance: Instance) -> np.ndarray:
    """(k, H) matrix of each cluster's violation; empty clusters get 0."""
    stats = cluster_stats(assignment, instance)
    nonempty = stats.sizes > MASS_TOL
    out = np.zeros_like(stats.color_counts)
    if nonempty.any():
        share = stats.color_counts[nonempty] / stats.sizes[nonempty, None]
        over = share - instance.alpha[None, :]
        under = instance.beta[None, :] - share
        out[nonempty] = np.maximum(0.0, np.maximum(over, under))
    return np.clip(out, 0.0, 1.0)


def compute_violations(assignment: Assignment, instance: Instance) -> ViolationVector:
    """Smallest per-color slack that puts every non-empty cluster inside its bounds."""
    per = per_cluster_violations(assignment, instance)
    return ViolationVector(tuple(per.max(axis=0)))


def objective_value(v: ViolationVector | Sequence[float], kind) -> float:
    """Utilitarian sum or egalitarian max.  Leximin reports its worst entry."""
    kind = Objective.parse(kind)
    d = [float(x) for x in v]
    if kind is Objective.UTILITARIAN:
        return float(sum(d))
    return float(max(d))


def min_cluster_size(assignment: Assignment) -> int:
    masses = assignment.masses
    if assignment.integral:
        sizes = np.rint(masses).astype(np.int64)
        sizes = sizes[sizes > 0]
    else:
        big = masses >= 1 - TOL
        sizes = snap_ceil(masses[big])
    if sizes.size == 0:
        raise StructuralError("assignment has no non-empty cluster")
    return int(sizes.min())


def pof(fair_cost: float, colorblind_cost: float) -> float:
    if colorblind_cost <= 0:
        raise StructuralError("color-blind cost must be positive")
    return float(fair_cost) / float(colorblind_cost)


def nearest_assignment(instance: Instance, centers: Sequence[int]) -> Assignment:
    """Send every point to its closest center, ties to the lowest center position."""
    D = instance.distances(centers)
    return Assignment.from_labels(tuple(centers), np.argmin(D, axis=0))
