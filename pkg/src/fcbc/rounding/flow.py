"""Deterministic rounding of fractional assignments through min-cost flow.

Network per center i: one node per color collecting that color's points, a
main node collecting the colors, then a common sink.  Node balances are the
floors of the fractional per-color and per-cluster masses, so any integral
flow lands every count between the floor and the ceiling of its fractional
value.  Point arcs exist only where the fractional weight is positive.
"""
from __future__ import annotations

import heapq
import io
import math
from dataclasses import dataclass

import numpy as np

from ..core import (Assignment, Instance, compute_violations, min_cluster_size,
                    snap_ceil, snap_floor)
from ..errors import PropertyViolation, StructuralError

#: fractional weights at or below this are treated as zero
ARC_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FlowNetwork:
    n_points: int
    k: int
    n_colors: int
    balances: np.ndarray   # int64, positive = supply
    tail: np.ndarray
    head: np.ndarray
    cost: np.ndarray
    cap: np.ndarray        # int64
    pair: np.ndarray       # (m, 2) center position and point for point arcs, -1 otherwise
    centers: tuple[int, ...] = ()

    @property
    def n_nodes(self) -> int:
        return int(self.balances.size)

    def color_node(self, i: int, h: int) -> int:
        return self.n_points + i * (self.n_colors + 1) + h

    def main_node(self, i: int) -> int:
        return self.n_points + i * (self.n_colors + 1) + self.n_colors

    @property
    def sink(self) -> int:
        return self.n_nodes - 1

    def node_name(self, v: int) -> str:
        if v < self.n_points:
            return f"v_{v}"
        if v == self.sink:
            return "t"
        i, h = divmod(v - self.n_points, self.n_colors + 1)
        return f"v_{i}^0" if h == self.n_colors else f"v_{i}^{h}"

    def flow_from_assignment(self, weights: np.ndarray) -> np.ndarray:
        """Arc flows induced by a (k, n) weight matrix (fractional in general)."""
        W = np.asarray(weights, dtype=float)
        flow = np.zeros(self.tail.size)
        pt = self.pair[:, 0] >= 0
        flow[pt] = W[self.pair[pt, 0], self.pair[pt, 1]]
        inflow = np.zeros(self.n_nodes)
        np.add.at(inflow, self.head[pt], flow[pt])
        demand = -self.balances.astype(float)
        # color -> main arcs carry whatever exceeds the color node's demand,
        # then main -> sink the excess over the main node's demand
        for e in np.flatnonzero(~pt):
            u = self.tail[e]
            if u != self.sink and self.head[e] != self.sink:
                flow[e] = inflow[u] - demand[u]
                inflow[self.head[e]] += flow[e]
        for e in np.flatnonzero(self.head == self.sink):
            u = self.tail[e]
            flow[e] = inflow[u] - demand[u]
        return flow

    def conservation_gap(self, flow: np.ndarray) -> float:
        net = self.balances.astype(float).copy()
        np.add.at(net, self.tail, -flow)
        np.add.at(net, self.head, flow)
        return float(np.abs(net).max())

    def dump(self, stream=None) -> str:
        """Plain-text edge list: balance header then ``tail head cost capacity``."""
        out = stream if stream is not None else io.StringIO()
        out.write(f"# nodes {self.n_nodes} arcs {self.tail.size}\n")
        for v, b in enumerate(self.balances):
            out.write(f"# balance {v} {self.node_name(v)} {int(b)}\n")
        for u, v, c, cap in zip(self.tail, self.head, self.cost, self.cap):
            out.write(f"{u} {v} {c:.17g} {cap}\n")
        return out.getvalue() if stream is None else ""


def _clean(weights: np.ndarray) -> np.ndarray:
    W = np.where(np.asarray(weights, dtype=float) > ARC_TOL, weights, 0.0)
    return W / W.sum(axis=0, keepdims=True)


def build_flow_network(x: Assignment, instance: Instance, S=None) -> FlowNetwork:
    if S is not None and tuple(S) != x.centers:
        raise StructuralError("S does not match the assignment's centers")
    if x.n != instance.n:
        raise StructuralError("assignment and instance disagree on n")
    W = _clean(x.weights)
    k, n, H = x.k, x.n, instance.n_colors
    masses = W.sum(axis=1)
    color_mass = W @ instance.color_onehot                  # (k, H)
    a_lo, a_hi = snap_floor(masses), snap_ceil(masses)
    b_lo, b_hi = snap_floor(color_mass), snap_ceil(color_mass)

    net_n = n + k * (H + 1) + 1
    bal = np.zeros(net_n, dtype=np.int64)
    bal[:n] = 1
    base = n + np.arange(k) * (H + 1)
    for i in range(k):
        bal[base[i]:base[i] + H] = -b_lo[i]
        bal[base[i] + H] = -(a_lo[i] - b_lo[i].sum())
    bal[-1] = -(n - a_lo.sum())

    D = instance.distances(x.centers)
    cost_mat = D if instance.p == math.inf else D ** instance.p
    ii, jj = np.nonzero(W)
    tails = [jj]
    heads = [base[ii] + instance.colors[jj]]
    costs = [cost_mat[ii, jj]]
    caps = [np.ones(ii.size, dtype=np.int64)]
    pairs = [np.column_stack([ii, jj])]
    for i in range(k):
        hs = np.arange(H)
        tails.append(base[i] + hs)
        heads.append(np.full(H, base[i] + H))
        costs.append(np.zeros(H))
        caps.append(b_hi[i] - b_lo[i])
        pairs.append(np.full((H, 2), -1))
    tails.append(base + H)
    heads.append(np.full(k, net_n - 1))
    costs.append(np.zeros(k))
    caps.append(a_hi - a_lo)
    pairs.append(np.full((k, 2), -1))
    return FlowNetwork(
        n_points=n, k=k, n_colors=H, balances=bal,
        tail=np.concatenate(tails).astype(np.int64), head=np.concatenate(heads).astype(np.int64),
        cost=np.concatenate(costs).astype(float), cap=np.concatenate(caps).astype(np.int64),
        pair=np.concatenate(pairs).astype(np.int64), centers=x.centers)


@dataclass(frozen=True, eq=False)
class FlowResult:
    flow: np.ndarray   # int64 per arc
    cost: float


class _Residual:
    def __init__(self, n_nodes):
        self.adj = [[] for _ in range(n_nodes)]
        self.to, self.cap, self.cost = [], [], []

    def add(self, u, v, cap, cost):
        e = len(self.to)
        self.to += [v, u]
        self.cap += [cap, 0]
        self.cost += [cost, -cost]
        self.adj[u].append(e)
        self.adj[v].append(e + 1)
        return e


def solve_mcmf(network: FlowNetwork) -> FlowResult:
    """Successive shortest paths with Dijkstra on reduced costs.

    Supply nodes whose single outgoing arc must carry their whole supply are
    pushed up front; only the remainder goes through the path search.
    """
    bal = network.balances.astype(np.int64)
    if bal.sum() != 0:
        raise StructuralError("balances do not sum to zero")
    if np.any(network.cost < 0):
        raise StructuralError("arc costs must be non-negative")
    m = network.tail.size
    flow = np.zeros(m, dtype=np.int64)
    excess = bal.copy()
    out_deg = np.bincount(network.tail, minlength=network.n_nodes)
    for e in range(m):
        u = network.tail[e]
        if excess[u] > 0 and out_deg[u] == 1 and network.cap[e] >= excess[u]:
            flow[e] = excess[u]
            excess[network.head[e]] += excess[u]
            excess[u] = 0

    N = network.n_nodes
    src, dst = N, N + 1
    R = _Residual(N + 2)
    arc_edge = np.empty(m, dtype=np.int64)
    for e in range(m):
        arc_edge[e] = R.add(int(network.tail[e]), int(network.head[e]),
                            int(network.cap[e] - flow[e]), float(network.cost[e]))
        if flow[e]:
            R.cap[arc_edge[e] + 1] = int(flow[e])
    need = 0
    for v in range(N):
        if excess[v] > 0:
            R.add(src, v, int(excess[v]), 0.0)
            need += int(excess[v])
        elif excess[v] < 0:
            R.add(v, dst, int(-excess[v]), 0.0)

    # pre-pushed flow creates negative reverse arcs out of forced nodes; those
    # nodes have no other exit, so Bellman-Ford once gives valid potentials
    pot = _bellman_ford(R, src, N + 2)
    sent = 0
    while sent < need:
        dist, prev = _dijkstra(R, src, pot, N + 2)
        if dist[dst] == math.inf:
            raise StructuralError("flow network has no feasible flow")
        for v in range(N + 2):
            if dist[v] < math.inf:
                pot[v] += dist[v]
        push, v = need - sent, dst
        while v != src:
            e = prev[v]
            push = min(push, R.cap[e])
            v = R.to[e ^ 1]
        v = dst
        while v != src:
            e = prev[v]
            R.cap[e] -= push
            R.cap[e ^ 1] += push
            v = R.to[e ^ 1]
        sent += push

    out = np.array([network.cap[e] - R.cap[arc_edge[e]] for e in range(m)], dtype=np.int64)
    return FlowResult(out, float(out @ network.cost))


def _bellman_ford(R: _Residual, s: int, N: int):
    pot = [math.inf] * N
    pot[s] = 0.0
    for _ in range(N):
        changed = False
        for u in range(N):
            if pot[u] == math.inf:
                continue
            for e in R.adj[u]:
                if R.cap[e] > 0 and pot[u] + R.cost[e] < pot[R.to[e]] - 1e-12:
                    pot[R.to[e]] = pot[u] + R.cost[e]
                    changed = True
        if not changed:
            break
    return [p if p < math.inf else 0.0 for p in pot]


def _dijkstra(R: _Residual, s: int, pot, N: int):
    dist = [math.inf] * N
    prev = [-1] * N
    dist[s] = 0.0
    heap = [(0.0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for e in R.adj[u]:
            if R.cap[e] <= 0:
                continue
            v = R.to[e]
            # clamp tiny negatives from floating point in reduced costs
            nd = d + max(R.cost[e] + pot[u] - pot[v], 0.0)
            if nd < dist[v] - 1e-15:
                dist[v] = nd
                prev[v] = e
                heapq.heappush(heap, (nd, v))
    return dist, prev


def round_assignment(x: Assignment, instance: Instance, S=None) -> Assignment:
    """Integral assignment with cost at most the fractional one and every
    per-cluster total and per-color count between its floor and ceiling."""
    if x.integral:
        return x
    net = build_flow_network(x, instance, S)
    res = solve_mcmf(net)
    pt = (net.pair[:, 0] >= 0) & (res.flow > 0)
    labels = np.empty(x.n, dtype=np.int64)
    labels[net.pair[pt, 1]] = net.pair[pt, 0]
    return Assignment.from_labels(x.centers, labels)


@dataclass(frozen=True)
class RoundingReport:
    increase: np.ndarray
    bound: float
    L: int

    @property
    def max_increase(self) -> float:
        return float(self.increase.max())


def violation_after_rounding(x_bar: Assignment, x: Assignment, instance: Instance,
                             check: bool = True) -> RoundingReport:
    """Per-color violation increase of ``x_bar`` over ``x`` against ``2 / L``."""
    L = min_cluster_size(x_bar)
    inc = compute_violations(x_bar, instance).as_array() - compute_violations(x, instance).as_array()
    rep = RoundingReport(inc, 2.0 / L, L)
    if check and np.any(inc >= rep.bound):
        raise PropertyViolation(
            f"rounding raised a violation by {rep.max_increase:.6g} >= 2/L = {rep.bound:.6g}")
    return rep


def check_rounding_properties(x_bar: Assignment, x: Assignment, instance: Instance,
                              cost_tol: float = 1e-9):
    """Raise :class:`PropertyViolation` unless cost, cluster totals and
    per-color counts obey the floor/ceiling guarantees."""
    W = x.weights
    D = instance.distances(x.centers)
    C = D if instance.p == math.inf else D ** instance.p
    if instance.p == math.inf:
        frac = float(C[W > ARC_TOL].max())
        got = float(C[x_bar.weights > 0].max())
    else:
        frac, got = float(np.sum(C * W)), float(np.sum(C * x_bar.weights))
    if got > frac + cost_tol * max(1.0, abs(frac)):
        raise PropertyViolation(f"rounded cost {got} exceeds fractional {frac}")
    a, abar = W.sum(axis=1), np.rint(x_bar.masses).astype(np.int64)
    if np.any(abar < snap_floor(a)) or np.any(abar > snap_ceil(a)):
        raise PropertyViolation("cluster size outside floor/ceiling of fractional size")
    b = W @ instance.color_onehot
    bbar = np.rint(x_bar.weights @ instance.color_onehot).astype(np.int64)
    if np.any(bbar < snap_floor(b)) or np.any(bbar > snap_ceil(b)):
        raise PropertyViolation("color count outside floor/ceiling of fractional count")
