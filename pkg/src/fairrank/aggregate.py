"""Fair rank aggregation under the q-mean objective.

``meta1`` snaps every input to its closest fair ranking and keeps the best
candidate; ``meta2`` aggregates first and snaps the aggregate. With exact
sub-solvers both are 3-approximations for any metric and any q >= 1.
``ulam_fair_median`` additionally tries a precedence-graph candidate for
the Ulam median and keeps the better of the two.
"""

from __future__ import annotations

import functools
import heapq
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from fairrank.core import FairnessSpec, GroupAssignment, Ranking, ValidationError, ceil_mul
from fairrank.metrics import Metric, distance

CfrSolver = Callable  # (pi, groups, fairness) -> CfrResult
Aggregator = Callable  # (rankings) -> Ranking


@dataclass(frozen=True)
class QExponent:
    """Aggregation exponent: a positive integer, or ``None`` for infinity."""

    value: int | None

    def __post_init__(self):
        if self.value is not None and (isinstance(self.value, bool) or int(self.value) != self.value or self.value < 1):
            raise ValidationError(f"q must be a positive integer or inf, got {self.value!r}")

    @classmethod
    def parse(cls, q) -> QExponent:
        if isinstance(q, QExponent):
            return q
        if isinstance(q, str):
            text = q.strip().lower()
            if text in ("inf", "infinity", "∞"):
                return cls(None)
            try:
                return cls(int(text))
            except ValueError:
                raise ValidationError(f"q must be a positive integer or inf, got {q!r}") from None
        if isinstance(q, float):
            if math.isinf(q) and q > 0:
                return cls(None)
            if q.is_integer():
                return cls(int(q))
            raise ValidationError(f"q must be a positive integer or inf, got {q!r}")
        return cls(q)

    @property
    def is_inf(self) -> bool:
        return self.value is None

    def __str__(self) -> str:
        return "inf" if self.value is None else str(self.value)


@dataclass(frozen=True, order=True)
class ObjectiveValue:
    """Exact surrogate of the q-mean objective.

    ``total`` is ``sum(rho**q)`` for finite q and ``max(rho)`` for q = inf;
    both order candidates exactly like the real objective does.
    """

    total: int
    q: QExponent = field(compare=False)

    @property
    def value(self) -> float:
        if self.q.is_inf:
            return float(self.total)
        return float(self.total) ** (1.0 / self.q.value)

    def at_most(self, factor, other: ObjectiveValue) -> bool:
        """``self <= factor * other`` evaluated exactly."""
        factor = Fraction(factor)
        if self.q.is_inf:
            return self.total <= factor * other.total
        return self.total <= factor**self.q.value * other.total

    def ratio(self, other: ObjectiveValue) -> float:
        if other.total == 0:
            return 1.0 if self.total == 0 else math.inf
        if self.q.is_inf:
            return self.total / other.total
        return (Fraction(self.total, other.total)) ** (1.0 / self.q.value)


def objective(S: Sequence[Ranking], sigma: Ranking, metric: Metric, q) -> ObjectiveValue:
    q = QExponent.parse(q)
    dists = [distance(metric, pi, sigma) for pi in S]
    if q.is_inf:
        return ObjectiveValue(max(dists), q)
    return ObjectiveValue(sum(x**q.value for x in dists), q)


def _map(fn, items, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def default_cfr(metric: Metric) -> CfrSolver:
    from fairrank.cfr import closest_fair_ranking

    return functools.partial(closest_fair_ranking, metric=Metric(metric))


def _solve(cfr, groups, fairness, pi):
    return cfr(pi, groups, fairness).ranking


def _score(S, metric, q, sigma):
    return objective(S, sigma, metric, q)


def best_candidate(S, candidates, metric, q, jobs: int = 1) -> tuple[int, ObjectiveValue]:
    """Index and objective of the best candidate; ties go to the lowest index."""
    scores = _map(functools.partial(_score, tuple(S), Metric(metric), QExponent.parse(q)), list(candidates), jobs)
    best = min(range(len(scores)), key=lambda i: (scores[i], i))
    return best, scores[best]


def meta1(
    S: Sequence[Ranking],
    groups: GroupAssignment,
    fairness: FairnessSpec,
    metric: Metric,
    q,
    cfr: CfrSolver | None = None,
    jobs: int = 1,
) -> Ranking:
    """Best of the closest fair rankings of the inputs.

    ``cfr`` defaults to the exact solver for the metric and mode. ``jobs``
    spreads the solver calls and objective evaluations over processes; the
    result does not depend on it.
    """
    if not S:
        raise ValidationError("need at least one input ranking")
    cfr = default_cfr(metric) if cfr is None else cfr
    candidates = _map(functools.partial(_solve, cfr, groups, fairness), list(S), jobs)
    best, _ = best_candidate(S, candidates, metric, q, jobs)
    return candidates[best]


def meta2(
    S: Sequence[Ranking],
    groups: GroupAssignment,
    fairness: FairnessSpec,
    metric: Metric,
    q,
    agg: Aggregator | None = None,
    cfr: CfrSolver | None = None,
) -> Ranking:
    """Closest fair ranking to an (unfair) aggregate of the inputs.

    ``agg`` defaults to :func:`spearman_median` for the footrule with q = 1
    and to exhaustive search otherwise.
    """
    if not S:
        raise ValidationError("need at least one input ranking")
    metric = Metric(metric)
    q = QExponent.parse(q)
    if agg is None:
        if metric is Metric.SPEARMAN_FOOTRULE and q.value == 1:
            agg = spearman_median
        else:
            from fairrank.oracle import oracle_aggregate

            agg = functools.partial(oracle_aggregate, metric=metric, q=q)
    cfr = default_cfr(metric) if cfr is None else cfr
    return cfr(agg(S), groups, fairness).ranking


# --- footrule median by assignment ---------------------------------------------


def min_cost_assignment(cost) -> list[int]:
    """Column assigned to each row of a square integer cost matrix.

    Successive shortest augmenting paths with Dijkstra-style label updates
    and vertex potentials (the dense O(n^3) form of the Hungarian method).
    """
    a = [list(map(int, row)) for row in cost]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValidationError("cost matrix must be square")
    INF = float("inf")
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    match = [0] * (n + 1)  # match[col] = row, 1-based, 0 = free
    way = [0] * (n + 1)
    for row in range(1, n + 1):
        match[0] = row
        col0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[col0] = True
            r = match[col0]
            delta = INF
            col1 = 0
            ar = a[r - 1]
            ur = u[r]
            for col in range(1, n + 1):
                if not used[col]:
                    cur = ar[col - 1] - ur - v[col]
                    if cur < minv[col]:
                        minv[col] = cur
                        way[col] = col0
                    if minv[col] < delta:
                        delta = minv[col]
                        col1 = col
            for col in range(n + 1):
                if used[col]:
                    u[match[col]] += delta
                    v[col] -= delta
                else:
                    minv[col] -= delta
            col0 = col1
            if match[col0] == 0:
                break
        while col0:
            col1 = way[col0]
            match[col0] = match[col1]
            col0 = col1
    assignment = [0] * n
    for col in range(1, n + 1):
        assignment[match[col] - 1] = col - 1
    return assignment


def footrule_costs(S: Sequence[Ranking]) -> np.ndarray:
    """``cost[e, p] = sum over inputs of |rank(e) - p|``."""
    d = S[0].d
    ranks = np.array([pi.inv for pi in S], dtype=np.int64)  # (n, d)
    positions = np.arange(d, dtype=np.int64)
    return np.abs(ranks[:, :, None] - positions[None, None, :]).sum(axis=0)


def spearman_median(S: Sequence[Ranking]) -> Ranking:
    """Exact footrule median (q = 1, no fairness) via min-cost matching."""
    if not S:
        raise ValidationError("need at least one input ranking")
    d = S[0].d
    if any(pi.d != d for pi in S):
        raise ValidationError("rankings of different dimensions")
    position_of = min_cost_assignment(footrule_costs(S))
    perm = [0] * d
    for e, p in enumerate(position_of):
        perm[p] = e
    return Ranking(tuple(perm))


# --- precedence graph and the relative order candidate ---------------------------


@dataclass
class PrecedenceGraph:
    """Directed graph with an edge ``a -> b`` when ``a`` precedes ``b`` in
    at least ``threshold`` of the input rankings."""

    vertices: set[int]
    succ: dict[int, set[int]]
    pred: dict[int, set[int]]
    threshold: int

    @classmethod
    def build(cls, S: Sequence[Ranking], alpha_param: Fraction = Fraction(1, 10)) -> PrecedenceGraph:
        alpha_param = Fraction(alpha_param)
        if not 0 <= alpha_param <= Fraction(1, 10):
            raise ValidationError("alpha_param must lie in [0, 1/10]")
        n = len(S)
        d = S[0].d
        threshold = ceil_mul(1 - 2 * alpha_param, n)
        votes = np.zeros((d, d), dtype=np.int64)
        for pi in S:
            r = np.asarray(pi.inv)
            votes += r[:, None] < r[None, :]
        succ = {v: set() for v in range(d)}
        pred = {v: set() for v in range(d)}
        for a, b in zip(*np.nonzero(votes >= threshold)):
            a, b = int(a), int(b)
            succ[a].add(b)
            pred[b].add(a)
        return cls(set(range(d)), succ, pred, threshold)

    def remove(self, vs) -> None:
        for v in vs:
            self.vertices.discard(v)
            for w in self.succ.pop(v, ()):
                self.pred[w].discard(v)
            for w in self.pred.pop(v, ()):
                self.succ[w].discard(v)

    def shortest_cycle_through(self, v: int) -> list[int] | None:
        """BFS over out-edges from ``v``; neighbours visited by increasing id."""
        parent = {v: None}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for w in sorted(self.succ[u]):
                if w == v:
                    cycle = [u]
                    while parent[cycle[-1]] is not None:
                        cycle.append(parent[cycle[-1]])
                    return cycle[::-1]
                if w not in parent:
                    parent[w] = u
                    queue.append(w)
        return None

    def break_cycles(self) -> list[list[int]]:
        """Delete a shortest cycle through each vertex, in increasing id."""
        removed = []
        for v in sorted(self.vertices):
            if v not in self.vertices:
                continue
            cycle = self.shortest_cycle_through(v)
            if cycle:
                self.remove(cycle)
                removed.append(cycle)
        return removed

    def topological_order(self) -> list[int]:
        """Kahn's algorithm, smallest id first; raises if a cycle remains."""
        indeg = {v: len(self.pred[v]) for v in self.vertices}
        heap = [v for v, k in indeg.items() if k == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            v = heapq.heappop(heap)
            order.append(v)
            for w in self.succ[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(heap, w)
        if len(order) != len(self.vertices):
            raise ValueError("precedence graph still has a cycle")
        return order


def relative_order_sequence(S: Sequence[Ranking], alpha_param: Fraction = Fraction(1, 10)) -> list[int]:
    """Topological order of the cycle-free near-unanimous precedence graph."""
    graph = PrecedenceGraph.build(S, alpha_param)
    graph.break_cycles()
    return graph.topological_order()


def relative_order_candidate(
    S: Sequence[Ranking],
    groups: GroupAssignment,
    fairness: FairnessSpec,
    alpha_param: Fraction = Fraction(1, 10),
) -> Ranking:
    """Fair ranking with the longest LCS against the precedence order."""
    from fairrank.cfr import cfr_ulam

    return cfr_ulam(relative_order_sequence(S, alpha_param), groups, fairness).ranking


def ulam_median_candidates(
    S: Sequence[Ranking],
    groups: GroupAssignment,
    fairness: FairnessSpec,
    jobs: int = 1,
) -> tuple[Ranking, Ranking]:
    """The meta1 candidate and the relative order candidate."""
    from fairrank.cfr import cfr_ulam

    first = meta1(S, groups, fairness, Metric.ULAM, 1, cfr=cfr_ulam, jobs=jobs)
    second = relative_order_candidate(S, groups, fairness, Fraction(1, 10))
    return first, second


def ulam_fair_median(
    S: Sequence[Ranking],
    groups: GroupAssignment,
    fairness: FairnessSpec,
    jobs: int = 1,
) -> Ranking:
    """Better of the two candidates under the Ulam median objective."""
    first, second = ulam_median_candidates(S, groups, fairness, jobs)
    if objective(S, second, Metric.ULAM, 1) < objective(S, first, Metric.ULAM, 1):
        return second
    return first
