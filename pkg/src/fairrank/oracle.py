"""Exhaustive reference solvers for small ``d``.

Everything here enumerates all ``d!`` permutations in lexicographic order,
so ties always resolve to the lexicographically smallest ranking. The
permutation table is vectorised with numpy; the searches themselves do not
share any code with the fast solvers beyond :meth:`FairnessSpec.bounds`.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from fairrank.aggregate import ObjectiveValue, QExponent
from fairrank.cfr import CfrResult
from fairrank.core import FairnessSpec, FairRankError, GroupAssignment, Infeasible, Ranking
from fairrank.metrics import Metric


class BudgetExceeded(FairRankError):
    """Enumeration was asked for more elements than the budget allows."""


@dataclass(frozen=True)
class EnumerationBudget:
    max_d: int = 8

    def check(self, d: int) -> None:
        if d > self.max_d:
            raise BudgetExceeded(f"exhaustive search over {d}! rankings refused (max_d={self.max_d})")


DEFAULT_BUDGET = EnumerationBudget()


@functools.lru_cache(maxsize=16)
def permutation_table(d: int) -> tuple[np.ndarray, np.ndarray]:
    """All permutations of ``range(d)`` (lexicographic) and their inverses."""
    perms = np.array(list(itertools.permutations(range(d))), dtype=np.int16).reshape(-1, d)
    invs = np.empty_like(perms)
    rows = np.arange(len(perms))[:, None]
    invs[rows, perms] = np.arange(d, dtype=np.int16)[None, :]
    perms.setflags(write=False)
    invs.setflags(write=False)
    return perms, invs


def fair_mask(groups: GroupAssignment, fairness: FairnessSpec) -> np.ndarray:
    """Boolean mask over :func:`permutation_table` rows marking fair rankings."""
    d = groups.d
    perms, _ = permutation_table(d)
    labels = np.asarray(groups.group_of)[perms]
    mask = np.ones(len(perms), dtype=bool)
    prefixes = list(fairness.checked_prefixes(d))
    if not prefixes:
        return mask
    cols = np.asarray(prefixes) - 1
    for z in range(groups.g):
        counts = np.cumsum(labels == z, axis=1)[:, cols]
        for c, p in enumerate(prefixes):
            lo, hi = fairness.bounds(p)[z]
            mask &= (counts[:, c] >= lo) & (counts[:, c] <= hi)
    return mask


def _lcs_with_rows(seq: Sequence[int], invs: np.ndarray) -> np.ndarray:
    # LCS(seq, sigma) = LIS of the sigma-positions of seq's elements
    if len(seq) == 0:
        return np.zeros(len(invs), dtype=np.int64)
    x = invs[:, list(seq)].astype(np.int64)
    m = x.shape[1]
    best = np.ones_like(x)
    for j in range(1, m):
        for i in range(j):
            ext = np.where(x[:, i] < x[:, j], best[:, i] + 1, 1)
            np.maximum(best[:, j], ext, out=best[:, j])
    return best.max(axis=1)


def distances_to_all(metric: Metric, pi: Ranking, rows: np.ndarray | None = None) -> np.ndarray:
    """Distance from ``pi`` to every enumerated permutation (or to ``rows``)."""
    metric = Metric(metric)
    d = pi.d
    perms, invs = permutation_table(d)
    if rows is not None:
        invs = invs[rows]
    if metric is Metric.KENDALL_TAU:
        out = np.zeros(len(invs), dtype=np.int64)
        for i in range(d):
            for j in range(i + 1, d):
                out += invs[:, pi.perm[i]] > invs[:, pi.perm[j]]
        return out
    if metric is Metric.SPEARMAN_FOOTRULE:
        return np.abs(invs.astype(np.int64) - np.asarray(pi.inv)[None, :]).sum(axis=1)
    return d - _lcs_with_rows(pi.perm, invs)


def _fair_rows(groups, fairness, budget) -> np.ndarray:
    budget.check(groups.d)
    fairness.validate_for(groups)
    rows = np.flatnonzero(fair_mask(groups, fairness))
    if len(rows) == 0:
        raise Infeasible("no ranking satisfies the fairness constraints", reason="empty")
    return rows


def fair_rankings(groups: GroupAssignment, fairness: FairnessSpec, budget: EnumerationBudget = DEFAULT_BUDGET) -> list[Ranking]:
    perms, _ = permutation_table(groups.d)
    try:
        rows = _fair_rows(groups, fairness, budget)
    except Infeasible:
        return []
    return [Ranking(tuple(int(x) for x in perms[r])) for r in rows]


def oracle_cfr(
    pi: Ranking,
    groups: GroupAssignment,
    fairness: FairnessSpec,
    metric: Metric,
    budget: EnumerationBudget = DEFAULT_BUDGET,
) -> CfrResult:
    """Fair ranking nearest to ``pi`` by exhaustive search."""
    rows = _fair_rows(groups, fairness, budget)
    dist = distances_to_all(metric, pi, rows)
    best = int(np.argmin(dist))
    perms, _ = permutation_table(groups.d)
    return CfrResult(Ranking(tuple(int(x) for x in perms[rows[best]])), int(dist[best]))


def _objective_totals(dist: np.ndarray, q: QExponent) -> np.ndarray:
    # dist: (n, m) distances; returns the exact per-column surrogate
    if q.is_inf:
        return dist.max(axis=0)
    top = int(dist.max()) if dist.size else 0
    if top ** q.value * dist.shape[0] < 2**62:
        return (dist**q.value).sum(axis=0)
    return (dist.astype(object) ** q.value).sum(axis=0)


def _argmin_objective(S, metric, q, rows, d) -> tuple[int, int]:
    dist = np.stack([distances_to_all(metric, pi, rows) for pi in S])
    totals = _objective_totals(dist, q)
    best = min(range(len(totals)), key=lambda i: (totals[i], i))
    return best, int(totals[best])


def oracle_fra(
    S: Sequence[Ranking],
    groups: GroupAssignment,
    fairness: FairnessSpec,
    metric: Metric,
    q,
    budget: EnumerationBudget = DEFAULT_BUDGET,
) -> tuple[Ranking, ObjectiveValue]:
    """Exhaustive q-mean fair aggregate: the fair ranking minimising the objective."""
    q = QExponent.parse(q)
    rows = _fair_rows(groups, fairness, budget)
    best, total = _argmin_objective(S, metric, q, rows, groups.d)
    perms, _ = permutation_table(groups.d)
    return Ranking(tuple(int(x) for x in perms[rows[best]])), ObjectiveValue(total, q)


def oracle_aggregate(
    S: Sequence[Ranking],
    metric: Metric,
    q,
    budget: EnumerationBudget = DEFAULT_BUDGET,
) -> Ranking:
    """Exhaustive unconstrained q-mean aggregate (no fairness)."""
    q = QExponent.parse(q)
    d = S[0].d
    budget.check(d)
    perms, _ = permutation_table(d)
    best, _ = _argmin_objective(S, metric, q, None, d)
    return Ranking(tuple(int(x) for x in perms[best]))


def oracle_lcs_fair(
    seq: Sequence[int],
    groups: GroupAssignment,
    fairness: FairnessSpec,
    budget: EnumerationBudget = DEFAULT_BUDGET,
) -> int:
    """Longest LCS between ``seq`` and any fair ranking."""
    rows = _fair_rows(groups, fairness, budget)
    _, invs = permutation_table(groups.d)
    return int(_lcs_with_rows(tuple(seq), invs[rows]).max())
