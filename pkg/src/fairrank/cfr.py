"""Closest fair ranking solvers.

* :func:`cfr_kendall_kfair` - greedy prefix selection, exact for Kendall tau
  under a single top-k constraint.
* :func:`cfr_kendall_blockfair` - the greedy applied to block prefixes of
  decreasing length, exact for Kendall tau under block fairness.
* :func:`cfr_ulam` - a dynamic program indexed by per-group counts that
  maximises the LCS with the input, exact for Ulam.
"""

from __future__ import annotations

import itertools
from array import array
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from fairrank.core import (
    FairnessSpec,
    GroupAssignment,
    Infeasible,
    Mode,
    Ranking,
    ValidationError,
    ceil_mul,
    check_fair,
    floor_mul,
)
from fairrank.metrics import Metric, kendall_tau


@dataclass(frozen=True)
class CfrResult:
    ranking: Ranking
    distance: int


def _as_seq(pi) -> tuple[int, ...]:
    return pi.perm if isinstance(pi, Ranking) else tuple(pi)


def _greedy_prefix(seq, group_of, lower, upper, k):
    g = len(lower)
    count = [0] * g
    chosen = set()
    for e in seq:
        z = group_of[e]
        if count[z] < lower[z]:
            count[z] += 1
            chosen.add(e)
    need = sum(lower)
    if need > k:
        raise Infeasible(
            f"group minimums need {need} slots but the prefix has {k}",
            reason="lower-bounds-overflow",
        )
    for e in seq:
        if len(chosen) >= k:
            break
        if e in chosen:
            continue
        z = group_of[e]
        if count[z] + 1 <= upper[z]:
            count[z] += 1
            chosen.add(e)
    return [e for e in seq if e in chosen] + [e for e in seq if e not in chosen]


def cfr_kendall_kfair(
    pi: Ranking,
    groups: GroupAssignment,
    alpha: Sequence[Fraction],
    beta: Sequence[Fraction],
    k: int,
) -> CfrResult:
    """Closest (alpha, beta)-k-fair ranking under Kendall tau.

    Takes the ``floor(alpha_i k)`` best elements of every group, tops the
    prefix up in input order while no group exceeds ``ceil(beta_i k)``, and
    keeps the input's relative order inside the prefix and inside the rest.

    Raises :class:`Infeasible` when no k-fair ranking exists.
    """
    spec = FairnessSpec(tuple(alpha), tuple(beta), k, Mode.KFAIR)
    spec.validate_for(groups)
    lower = [floor_mul(a, k) for a in spec.alpha]
    upper = [ceil_mul(b, k) for b in spec.beta]
    out = Ranking(tuple(_greedy_prefix(pi.perm, groups.group_of, lower, upper, k)))
    if not check_fair(out, groups, spec):
        raise Infeasible("greedy prefix failed the fairness check", reason="post-check")
    return CfrResult(out, kendall_tau(pi, out))


def cfr_kendall_blockfair(
    pi: Ranking,
    groups: GroupAssignment,
    alpha: Sequence[Fraction],
    beta: Sequence[Fraction],
    k: int,
    b: int,
) -> CfrResult:
    """Closest block-k-fair ranking under Kendall tau, O(d^2 / b).

    Repeats the k-fair greedy on the current ranking for prefix lengths
    ``floor(d/b)*b, floor(d/b)*b - b, ...`` down to ``k``.
    """
    spec = FairnessSpec(tuple(alpha), tuple(beta), k, Mode.BLOCK, b)
    spec.validate_for(groups)
    d = groups.d
    seq = list(pi.perm)
    p = (d // b) * b
    while p >= k:
        # bounds are exact integers at block multiples
        lower = [floor_mul(a, p) for a in spec.alpha]
        upper = [ceil_mul(x, p) for x in spec.beta]
        seq = _greedy_prefix(seq, groups.group_of, lower, upper, p)
        counts = [0] * groups.g
        for e in seq[:p]:
            counts[groups.group_of[e]] += 1
        if any(c < lo or c > hi for c, lo, hi in zip(counts, lower, upper)):
            raise Infeasible(f"no fair prefix of length {p}", reason="post-check")
        p -= b
    out = Ranking(tuple(seq))
    if not check_fair(out, groups, spec):
        raise Infeasible("iterated greedy failed the block fairness check", reason="post-check")
    return CfrResult(out, kendall_tau(pi, out))


# --- Ulam dynamic program ------------------------------------------------------

UNREACHABLE = -1

TAG_NONE = 0
TAG_SKIP = 1  # pi[j] left out of the common subsequence
TAG_MATCH = 2  # pi[j] placed next and matched
TAG_APPEND = 3  # TAG_APPEND + z: an unmatched element of group z placed next


@dataclass
class UlamDpTable:
    """Dense table over ``(j, a_1, ..., a_g)``.

    Cell ``(j, a)`` holds the longest common subsequence between ``seq[:j]``
    and a string with exactly ``a_z`` elements of group ``z`` whose every
    constrained prefix is fair, or :data:`UNREACHABLE`. ``tags`` records which
    transition produced the cell.
    """

    seq: tuple[int, ...]
    sizes: tuple[int, ...]
    values: array
    tags: bytearray
    strides: tuple[int, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return (len(self.seq) + 1,) + tuple(s + 1 for s in self.sizes)

    def index(self, j: int, counts: Sequence[int]) -> int:
        return j * self.strides[0] + sum(a * s for a, s in zip(counts, self.strides[1:]))

    def cell(self, j: int, counts: Sequence[int]) -> int:
        return self.values[self.index(j, counts)]

    def tag(self, j: int, counts: Sequence[int]) -> int:
        return self.tags[self.index(j, counts)]

    @property
    def best(self) -> int:
        return self.cell(len(self.seq), self.sizes)


def ulam_dp_cells(seq_len: int, sizes: Sequence[int]) -> int:
    cells = seq_len + 1
    for s in sizes:
        cells *= s + 1
    return cells


def _check_sequence(seq: Sequence[int], d: int) -> None:
    seen = set()
    for e in seq:
        if not 0 <= e < d or e in seen:
            raise ValidationError(f"sequence must hold distinct elements of 1..{d}")
        seen.add(e)


def ulam_dp_table(seq: Sequence[int], groups: GroupAssignment, fairness: FairnessSpec) -> UlamDpTable:
    """Fill the table bottom-up in ``j``, then in lexicographic count order."""
    fairness.validate_for(groups)
    seq = tuple(seq)
    d = groups.d
    _check_sequence(seq, d)
    sizes = groups.sizes
    g = groups.g
    m = len(seq)

    inner = [1] * g
    for z in range(g - 2, -1, -1):
        inner[z] = inner[z + 1] * (sizes[z + 1] + 1)
    jstride = inner[0] * (sizes[0] + 1)
    values = array("i", [UNREACHABLE]) * (jstride * (m + 1))
    tags = bytearray(jstride * (m + 1))

    combos = []
    for counts in itertools.product(*(range(s + 1) for s in sizes)):
        gamma = sum(counts)
        valid = True
        if fairness.is_checked(gamma, d):
            for z, (lo, hi) in enumerate(fairness.bounds(gamma)):
                if not lo <= counts[z] <= hi:
                    valid = False
                    break
        if not valid:
            continue
        off = sum(a * s for a, s in zip(counts, inner))
        preds = tuple((inner[z], TAG_APPEND + z) for z in range(g) if counts[z] > 0)
        combos.append((off, counts, preds))

    group_of = groups.group_of
    for j in range(m + 1):
        base = j * jstride
        if j:
            ze = group_of[seq[j - 1]]
            match_step = jstride + inner[ze]
        for off, counts, preds in combos:
            idx = base + off
            if off == 0:
                if j == 0:
                    values[idx] = 0
                else:
                    values[idx] = values[idx - jstride]
                    tags[idx] = TAG_SKIP
                continue
            best = UNREACHABLE
            tag = TAG_NONE
            if j:
                if counts[ze]:
                    v = values[idx - match_step]
                    if v != UNREACHABLE:
                        best = v + 1
                        tag = TAG_MATCH
                v = values[idx - jstride]
                if v > best:
                    best = v
                    tag = TAG_SKIP
            for step, t in preds:
                v = values[idx - step]
                if v > best:
                    best = v
                    tag = t
            values[idx] = best
            tags[idx] = tag
    return UlamDpTable(seq, tuple(sizes), values, tags, (jstride, *inner))


def _reconstruct(table: UlamDpTable, groups: GroupAssignment) -> list[int]:
    seq = table.seq
    group_of = groups.group_of
    j = len(seq)
    counts = list(table.sizes)
    ops = []
    while j or any(counts):
        tag = table.tag(j, counts)
        if tag == TAG_MATCH:
            e = seq[j - 1]
            ops.append((True, e))
            counts[group_of[e]] -= 1
            j -= 1
        elif tag == TAG_SKIP:
            j -= 1
        elif tag >= TAG_APPEND:
            z = tag - TAG_APPEND
            ops.append((False, z))
            counts[z] -= 1
        else:  # pragma: no cover - a reachable cell always has a tag
            raise AssertionError(f"untagged cell at j={j}, counts={counts}")
    ops.reverse()
    matched = {e for is_match, e in ops if is_match}
    spare = [[e for e in members if e not in matched] for members in groups.members]
    cursor = [0] * groups.g
    out = []
    for is_match, x in ops:
        if is_match:
            out.append(x)
        else:
            out.append(spare[x][cursor[x]])
            cursor[x] += 1
    return out


def cfr_ulam(pi_seq, groups: GroupAssignment, fairness: FairnessSpec) -> CfrResult:
    """Closest fair ranking under Ulam for any fairness mode.

    ``pi_seq`` may be a :class:`Ranking` or a sequence of distinct elements
    that leaves some out; missing elements never count towards the LCS.
    The reported distance is ``d - LCS``, the Ulam distance when ``pi_seq``
    is a full permutation.
    """
    table = ulam_dp_table(_as_seq(pi_seq), groups, fairness)
    if table.best == UNREACHABLE:
        raise Infeasible("no fair ranking exists", reason="empty")
    out = Ranking(tuple(_reconstruct(table, groups)))
    return CfrResult(out, groups.d - table.best)


def cfr_ulam_strict(
    pi_seq,
    groups: GroupAssignment,
    alpha: Sequence[Fraction],
    beta: Sequence[Fraction],
    k: int,
) -> CfrResult:
    """Closest (alpha, beta)-strict-k-fair ranking under Ulam."""
    return cfr_ulam(pi_seq, groups, FairnessSpec(tuple(alpha), tuple(beta), k, Mode.STRICT))


def closest_fair_ranking(
    pi: Ranking,
    groups: GroupAssignment,
    fairness: FairnessSpec,
    metric: Metric,
    max_d: int | None = None,
) -> CfrResult:
    """Dispatch to the exact solver for ``(metric, mode)``.

    Kendall tau with k-fair or block modes and Ulam with every mode have
    polynomial solvers; the remaining combinations fall back to exhaustive
    search, limited to ``max_d`` elements.
    """
    metric = Metric(metric)
    if metric is Metric.KENDALL_TAU and fairness.mode is Mode.KFAIR:
        return cfr_kendall_kfair(pi, groups, fairness.alpha, fairness.beta, fairness.k)
    if metric is Metric.KENDALL_TAU and fairness.mode is Mode.BLOCK:
        return cfr_kendall_blockfair(
            pi, groups, fairness.alpha, fairness.beta, fairness.k, fairness.block
        )
    if metric is Metric.ULAM:
        return cfr_ulam(pi, groups, fairness)
    from fairrank.oracle import EnumerationBudget, oracle_cfr

    budget = EnumerationBudget() if max_d is None else EnumerationBudget(max_d)
    return oracle_cfr(pi, groups, fairness, metric, budget)


def brute_force_cfr(pi: Ranking, groups: GroupAssignment, fairness: FairnessSpec, metric: Metric) -> CfrResult:
    """Exhaustive solver usable as a CFR plug-in (small d only)."""
    from fairrank.oracle import oracle_cfr

    return oracle_cfr(pi, groups, fairness, metric)

