"""Kendall tau, Spearman footrule and Ulam distances between rankings.

Every distance has a fast form and a slow ``naive_*`` reference; the
references exist for cross-checking and are deliberately simple.
"""

from __future__ import annotations

import enum
from bisect import bisect_left
from typing import Sequence

import numpy as np

from fairrank.core import Ranking, ValidationError

# Below this length the pure-Python merge sort beats numpy's per-call overhead.
_NUMPY_CUTOFF = 4096


class Metric(enum.Enum):
    KENDALL_TAU = "kt"
    SPEARMAN_FOOTRULE = "sf"
    ULAM = "ulam"


def _check_dims(a: Ranking, b: Ranking) -> None:
    if a.d != b.d:
        raise ValidationError(f"dimension mismatch: {a.d} vs {b.d}")


def _merge_count(seq: list[int]) -> tuple[list[int], int]:
    n = len(seq)
    if n < 2:
        return seq, 0
    left, inv_l = _merge_count(seq[: n // 2])
    right, inv_r = _merge_count(seq[n // 2 :])
    merged = []
    inv = inv_l + inv_r
    i = j = 0
    nl = len(left)
    while i < nl and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            inv += nl - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, inv


def _merge_count_numpy(x: np.ndarray) -> int:
    # Bottom-up merge sort; each level merges all block pairs at once with a
    # stable argsort on (pair id, value) keys.
    n = len(x)
    s = x.astype(np.int64, copy=True)
    idx = np.arange(n, dtype=np.int64)
    mpos = np.empty(n, dtype=np.int64)
    total = 0
    w = 1
    while w < n:
        pair = idx // (2 * w)
        key = pair * n + s
        order = np.argsort(key, kind="stable")
        mpos[order] = idx
        right = ((idx // w) & 1) == 1
        base = pair[right] * (2 * w)
        # left elements smaller than a right element = merged offset - offset in right block
        smaller_left = (mpos[right] - base) - (idx[right] - base - w)
        left_len = np.minimum(w, n - base)
        total += int((left_len - smaller_left).sum())
        s = key[order] - pair * n
        w *= 2
    return total


def count_inversions(seq: Sequence[int]) -> int:
    """Number of pairs ``i < j`` with ``seq[i] > seq[j]`` (distinct values)."""
    if len(seq) >= _NUMPY_CUTOFF:
        return _merge_count_numpy(np.asarray(seq))
    return _merge_count(list(seq))[1]


def kendall_tau(a: Ranking, b: Ranking) -> int:
    """Number of element pairs that ``a`` and ``b`` order differently."""
    _check_dims(a, b)
    if a.d >= _NUMPY_CUTOFF:
        composed = np.asarray(b.inv)[np.asarray(a.perm)]
        return _merge_count_numpy(composed)
    binv = b.inv
    return _merge_count([binv[e] for e in a.perm])[1]


def spearman_footrule(a: Ranking, b: Ranking) -> int:
    """Sum over elements of the absolute rank displacement."""
    _check_dims(a, b)
    return sum(abs(x - y) for x, y in zip(a.inv, b.inv))


def lis_length(seq: Sequence[int]) -> int:
    """Longest strictly increasing subsequence, by patience sorting."""
    piles: list[int] = []
    for x in seq:
        i = bisect_left(piles, x)
        if i == len(piles):
            piles.append(x)
        else:
            piles[i] = x
    return len(piles)


def lcs_length(s: Sequence[int], t: Sequence[int]) -> int:
    """LCS of two sequences of distinct symbols in O(n log n).

    Each symbol of ``s`` that also occurs in ``t`` is replaced by its position
    in ``t``; the LCS is then the LIS of that sequence.
    """
    pos = {x: i for i, x in enumerate(t)}
    return lis_length([pos[x] for x in s if x in pos])


def lcs_length_dp(s: Sequence[int], t: Sequence[int]) -> int:
    """Textbook O(|s|*|t|) LCS table, one row at a time.

    Works for arbitrary sequences (repeated symbols allowed). A row obeys
    ``new[j] = max(new[j-1], old[j], old[j-1] + match)``, which equals the
    running maximum of ``max(old[j], old[j-1] + match)``.
    """
    if not s or not t:
        return 0
    t_arr = np.asarray(t)
    row = np.zeros(len(t) + 1, dtype=np.int64)
    for x in s:
        match = (t_arr == x).astype(np.int64)
        cand = np.maximum(row[1:], row[:-1] + match)
        row[1:] = np.maximum.accumulate(cand)
    return int(row[-1])


def ulam(a: Ranking, b: Ranking) -> int:
    """``d - LCS(a, b)``: the fewest element moves turning ``a`` into ``b``."""
    _check_dims(a, b)
    binv = b.inv
    return a.d - lis_length([binv[e] for e in a.perm])


def distance(metric: Metric, a: Ranking, b: Ranking) -> int:
    return _FAST[Metric(metric)](a, b)


_FAST = {
    Metric.KENDALL_TAU: kendall_tau,
    Metric.SPEARMAN_FOOTRULE: spearman_footrule,
    Metric.ULAM: ulam,
}


# --- reference implementations -------------------------------------------------


def naive_kendall_tau(a: Ranking, b: Ranking) -> int:
    _check_dims(a, b)
    d = a.d
    if d > 64:
        ra = np.asarray(a.inv)
        rb = np.asarray(b.inv)
        return int(((ra[:, None] < ra[None, :]) & (rb[:, None] > rb[None, :])).sum())
    return sum(
        1
        for x in range(d)
        for y in range(d)
        if a.inv[x] < a.inv[y] and b.inv[y] < b.inv[x]
    )


def naive_spearman_footrule(a: Ranking, b: Ranking) -> int:
    _check_dims(a, b)
    total = 0
    for e in range(a.d):
        total += abs(a.inv[e] - b.inv[e])
    return total


def naive_ulam(a: Ranking, b: Ranking) -> int:
    _check_dims(a, b)
    return a.d - lcs_length_dp(a.perm, b.perm)


def naive_distance(metric: Metric, a: Ranking, b: Ranking) -> int:
    return {
        Metric.KENDALL_TAU: naive_kendall_tau,
        Metric.SPEARMAN_FOOTRULE: naive_spearman_footrule,
        Metric.ULAM: naive_ulam,
    }[Metric(metric)](a, b)
