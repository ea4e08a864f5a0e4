"""Reference checks shared by the test modules."""

import math
from fractions import Fraction

from fairrank.core import Mode


def naive_check_fair(perm, groups, fairness):
    """Rebuild prefix counts from scratch at every prefix length."""
    d = len(perm)
    for p in range(1, d + 1):
        if p < fairness.k:
            continue
        if fairness.mode is Mode.KFAIR and p != fairness.k:
            continue
        if fairness.mode is Mode.BLOCK and p % fairness.block:
            continue
        for z in range(groups.g):
            count = sum(1 for e in perm[:p] if groups.group_of[e] == z)
            lo = fairness.alpha[z] * p
            hi = fairness.beta[z] * p
            if fairness.mode is Mode.BLOCK:
                assert lo.denominator == 1 and hi.denominator == 1
            if not math.floor(lo) <= count <= math.ceil(hi):
                return False
    return True


def preserves_group_order(pi, out, groups):
    """Within every group, ``out`` orders elements exactly as ``pi`` does."""
    for members in groups.members:
        if sorted(members, key=pi.rank) != sorted(members, key=out.rank):
            return False
    return True


def preserves_block_order(pi, out, k):
    head, tail = out.perm[:k], out.perm[k:]
    return list(head) == sorted(head, key=pi.rank) and list(tail) == sorted(tail, key=pi.rank)


def frac(text):
    return Fraction(text)
