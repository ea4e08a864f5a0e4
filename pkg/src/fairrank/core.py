"""Rankings, group partitions, exact-rational fairness bounds and fairness checks.

Elements are 0-based everywhere inside the library. The 1-based convention
only exists at the parsing/printing boundary (see :mod:`fairrank.io`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence


class FairRankError(Exception):
    """Base class for library errors."""


class ValidationError(FairRankError, ValueError):
    """An object violates one of its construction invariants."""


class Infeasible(FairRankError):
    """No ranking satisfies the requested fairness constraints.

    ``reason`` is ``"lower-bounds-overflow"`` when the group minimums alone
    need more than ``k`` slots, ``"post-check"`` when the constructed
    ranking failed the final fairness check, and ``"empty"`` when an
    exhaustive or DP search found no fair ranking at all.
    """

    def __init__(self, message: str = "no fair ranking exists", reason: str = "post-check"):
        super().__init__(message)
        self.reason = reason


def floor_mul(r: Fraction, k: int) -> int:
    """``floor(r * k)`` in integer arithmetic."""
    return (r.numerator * k) // r.denominator


def ceil_mul(r: Fraction, k: int) -> int:
    """``ceil(r * k)`` in integer arithmetic."""
    return -((-r.numerator * k) // r.denominator)


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, an int, or a Fraction. Floats are refused."""
    if isinstance(value, bool):
        raise ValidationError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        num, sep, den = text.partition("/")
        try:
            n = int(num)
            d = int(den) if sep else 1
        except ValueError:
            raise ValidationError(f"not a rational: {value!r}") from None
        if d <= 0:
            raise ValidationError(f"non-positive denominator in {value!r}")
        return Fraction(n, d)
    raise ValidationError(f"not a rational: {value!r} (use a 'p/q' string)")


@dataclass(frozen=True)
class Ranking:
    """A permutation of ``range(d)``; ``perm[i]`` is the element at rank ``i``."""

    perm: tuple[int, ...]
    inv: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        perm = tuple(int(x) for x in self.perm)
        d = len(perm)
        if d < 1:
            raise ValidationError("a ranking needs at least one element")
        inv = [-1] * d
        for i, e in enumerate(perm):
            if not 0 <= e < d or inv[e] != -1:
                raise ValidationError(f"not a permutation of 0..{d - 1}: {list(perm)}")
            inv[e] = i
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "inv", tuple(inv))

    @classmethod
    def identity(cls, d: int) -> Ranking:
        return cls(tuple(range(d)))

    @classmethod
    def from_one_based(cls, seq: Iterable[int]) -> Ranking:
        return cls(tuple(int(x) - 1 for x in seq))

    def to_one_based(self) -> list[int]:
        return [e + 1 for e in self.perm]

    @property
    def d(self) -> int:
        return len(self.perm)

    def rank(self, element: int) -> int:
        return self.inv[element]

    def precedes(self, x: int, y: int) -> bool:
        """``x <_pi y``."""
        return self.inv[x] < self.inv[y]

    def __len__(self) -> int:
        return len(self.perm)

    def __iter__(self):
        return iter(self.perm)

    def __str__(self) -> str:
        return " ".join(map(str, self.to_one_based()))


@dataclass(frozen=True)
class GroupAssignment:
    """A partition of ``range(d)`` into ``g`` nonempty groups."""

    group_of: tuple[int, ...]
    sizes: tuple[int, ...] = field(init=False, compare=False)
    members: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        group_of = tuple(int(x) for x in self.group_of)
        if not group_of:
            raise ValidationError("group assignment over zero elements")
        if min(group_of) < 0:
            raise ValidationError("group ids must be non-negative")
        g = max(group_of) + 1
        members: list[list[int]] = [[] for _ in range(g)]
        for e, z in enumerate(group_of):
            members[z].append(e)
        empty = [z for z in range(g) if not members[z]]
        if empty:
            raise ValidationError(f"empty group(s): {[z + 1 for z in empty]}")
        object.__setattr__(self, "group_of", group_of)
        object.__setattr__(self, "members", tuple(tuple(m) for m in members))
        object.__setattr__(self, "sizes", tuple(len(m) for m in members))

    @classmethod
    def from_groups(cls, groups: Sequence[Iterable[int]], d: int | None = None) -> GroupAssignment:
        """Build from explicit 0-based member lists."""
        groups = [list(g) for g in groups]
        total = sum(len(g) for g in groups)
        d = total if d is None else d
        group_of = [-1] * d
        for z, members in enumerate(groups):
            if not members:
                raise ValidationError(f"group {z + 1} is empty")
            for e in members:
                if not 0 <= e < d:
                    raise ValidationError(f"element {e + 1} outside 1..{d}")
                if group_of[e] != -1:
                    raise ValidationError(f"element {e + 1} is in more than one group")
                group_of[e] = z
        missing = [e + 1 for e, z in enumerate(group_of) if z == -1]
        if missing:
            raise ValidationError(f"elements not in any group: {missing}")
        return cls(tuple(group_of))

    @property
    def d(self) -> int:
        return len(self.group_of)

    @property
    def g(self) -> int:
        return len(self.sizes)


class Mode(enum.Enum):
    KFAIR = "kfair"
    BLOCK = "block"
    STRICT = "strict"


@dataclass(frozen=True)
class FairnessSpec:
    """Per-group proportion bounds, the prefix threshold ``k`` and a mode.

    ``block`` is the block length and must be set exactly when the mode is
    :attr:`Mode.BLOCK`.
    """

    alpha: tuple[Fraction, ...]
    beta: tuple[Fraction, ...]
    k: int
    mode: Mode = Mode.KFAIR
    block: int | None = None

    def __post_init__(self):
        alpha = tuple(parse_rational(a) for a in self.alpha)
        beta = tuple(parse_rational(b) for b in self.beta)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "mode", Mode(self.mode))
        if len(alpha) != len(beta) or not alpha:
            raise ValidationError("alpha and beta must be nonempty and of equal length")
        for i, (a, b) in enumerate(zip(alpha, beta)):
            if not (0 <= a <= 1 and 0 <= b <= 1):
                raise ValidationError(f"group {i + 1}: bounds must lie in [0, 1]")
            if a > b:
                raise ValidationError(f"group {i + 1}: alpha {a} exceeds beta {b}")
        if self.k < 1:
            raise ValidationError("k must be at least 1")
        if self.mode is Mode.BLOCK:
            if self.block is None or self.block < 1:
                raise ValidationError("block mode needs a positive block length")
            b = self.block
            for i, (lo, hi) in enumerate(zip(alpha, beta)):
                if (lo * b).denominator != 1 or (hi * b).denominator != 1:
                    raise ValidationError(
                        f"group {i + 1}: block*alpha and block*beta must be integers (block={b})"
                    )
        elif self.block is not None:
            raise ValidationError("block length given for a non-block mode")

    @property
    def g(self) -> int:
        return len(self.alpha)

    def checked_prefixes(self, d: int) -> range:
        """Prefix lengths at which the constraints apply."""
        if self.mode is Mode.KFAIR:
            return range(self.k, self.k + 1) if self.k <= d else range(0)
        if self.mode is Mode.STRICT:
            return range(self.k, d + 1)
        b = self.block
        start = -(-self.k // b) * b
        return range(start, d + 1, b)

    def is_checked(self, p: int, d: int) -> bool:
        if p < self.k or p > d:
            return False
        if self.mode is Mode.KFAIR:
            return p == self.k
        if self.mode is Mode.BLOCK:
            return p % self.block == 0
        return True

    def bounds(self, p: int) -> list[tuple[int, int]]:
        """Per-group ``(lower, upper)`` counts for a prefix of length ``p``."""
        return [(floor_mul(a, p), ceil_mul(b, p)) for a, b in zip(self.alpha, self.beta)]

    def validate_for(self, groups: GroupAssignment) -> None:
        if self.g != groups.g:
            raise ValidationError(f"fairness spec has {self.g} groups, partition has {groups.g}")
        if self.k > groups.d:
            raise ValidationError(f"k={self.k} exceeds d={groups.d}")
        if self.mode is Mode.BLOCK and self.block > groups.d:
            raise ValidationError(f"block={self.block} exceeds d={groups.d}")


@dataclass(frozen=True)
class Instance:
    rankings: tuple[Ranking, ...]
    groups: GroupAssignment
    fairness: FairnessSpec

    def __post_init__(self):
        rankings = tuple(self.rankings)
        object.__setattr__(self, "rankings", rankings)
        if not rankings:
            raise ValidationError("an instance needs at least one ranking")
        d = self.groups.d
        for i, r in enumerate(rankings):
            if r.d != d:
                raise ValidationError(f"ranking {i + 1} has dimension {r.d}, expected {d}")
        self.fairness.validate_for(self.groups)

    @property
    def d(self) -> int:
        return self.groups.d

    @property
    def n(self) -> int:
        return len(self.rankings)


def check_fair(r: Ranking | Sequence[int], groups: GroupAssignment, fairness: FairnessSpec) -> bool:
    """True iff ``r`` satisfies the fairness constraints of ``fairness``.

    One left-to-right pass with a counter per group.
    """
    perm = r.perm if isinstance(r, Ranking) else r
    d = groups.d
    if len(perm) != d:
        raise ValidationError(f"ranking has dimension {len(perm)}, groups cover {d}")
    if fairness.g != groups.g:
        raise ValidationError("fairness spec and partition disagree on the number of groups")
    group_of = groups.group_of
    alpha, beta = fairness.alpha, fairness.beta
    counts = [0] * groups.g
    for p, e in enumerate(perm, start=1):
        counts[group_of[e]] += 1
        if not fairness.is_checked(p, d):
            continue
        for z, c in enumerate(counts):
            if c < floor_mul(alpha[z], p) or c > ceil_mul(beta[z], p):
                return False
    return True


def feasibility_exists(groups: GroupAssignment, fairness: FairnessSpec) -> bool:
    """True iff some ranking of ``range(d)`` satisfies ``fairness``.

    Runs the exact solver for the mode on the identity ranking; the solvers
    find a fair ranking whenever one exists.
    """
    from fairrank.cfr import cfr_kendall_blockfair, cfr_kendall_kfair, cfr_ulam

    ident = Ranking.identity(groups.d)
    try:
        if fairness.mode is Mode.KFAIR:
            res = cfr_kendall_kfair(ident, groups, fairness.alpha, fairness.beta, fairness.k)
        elif fairness.mode is Mode.BLOCK:
            res = cfr_kendall_blockfair(
                ident, groups, fairness.alpha, fairness.beta, fairness.k, fairness.block
            )
        else:
            res = cfr_ulam(ident.perm, groups, fairness)
    except Infeasible:
        return False
    return check_fair(res.ranking, groups, fairness)
