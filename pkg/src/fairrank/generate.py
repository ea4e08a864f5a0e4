"""Random groups, fairness specs and instances for tests, benchmarks and ``gen``."""

from __future__ import annotations

from fractions import Fraction

from fairrank.core import (
    FairnessSpec,
    GroupAssignment,
    Instance,
    Mode,
    Ranking,
    ValidationError,
    feasibility_exists,
)
from fairrank.rng import XorShift64Star


def random_groups(rng: XorShift64Star, d: int, g: int) -> GroupAssignment:
    """Random partition of ``range(d)`` into ``g`` nonempty groups."""
    if not 1 <= g <= d:
        raise ValidationError(f"cannot split {d} elements into {g} nonempty groups")
    labels = list(range(g)) + [rng.below(g) for _ in range(d - g)]
    rng.shuffle(labels)
    return GroupAssignment(tuple(labels))


def balanced_groups(d: int, g: int) -> GroupAssignment:
    return GroupAssignment(tuple(e % g for e in range(d)))


def _bounds_near_share(rng, size, d, den):
    share = Fraction(size, d) * den
    slack_lo = rng.below(2)
    slack_hi = rng.below(2)
    lo = max(0, (share.numerator // share.denominator) - slack_lo)
    hi = min(den, -(-share.numerator // share.denominator) + slack_hi)
    return Fraction(lo, den), Fraction(hi, den)


def random_spec(
    rng: XorShift64Star,
    groups: GroupAssignment,
    mode: Mode,
    denominator_cap: int = 6,
    k: int | None = None,
    block: int | None = None,
) -> FairnessSpec:
    """Random bounds; about half the time centred on the group shares.

    Block mode uses the block length as denominator so that ``block * alpha``
    and ``block * beta`` are integers.
    """
    mode = Mode(mode)
    d = groups.d
    if mode is Mode.BLOCK:
        if block is None:
            block = rng.choice([b for b in (2, 3) if b <= d] or [1])
        den = block
    else:
        block = None
        den = rng.randint(1, denominator_cap)
    alpha, beta = [], []
    near = rng.below(2) == 0
    for size in groups.sizes:
        if near:
            lo, hi = _bounds_near_share(rng, size, d, den)
        else:
            a = rng.randint(0, den)
            b = rng.randint(a, den)
            lo, hi = Fraction(a, den), Fraction(b, den)
        alpha.append(lo)
        beta.append(hi)
    if k is None:
        k = rng.randint(1, d)
    return FairnessSpec(tuple(alpha), tuple(beta), k, mode, block)


def random_ranking(rng: XorShift64Star, d: int) -> Ranking:
    return Ranking(tuple(rng.permutation(d)))


def random_instance(
    rng: XorShift64Star,
    d: int,
    n: int,
    g: int,
    mode: Mode,
    denominator_cap: int = 6,
    k: int | None = None,
    block: int | None = None,
    max_attempts: int = 1000,
) -> Instance:
    """Random feasible instance; resamples the spec until a fair ranking exists."""
    groups = random_groups(rng, d, g)
    for _ in range(max_attempts):
        spec = random_spec(rng, groups, mode, denominator_cap, k, block)
        if feasibility_exists(groups, spec):
            break
    else:
        raise ValidationError(f"no feasible spec found in {max_attempts} attempts")
    rankings = tuple(random_ranking(rng, d) for _ in range(n))
    return Instance(rankings, groups, spec)
