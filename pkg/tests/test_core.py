import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairrank.core import (
    FairnessSpec,
    GroupAssignment,
    Instance,
    Mode,
    Ranking,
    ValidationError,
    ceil_mul,
    check_fair,
    feasibility_exists,
    floor_mul,
    parse_rational,
)
from fairrank.generate import random_groups, random_ranking, random_spec
from fairrank.oracle import fair_mask, permutation_table

from tests.helpers import naive_check_fair

TWO_BY_TWO = GroupAssignment((0, 0, 1, 1))


def one_based(*xs):
    return Ranking.from_one_based(xs)


class TestRanking:
    def test_inverse(self):
        r = one_based(3, 1, 2)
        assert r.perm == (2, 0, 1)
        assert all(r.inv[r.perm[i]] == i for i in range(3))
        assert r.precedes(2, 0)
        assert str(r) == "3 1 2"

    @pytest.mark.parametrize("bad", [(), (0, 0), (1, 2), (-1, 0)])
    def test_rejects_non_permutations(self, bad):
        with pytest.raises(ValidationError):
            Ranking(bad)


class TestGroups:
    def test_sizes(self):
        ga = GroupAssignment.from_groups([[0, 3], [1], [2, 4]])
        assert ga.sizes == (2, 1, 2)
        assert ga.group_of == (0, 1, 2, 0, 2)
        assert ga.members[2] == (2, 4)

    def test_empty_group_rejected(self):
        with pytest.raises(ValidationError, match="empty"):
            GroupAssignment((0, 0, 2))
        with pytest.raises(ValidationError):
            GroupAssignment.from_groups([[0, 1], []])

    def test_overlap_and_missing(self):
        with pytest.raises(ValidationError, match="more than one"):
            GroupAssignment.from_groups([[0, 1], [1, 2]])
        with pytest.raises(ValidationError, match="not in any group"):
            GroupAssignment.from_groups([[0], [2]], d=3)


class TestRationals:
    def test_exhaustive_small(self):
        for den in range(1, 65):
            for num in range(0, den + 1):
                r = F(num, den)
                for k in (0, 1, 2, 3, 7, 10, 63, 64, 999_999, 1_000_000):
                    exact = num * k
                    assert floor_mul(r, k) == exact // den
                    assert ceil_mul(r, k) == -(-exact // den)

    @settings(max_examples=500)
    @given(st.integers(1, 64), st.integers(0, 64), st.integers(0, 10**6))
    def test_against_big_integers(self, den, num, k):
        num = min(num, den)
        r = F(num, den)
        lo, hi = floor_mul(r, k), ceil_mul(r, k)
        assert lo * den <= num * k < (lo + 1) * den
        assert (hi - 1) * den < num * k <= hi * den

    def test_float_trap(self):
        # 0.7 * 10 == 7.000000000000001 in binary floating point
        assert ceil_mul(F(7, 10), 10) == 7
        assert floor_mul(F(29, 100), 100) == 29

    @pytest.mark.parametrize("text,value", [("1/2", F(1, 2)), ("2/4", F(1, 2)), ("0", F(0)), (1, F(1))])
    def test_parse(self, text, value):
        assert parse_rational(text) == value

    @pytest.mark.parametrize("bad", ["x", "1/0", "1/-2", 0.5, True])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValidationError):
            parse_rational(bad)


class TestFairnessSpec:
    def test_alpha_above_beta(self):
        with pytest.raises(ValidationError, match="exceeds"):
            FairnessSpec((F(1, 2),), (F(1, 3),), 1)

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            FairnessSpec((F(0),), (F(3, 2),), 1)

    def test_block_integrality(self):
        FairnessSpec((F(1, 2),), (F(1, 2),), 2, Mode.BLOCK, 2)
        with pytest.raises(ValidationError, match="integers"):
            FairnessSpec((F(1, 3),), (F(1, 2),), 2, Mode.BLOCK, 2)
        with pytest.raises(ValidationError):
            FairnessSpec((F(0),), (F(1),), 2, Mode.BLOCK, None)
        with pytest.raises(ValidationError):
            FairnessSpec((F(0),), (F(1),), 2, Mode.KFAIR, 2)

    def test_checked_prefixes(self):
        kf = FairnessSpec((F(0),), (F(1),), 3)
        st_ = FairnessSpec((F(0),), (F(1),), 3, Mode.STRICT)
        bl = FairnessSpec((F(0),), (F(1),), 3, Mode.BLOCK, 2)
        assert list(kf.checked_prefixes(7)) == [3]
        assert list(st_.checked_prefixes(7)) == [3, 4, 5, 6, 7]
        assert list(bl.checked_prefixes(7)) == [4, 6]
        for spec in (kf, st_, bl):
            assert [p for p in range(9) if spec.is_checked(p, 7)] == list(spec.checked_prefixes(7))

    def test_block_products_are_integral(self, rng):
        for _ in range(200):
            d = rng.randint(2, 12)
            groups = random_groups(rng, d, rng.randint(1, min(3, d)))
            spec = random_spec(rng, groups, Mode.BLOCK)
            for p in spec.checked_prefixes(d):
                for a, b in zip(spec.alpha, spec.beta):
                    assert (a * p).denominator == 1 and (b * p).denominator == 1

    def test_instance_validation(self):
        spec = FairnessSpec((F(0), F(0)), (F(1), F(1)), 2)
        with pytest.raises(ValidationError, match="dimension"):
            Instance((one_based(1, 2, 3),), TWO_BY_TWO, spec)
        with pytest.raises(ValidationError, match="groups"):
            Instance((one_based(1, 2, 3, 4),), TWO_BY_TWO, FairnessSpec((F(0),), (F(1),), 2))
        with pytest.raises(ValidationError, match="exceeds d"):
            Instance((one_based(1, 2, 3, 4),), TWO_BY_TWO, FairnessSpec((F(0), F(0)), (F(1), F(1)), 5))


class TestCheckFair:
    def test_vacuous(self):
        spec = FairnessSpec((F(0), F(0)), (F(1), F(1)), 2)
        for perm in itertools.permutations(range(4)):
            assert check_fair(Ranking(perm), TWO_BY_TWO, spec)

    def test_pigeonhole(self):
        ga = GroupAssignment((0, 1))
        spec = FairnessSpec((F(1), F(1)), (F(1), F(1)), 2)
        assert not check_fair(one_based(1, 2), ga, spec)

    def test_block_example(self):
        half = (F(1, 2), F(1, 2))
        spec = FairnessSpec(half, half, 2, Mode.BLOCK, 2)
        assert check_fair(one_based(1, 3, 2, 4), TWO_BY_TWO, spec)
        assert not check_fair(one_based(1, 2, 3, 4), TWO_BY_TWO, spec)

    def test_dimension_mismatch(self):
        spec = FairnessSpec((F(0), F(0)), (F(1), F(1)), 2)
        with pytest.raises(ValidationError):
            check_fair(one_based(1, 2, 3), TWO_BY_TWO, spec)

    @pytest.mark.parametrize("d", range(1, 8))
    def test_matches_naive_exhaustive(self, rng, d):
        perms, _ = permutation_table(d)
        for mode in Mode:
            for _ in range(4 if d < 7 else 2):
                groups = random_groups(rng, d, rng.randint(1, min(3, d)))
                spec = random_spec(rng, groups, mode)
                mask = fair_mask(groups, spec)
                for row, perm in enumerate(perms):
                    perm = tuple(int(x) for x in perm)
                    fast = check_fair(perm, groups, spec)
                    assert fast == naive_check_fair(perm, groups, spec)
                    assert fast == bool(mask[row])

    def test_matches_naive_d8(self, rng):
        perms, _ = permutation_table(8)
        groups = random_groups(rng, 8, 3)
        for mode in Mode:
            spec = random_spec(rng, groups, mode, k=2)
            for perm in perms[::7]:
                perm = tuple(int(x) for x in perm)
                assert check_fair(perm, groups, spec) == naive_check_fair(perm, groups, spec)

    def test_matches_naive_random_large(self, rng):
        for _ in range(60):
            d = rng.randint(10, 200)
            groups = random_groups(rng, d, rng.randint(1, 4))
            spec = random_spec(rng, groups, rng.choice(list(Mode)))
            r = random_ranking(rng, d)
            assert check_fair(r, groups, spec) == naive_check_fair(r.perm, groups, spec)


class TestFeasibility:
    def test_vacuous(self):
        assert feasibility_exists(TWO_BY_TWO, FairnessSpec((F(0), F(0)), (F(1), F(1)), 1, Mode.STRICT))

    def test_pigeonhole(self):
        spec = FairnessSpec((F(1), F(1)), (F(1), F(1)), 2)
        assert not feasibility_exists(GroupAssignment((0, 1)), spec)

    def test_three_thirds(self):
        groups = GroupAssignment((0, 0, 1, 1, 2, 2))
        third = (F(1, 3),) * 3
        spec = FairnessSpec(third, third, 3, Mode.STRICT)
        assert feasibility_exists(groups, spec)
        assert check_fair(one_based(1, 3, 5, 2, 4, 6), groups, spec)

    @pytest.mark.parametrize("mode", list(Mode))
    def test_agrees_with_enumeration(self, rng, mode):
        for _ in range(150):
            d = rng.randint(1, 6)
            groups = random_groups(rng, d, rng.randint(1, min(3, d)))
            spec = random_spec(rng, groups, mode)
            assert feasibility_exists(groups, spec) == bool(fair_mask(groups, spec).any())
