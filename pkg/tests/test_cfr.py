import itertools
from fractions import Fraction as F

import pytest

from fairrank.cfr import (
    UNREACHABLE,
    cfr_kendall_blockfair,
    cfr_kendall_kfair,
    cfr_ulam,
    cfr_ulam_strict,
    closest_fair_ranking,
    ulam_dp_cells,
    ulam_dp_table,
)
from fairrank.core import (
    FairnessSpec,
    GroupAssignment,
    Infeasible,
    Mode,
    Ranking,
    ValidationError,
    check_fair,
    feasibility_exists,
)
from fairrank.generate import random_groups, random_ranking, random_spec
from fairrank.metrics import Metric, distance, lcs_length
from fairrank.oracle import BudgetExceeded, oracle_cfr, oracle_lcs_fair

from tests.helpers import preserves_block_order, preserves_group_order


def one_based(*xs):
    return Ranking.from_one_based(xs)


def feasible_cases(rng, count, mode, max_d=6, max_g=3):
    out = []
    while len(out) < count:
        d = rng.randint(1, max_d)
        groups = random_groups(rng, d, rng.randint(1, min(max_g, d)))
        spec = random_spec(rng, groups, mode)
        if feasibility_exists(groups, spec):
            out.append((random_ranking(rng, d), groups, spec))
    return out


class TestKendallKFair:
    def test_example(self):
        groups = GroupAssignment((0, 0, 1, 1))
        res = cfr_kendall_kfair(one_based(3, 4, 1, 2), groups, (F(1, 2), F(0)), (F(1), F(1)), 2)
        assert res.ranking == one_based(3, 1, 4, 2)
        assert res.distance == 1

    def test_pigeonhole(self):
        with pytest.raises(Infeasible) as info:
            cfr_kendall_kfair(one_based(1, 2), GroupAssignment((0, 1)), (F(1), F(1)), (F(1), F(1)), 2)
        assert info.value.reason == "lower-bounds-overflow"

    def test_already_fair_is_unchanged(self):
        groups = GroupAssignment((0, 1, 0, 1))
        pi = one_based(1, 2, 3, 4)
        res = cfr_kendall_kfair(pi, groups, (F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)), 2)
        assert res.ranking == pi and res.distance == 0

    def test_against_oracle(self, rng):
        for pi, groups, spec in feasible_cases(rng, 300, Mode.KFAIR):
            res = cfr_kendall_kfair(pi, groups, spec.alpha, spec.beta, spec.k)
            assert check_fair(res.ranking, groups, spec)
            assert res.distance == oracle_cfr(pi, groups, spec, Metric.KENDALL_TAU).distance
            assert res.distance == distance(Metric.KENDALL_TAU, pi, res.ranking)
            assert preserves_group_order(pi, res.ranking, groups)
            assert preserves_block_order(pi, res.ranking, spec.k)

    def test_infeasible_agrees_with_oracle(self, rng):
        seen = 0
        for _ in range(400):
            d = rng.randint(1, 6)
            groups = random_groups(rng, d, rng.randint(1, min(3, d)))
            spec = random_spec(rng, groups, Mode.KFAIR)
            if feasibility_exists(groups, spec):
                continue
            seen += 1
            with pytest.raises(Infeasible):
                oracle_cfr(Ranking.identity(d), groups, spec, Metric.KENDALL_TAU)
        assert seen > 0

    def test_large_input(self, rng):
        d = 3000
        groups = random_groups(rng, d, 3)
        spec = FairnessSpec((F(1, 5),) * 3, (F(2, 5),) * 3, 1000)
        pi = random_ranking(rng, d)
        res = cfr_kendall_kfair(pi, groups, spec.alpha, spec.beta, spec.k)
        assert check_fair(res.ranking, groups, spec)
        assert preserves_group_order(pi, res.ranking, groups)


class TestKendallBlock:
    def test_example(self):
        groups = GroupAssignment((0, 0, 1, 1))
        half = (F(1, 2), F(1, 2))
        res = cfr_kendall_blockfair(one_based(1, 2, 3, 4), groups, half, half, 2, 2)
        assert res.ranking == one_based(1, 3, 2, 4)
        assert res.distance == 1

    def test_three_groups(self):
        groups = GroupAssignment((0, 0, 1, 1, 2, 2))
        third = (F(1, 3),) * 3
        res = cfr_kendall_blockfair(one_based(1, 2, 3, 4, 5, 6), groups, third, third, 3, 3)
        assert res.ranking == one_based(1, 3, 5, 2, 4, 6)
        assert res.distance == 3

    def test_non_integral_bounds_rejected(self):
        groups = GroupAssignment((0, 1, 0, 1))
        with pytest.raises(ValidationError):
            cfr_kendall_blockfair(one_based(1, 2, 3, 4), groups, (F(1, 3), F(0)), (F(1), F(1)), 2, 2)

    def test_against_oracle(self, rng):
        for pi, groups, spec in feasible_cases(rng, 300, Mode.BLOCK, max_d=7):
            res = cfr_kendall_blockfair(pi, groups, spec.alpha, spec.beta, spec.k, spec.block)
            assert check_fair(res.ranking, groups, spec)
            assert res.distance == oracle_cfr(pi, groups, spec, Metric.KENDALL_TAU).distance
            assert preserves_group_order(pi, res.ranking, groups)


class TestUlamTable:
    def test_cell_count(self):
        assert ulam_dp_cells(4, (2, 2)) == 5 * 3 * 3

    def test_invariants(self, rng):
        for pi, groups, spec in feasible_cases(rng, 150, Mode.STRICT):
            table = ulam_dp_table(pi.perm, groups, spec)
            m = len(table.seq)
            counts_all = list(itertools.product(*(range(s + 1) for s in groups.sizes)))
            for j in range(m + 1):
                assert table.cell(j, (0,) * groups.g) == 0
                for counts in counts_all:
                    v = table.cell(j, counts)
                    if v == UNREACHABLE:
                        assert table.cell(0, counts) == UNREACHABLE
                        continue
                    assert 0 <= v <= min(j, sum(counts))
                    if j:
                        assert v >= table.cell(j - 1, counts)
            assert table.best == groups.d - oracle_cfr(pi, groups, spec, Metric.ULAM).distance

    def test_rejects_bad_sequence(self):
        groups = GroupAssignment((0, 1))
        spec = FairnessSpec((F(0), F(0)), (F(1), F(1)), 1)
        with pytest.raises(ValidationError):
            ulam_dp_table((0, 0), groups, spec)
        with pytest.raises(ValidationError):
            ulam_dp_table((2,), groups, spec)


class TestUlam:
    def test_three_thirds(self):
        groups = GroupAssignment((0, 0, 1, 1, 2, 2))
        third = (F(1, 3),) * 3
        res = cfr_ulam_strict(one_based(1, 2, 3, 4, 5, 6), groups, third, third, 3)
        assert check_fair(res.ranking, groups, FairnessSpec(third, third, 3, Mode.STRICT))
        assert res.distance == distance(Metric.ULAM, one_based(1, 2, 3, 4, 5, 6), res.ranking)

    def test_infeasible(self):
        with pytest.raises(Infeasible):
            cfr_ulam_strict(one_based(1, 2), GroupAssignment((0, 1)), (F(1), F(1)), (F(1), F(1)), 1)

    @pytest.mark.parametrize("mode", list(Mode))
    def test_against_oracle(self, rng, mode):
        for pi, groups, spec in feasible_cases(rng, 200, mode, max_d=6):
            res = cfr_ulam(pi, groups, spec)
            assert check_fair(res.ranking, groups, spec)
            assert res.distance == distance(Metric.ULAM, pi, res.ranking)
            assert res.distance == oracle_cfr(pi, groups, spec, Metric.ULAM).distance

    def test_partial_sequences(self, rng):
        for pi, groups, spec in feasible_cases(rng, 200, Mode.STRICT, max_d=6):
            keep = rng.randint(0, groups.d)
            seq = pi.perm[:keep]
            res = cfr_ulam(seq, groups, spec)
            lcs = lcs_length(seq, res.ranking.perm)
            assert check_fair(res.ranking, groups, spec)
            assert lcs == oracle_lcs_fair(seq, groups, spec)
            assert res.distance == groups.d - lcs


class TestDispatch:
    def test_routes(self, rng):
        for pi, groups, spec in feasible_cases(rng, 60, Mode.STRICT, max_d=5):
            for metric in Metric:
                res = closest_fair_ranking(pi, groups, spec, metric)
                assert res.distance == oracle_cfr(pi, groups, spec, metric).distance

    def test_fallback_budget(self, rng):
        d = 9
        groups = random_groups(rng, d, 2)
        spec = FairnessSpec((F(0), F(0)), (F(1), F(1)), 3, Mode.STRICT)
        with pytest.raises(BudgetExceeded):
            closest_fair_ranking(random_ranking(rng, d), groups, spec, Metric.SPEARMAN_FOOTRULE)
        res = closest_fair_ranking(Ranking.identity(4), GroupAssignment((0, 1, 0, 1)),
                                   FairnessSpec((F(0), F(0)), (F(1), F(1)), 1, Mode.STRICT),
                                   Metric.SPEARMAN_FOOTRULE, max_d=4)
        assert res.distance == 0
