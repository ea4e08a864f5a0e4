"""Closest fair rankings and fair rank aggregation over permutation metrics."""

from fairrank.core import (
    FairnessSpec,
    FairRankError,
    GroupAssignment,
    Infeasible,
    Instance,
    Mode,
    Ranking,
    ValidationError,
    ceil_mul,
    check_fair,
    feasibility_exists,
    floor_mul,
)
from fairrank.metrics import Metric, kendall_tau, lcs_length, spearman_footrule, ulam
from fairrank.cfr import (
    CfrResult,
    cfr_kendall_blockfair,
    cfr_kendall_kfair,
    cfr_ulam,
    cfr_ulam_strict,
    closest_fair_ranking,
)
from fairrank.aggregate import (
    ObjectiveValue,
    QExponent,
    meta1,
    meta2,
    objective,
    relative_order_candidate,
    spearman_median,
    ulam_fair_median,
)

__version__ = "0.1.0"
