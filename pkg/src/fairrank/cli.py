"""Command line interface.

Exit codes: 0 ok, 1 usage, 2 parse/validation, 3 infeasible, 4 budget
exceeded. Every failure prints one line starting with ``error:`` to stderr.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from fractions import Fraction

from fairrank.aggregate import (
    QExponent,
    meta1,
    meta2,
    objective,
    ulam_fair_median,
)
from fairrank.cfr import closest_fair_ranking, ulam_dp_cells
from fairrank.core import FairnessSpec, FairRankError, Infeasible, Mode, ValidationError, check_fair
from fairrank.generate import balanced_groups, random_instance, random_ranking
from fairrank.io import dump_instance, load_instance, parse_ranking_text
from fairrank.metrics import Metric, distance
from fairrank.oracle import BudgetExceeded, EnumerationBudget, oracle_cfr, oracle_fra
from fairrank.rng import XorShift64Star

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_BUDGET = 0, 1, 2, 3, 4

MAX_DP_GROUPS = 4
MAX_DP_CELLS = 20_000_000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _metric(text: str) -> Metric:
    try:
        return Metric(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown metric {text!r} (kt, sf, ulam)") from None


def _pick_ranking(inst, args):
    if args.ranking is not None:
        return parse_ranking_text(args.ranking, inst.d)
    if not 1 <= args.index <= inst.n:
        raise ValidationError(f"--index {args.index} outside 1..{inst.n}")
    return inst.rankings[args.index - 1]


def _guard_dp(inst, seq_len=None):
    if inst.groups.g > MAX_DP_GROUPS:
        raise UsageError(f"the Ulam solver accepts at most {MAX_DP_GROUPS} groups, got {inst.groups.g}")
    cells = ulam_dp_cells(inst.d if seq_len is None else seq_len, inst.groups.sizes)
    if cells > MAX_DP_CELLS:
        raise BudgetExceeded(f"Ulam table would need {cells} cells (limit {MAX_DP_CELLS})")


def _fmt_ratio(x: float) -> str:
    return f"{x:.6f}"


def cmd_dist(args, out):
    a = parse_ranking_text(args.a)
    b = parse_ranking_text(args.b)
    out.write(f"{distance(args.metric, a, b)}\n")


def cmd_check(args, out):
    inst = load_instance(args.instance)
    r = _pick_ranking(inst, args)
    out.write("fair\n" if check_fair(r, inst.groups, inst.fairness) else "unfair\n")


def cmd_cfr(args, out):
    inst = load_instance(args.instance)
    pi = _pick_ranking(inst, args)
    budget = EnumerationBudget(args.max_d)
    if args.metric is Metric.ULAM:
        _guard_dp(inst)
    res = closest_fair_ranking(pi, inst.groups, inst.fairness, args.metric, max_d=args.max_d)
    out.write(f"ranking: {res.ranking}\n")
    out.write(f"distance: {res.distance}\n")
    if args.oracle:
        ref = oracle_cfr(pi, inst.groups, inst.fairness, args.metric, budget)
        out.write(f"oracle_distance: {ref.distance}\n")
        ratio = 1.0 if ref.distance == 0 and res.distance == 0 else res.distance / ref.distance
        out.write(f"ratio: {_fmt_ratio(ratio)}\n")


def _format_objective(obj) -> str:
    if obj.q.is_inf or obj.q.value == 1:
        return str(obj.total)
    return f"{obj.value:.6f}"


def cmd_aggregate(args, out):
    inst = load_instance(args.instance)
    q = QExponent.parse(args.q)
    S = inst.rankings
    if args.algo == "ulam3e":
        if args.metric is not Metric.ULAM or q.value != 1:
            raise UsageError("--algo ulam3e needs --metric ulam and --q 1")
        _guard_dp(inst)
        sigma = ulam_fair_median(S, inst.groups, inst.fairness, jobs=args.jobs)
    elif args.algo == "meta1":
        if args.metric is Metric.ULAM:
            _guard_dp(inst)
        sigma = meta1(S, inst.groups, inst.fairness, args.metric, q, jobs=args.jobs)
    else:
        if args.metric is Metric.ULAM:
            _guard_dp(inst)
        if not (args.metric is Metric.SPEARMAN_FOOTRULE and q.value == 1):
            EnumerationBudget(args.max_d).check(inst.d)
        sigma = meta2(S, inst.groups, inst.fairness, args.metric, q)
    obj = objective(S, sigma, args.metric, q)
    out.write(f"ranking: {sigma}\n")
    out.write(f"objective: {_format_objective(obj)}\n")
    out.write(f"objective_total: {obj.total}\n")
    if args.oracle:
        _, best = oracle_fra(S, inst.groups, inst.fairness, args.metric, q, EnumerationBudget(args.max_d))
        out.write(f"oracle_objective: {_format_objective(best)}\n")
        out.write(f"ratio: {_fmt_ratio(obj.ratio(best))}\n")


def cmd_gen(args, out):
    if args.mode is Mode.BLOCK and args.block is None:
        args.block = 2
    rng = XorShift64Star(args.seed)
    inst = random_instance(
        rng,
        args.d,
        args.n,
        args.g,
        args.mode,
        denominator_cap=args.denominator_cap,
        k=args.k,
        block=args.block if args.mode is Mode.BLOCK else None,
    )
    text = dump_instance(inst)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)


BENCH_TASKS = ("kt", "sf", "ulam", "cfr-kt-kfair", "cfr-kt-block", "cfr-ulam")


def bench_task(task: str, d: int, rng: XorShift64Star, g: int = 2):
    """A zero-argument callable running ``task`` once at size ``d``."""
    a = random_ranking(rng, d)
    b = random_ranking(rng, d)
    if task in ("kt", "sf", "ulam"):
        metric = Metric(task)
        return lambda: distance(metric, a, b)
    groups = balanced_groups(d, g)
    share = (Fraction(1, g),) * g
    if task == "cfr-kt-kfair":
        spec = FairnessSpec(share, share, max(1, d // 2), Mode.KFAIR)
        return lambda: closest_fair_ranking(a, groups, spec, Metric.KENDALL_TAU)
    if task == "cfr-kt-block":
        spec = FairnessSpec(share, share, g, Mode.BLOCK, g)
        return lambda: closest_fair_ranking(a, groups, spec, Metric.KENDALL_TAU)
    if task == "cfr-ulam":
        lo = Fraction(1, 2 * g)
        hi = min(Fraction(1), Fraction(3, 2 * g))
        spec = FairnessSpec((lo,) * g, (hi,) * g, 1, Mode.STRICT)
        return lambda: closest_fair_ranking(a, groups, spec, Metric.ULAM)
    raise UsageError(f"unknown bench task {task!r}")


def cmd_bench(args, out):
    try:
        sizes = [int(x) for x in args.d_list.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--d-list must be comma-separated integers, got {args.d_list!r}") from None
    rng = XorShift64Star(args.seed)
    out.write("task,d,repeats,best_seconds,median_seconds\n")
    for d in sizes:
        fn = bench_task(args.metric, d, rng, args.g)
        times = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        out.write(f"{args.metric},{d},{args.repeats},{min(times):.6f},{statistics.median(times):.6f}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fairrank", description="Closest fair rankings and fair rank aggregation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("dist", help="distance between two rankings")
    s.add_argument("--metric", type=_metric, default=Metric.KENDALL_TAU)
    s.add_argument("a", help='1-based ranking, e.g. "1 2 3"')
    s.add_argument("b")
    s.set_defaults(func=cmd_dist)

    def with_ranking(sp):
        sp.add_argument("instance", help="instance JSON file")
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--index", type=int, default=1, help="1-based input ranking (default 1)")
        g.add_argument("--ranking", help="inline 1-based ranking instead of an input")

    s = sub.add_parser("check", help="is a ranking fair for the instance's spec")
    with_ranking(s)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("cfr", help="closest fair ranking")
    with_ranking(s)
    s.add_argument("--metric", type=_metric, default=Metric.KENDALL_TAU)
    s.add_argument("--oracle", action="store_true", help="cross-check by exhaustive search")
    s.add_argument("--max-d", type=int, default=8, help="enumeration budget")
    s.set_defaults(func=cmd_cfr)

    s = sub.add_parser("aggregate", help="fair rank aggregation")
    s.add_argument("instance")
    s.add_argument("--metric", type=_metric, default=Metric.KENDALL_TAU)
    s.add_argument("--q", default="1", help="positive integer or inf")
    s.add_argument("--algo", choices=("meta1", "meta2", "ulam3e"), default="meta1")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--oracle", action="store_true", help="report the ratio to the exhaustive optimum")
    s.add_argument("--max-d", type=int, default=8, help="enumeration budget")
    s.set_defaults(func=cmd_aggregate)

    s = sub.add_parser("gen", help="write a random feasible instance")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--g", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mode", type=Mode, choices=list(Mode), default=Mode.KFAIR)
    s.add_argument("--block", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--denominator-cap", type=int, default=6)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("bench", help="timing table as CSV")
    s.add_argument("--metric", choices=BENCH_TASKS, default="kt")
    s.add_argument("--d-list", default="500,1000,2000")
    s.add_argument("--repeats", type=int, default=3)
    s.add_argument("--g", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be at least 1")
        args.func(args, out)
    except UsageError as exc:
        err.write(f"error: usage: {exc}\n")
        return EXIT_USAGE
    except Infeasible as exc:
        err.write(f"error: infeasible: {exc}\n")
        return EXIT_INFEASIBLE
    except BudgetExceeded as exc:
        err.write(f"error: budget: {exc}\n")
        return EXIT_BUDGET
    except (ValidationError, FairRankError) as exc:
        err.write(f"error: invalid: {exc}\n")
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
