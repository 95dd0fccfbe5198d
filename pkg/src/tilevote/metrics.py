"""Aggregation and significance testing over session event logs.

Solve quality is the move overshoot relative to the known optimum: actual
moves minus optimal distance, so zero is a perfect solve. Reports break
results down by difficulty band (easy 1-8, hard 9-16, beyond 17+) and by
condition, with solo results additionally rolled up per member (average and
best). Raw mean moves and normalized mean quality are both reported, always
labeled, since a mean-move figure only makes sense alongside the band's
difficulty mix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from statistics import fmean
from typing import Iterable, Sequence

from scipy.stats import t as t_dist

from .engine import Mode
from .eventlog import read_log, replay
from .oracle import DistanceTable, band

BANDS = ("easy", "hard", "beyond")
CONDITIONS = ("group", "solo")


class InvalidRecord(ValueError):
    pass


class EmptyBand(ValueError):
    pass


class InsufficientData(ValueError):
    pass


def solution_quality(moves: int, optimal: int) -> int:
    """Excess moves over the optimum; an optimal solution scores zero."""
    if optimal < 0 or moves < optimal:
        raise InvalidRecord(
            f"{moves} moves cannot beat the optimal distance {optimal}"
        )
    return moves - optimal


@dataclass(frozen=True)
class SolveRecord:
    session_id: str
    condition: str  # "group" | "solo"
    subject: str  # player id for solo records, session id for group records
    puzzle_id: int
    difficulty: int
    moves: int
    optimal: int
    quality: int
    time_s: float

    @property
    def band(self) -> str:
        return band(self.difficulty)


def extract_records(
    header: dict, records: list[dict], table: DistanceTable | None = None
) -> tuple[list[SolveRecord], int]:
    """Replay-validate one log and convert its solves; returns (records, unsolved)."""
    result = replay(header, records, table)
    condition = "solo" if result.mode is Mode.SOLO else "group"
    subject = result.roster[0] if condition == "solo" else result.session_id
    out = []
    for s in result.solves:
        quality = solution_quality(s.moves, s.optimal)
        if quality != s.quality:
            raise InvalidRecord(
                f"logged quality {s.quality} != {quality} for puzzle {s.puzzle_id}"
            )
        out.append(
            SolveRecord(
                session_id=result.session_id,
                condition=condition,
                subject=subject,
                puzzle_id=s.puzzle_id,
                difficulty=s.difficulty,
                moves=s.moves,
                optimal=s.optimal,
                quality=quality,
                time_s=s.elapsed_s,
            )
        )
    unsolved = 1 if result.unsolved_puzzle is not None else 0
    return out, unsolved


def load_records(
    sources: Iterable[str | Path], table: DistanceTable | None = None
) -> tuple[list[SolveRecord], int]:
    """Load, validate, and merge logs in deterministic (sorted-path) order."""
    records: list[SolveRecord] = []
    attrition = 0
    for path in sorted(Path(p) for p in sources):
        header, recs = read_log(path)
        got, unsolved = extract_records(header, recs, table)
        records.extend(got)
        attrition += unsolved
    return records, attrition


def expand_log_sources(path: str | Path) -> list[Path]:
    """A single .jsonl file, or every .jsonl under a directory (recursive)."""
    path = Path(path)
    if path.is_dir():
        return sorted(path.rglob("*.jsonl"))
    return [path]


# --- member aggregation ------------------------------------------------------


@dataclass(frozen=True)
class MemberAggregate:
    average_member: float
    best_member: float
    per_member: dict[str, float]
    excluded: tuple[str, ...]  # members with no solves in the band


def aggregate_solo(
    records: Sequence[SolveRecord],
    band_name: str,
    metric: str = "moves",
    per_puzzle: bool = True,
) -> MemberAggregate:
    """Roll solo records in a band up to the member level.

    With per_puzzle=True (default) each member contributes their mean value
    per solved puzzle, so members who solved different numbers of puzzles
    are comparable; with per_puzzle=False each contributes their raw total.
    Average is the mean over members, best the minimum.
    """
    solo = [r for r in records if r.condition == "solo"]
    if band_name != "overall":
        in_band = [r for r in solo if r.band == band_name]
    else:
        in_band = solo
    members = sorted({r.subject for r in solo})
    if not in_band:
        raise EmptyBand(f"no solo solves in band {band_name!r}")
    per_member: dict[str, float] = {}
    excluded = []
    for m in members:
        values = [getattr(r, metric) for r in in_band if r.subject == m]
        if not values:
            excluded.append(m)
            continue
        per_member[m] = fmean(values) if per_puzzle else float(sum(values))
    return MemberAggregate(
        average_member=fmean(per_member.values()),
        best_member=min(per_member.values()),
        per_member=per_member,
        excluded=tuple(excluded),
    )


# --- significance ------------------------------------------------------------


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p_value: float
    significant_at_05: bool
    variant: str


def compare(
    group_samples: Sequence[float],
    solo_samples: Sequence[float],
    variant: str = "welch",
) -> TTestResult:
    """Two-sample t-test of group vs. solo samples (two-sided).

    Welch by default; "student" uses the pooled-variance form. Degenerate
    zero-variance inputs yield t=0 when the means agree (never significant)
    and an infinite statistic otherwise.
    """
    a, b = list(map(float, group_samples)), list(map(float, solo_samples))
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise InsufficientData("each sample needs at least 2 observations")
    m1, m2 = fmean(a), fmean(b)
    v1 = sum((x - m1) ** 2 for x in a) / (n1 - 1)
    v2 = sum((x - m2) ** 2 for x in b) / (n2 - 1)
    if variant == "welch":
        se2 = v1 / n1 + v2 / n2
        if se2 == 0:
            return _degenerate(m1, m2, float(n1 + n2 - 2), "welch")
        df = se2**2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1))
    elif variant == "student":
        pooled = ((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2)
        se2 = pooled * (1 / n1 + 1 / n2)
        df = float(n1 + n2 - 2)
        if se2 == 0:
            return _degenerate(m1, m2, df, "student")
    else:
        raise ValueError(f"unknown t-test variant {variant!r}")
    t = (m1 - m2) / math.sqrt(se2)
    p = 2 * float(t_dist.sf(abs(t), df))
    return TTestResult(t=t, df=df, p_value=p, significant_at_05=p < 0.05, variant=variant)


def _degenerate(m1: float, m2: float, df: float, variant: str) -> TTestResult:
    if m1 == m2:
        return TTestResult(0.0, df, 1.0, False, variant)
    t = math.copysign(math.inf, m1 - m2)
    return TTestResult(t, df, 0.0, True, variant)


# --- report ------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionStats:
    n: int
    mean_moves: float
    mean_quality: float
    mean_time_s: float


@dataclass(frozen=True)
class Comparison:
    band: str
    kind: str  # quality_vs_average | quality_vs_best | time_vs_average
    group_mean: float
    solo_mean: float
    result: TTestResult | None  # None when a side had too few samples


@dataclass
class MetricsReport:
    bands: list[str]  # bands present, in easy..beyond order, then "overall"
    stats: dict[tuple[str, str], ConditionStats]  # (band, condition) -> stats
    members: dict[tuple[str, str], MemberAggregate]  # (band, metric) -> solo rollup
    comparisons: list[Comparison]
    attrition: int  # puzzles left unsolved at session end (logged, not aggregated)
    ttest_variant: str
    member_mode: str  # per_puzzle | total


def _stats(records: list[SolveRecord]) -> ConditionStats:
    return ConditionStats(
        n=len(records),
        mean_moves=fmean(r.moves for r in records),
        mean_quality=fmean(r.quality for r in records),
        mean_time_s=fmean(r.time_s for r in records),
    )


def build_report(
    records: Sequence[SolveRecord],
    attrition: int = 0,
    ttest_variant: str = "welch",
    per_puzzle_members: bool = True,
) -> MetricsReport:
    """Aggregate validated solve records into the full band/condition report."""
    present = [b for b in BANDS if any(r.band == b for r in records)]
    bands = present + ["overall"]
    stats: dict[tuple[str, str], ConditionStats] = {}
    members: dict[tuple[str, str], MemberAggregate] = {}
    comparisons: list[Comparison] = []
    for b in bands:
        in_band = [r for r in records if b == "overall" or r.band == b]
        for cond in CONDITIONS:
            sub = [r for r in in_band if r.condition == cond]
            if sub:
                stats[(b, cond)] = _stats(sub)
        solo = [r for r in in_band if r.condition == "solo"]
        group = [r for r in in_band if r.condition == "group"]
        if solo:
            for metric in ("moves", "quality", "time_s"):
                members[(b, metric)] = aggregate_solo(
                    records, b, metric, per_puzzle=per_puzzle_members
                )
        if solo and group:
            comparisons.extend(
                _band_comparisons(b, group, solo, members, ttest_variant)
            )
    return MetricsReport(
        bands=bands,
        stats=stats,
        members=members,
        comparisons=comparisons,
        attrition=attrition,
        ttest_variant=ttest_variant,
        member_mode="per_puzzle" if per_puzzle_members else "total",
    )


def _band_comparisons(
    b: str,
    group: list[SolveRecord],
    solo: list[SolveRecord],
    members: dict[tuple[str, str], MemberAggregate],
    variant: str,
) -> list[Comparison]:
    group_q = [r.quality for r in group]
    group_t = [r.time_s for r in group]
    solo_q = [r.quality for r in solo]
    solo_t = [r.time_s for r in solo]
    best = min(
        members[(b, "quality")].per_member, key=members[(b, "quality")].per_member.get
    )
    best_q = [r.quality for r in solo if r.subject == best]
    out = []
    for kind, a_vals, b_vals in (
        ("quality_vs_average", group_q, solo_q),
        ("quality_vs_best", group_q, best_q),
        ("time_vs_average", group_t, solo_t),
    ):
        try:
            res = compare(a_vals, b_vals, variant)
        except InsufficientData:
            res = None
        out.append(
            Comparison(
                band=b,
                kind=kind,
                group_mean=fmean(a_vals),
                solo_mean=fmean(b_vals),
                result=res,
            )
        )
    return out


def build_report_from_logs(
    log_path: str | Path,
    table: DistanceTable | None = None,
    ttest_variant: str = "welch",
    per_puzzle_members: bool = True,
) -> MetricsReport:
    records, attrition = load_records(expand_log_sources(log_path), table)
    return build_report(records, attrition, ttest_variant, per_puzzle_members)


# --- rendering ---------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def render_text(report: MetricsReport) -> str:
    lines = []
    width = 12
    for metric, label in (
        ("mean_moves", "Mean moves per solved puzzle (raw)"),
        ("mean_quality", "Mean solution quality (moves - optimal; 0 is perfect)"),
        ("mean_time_s", "Mean time to solution (seconds)"),
    ):
        member_metric = {
            "mean_moves": "moves",
            "mean_quality": "quality",
            "mean_time_s": "time_s",
        }[metric]
        lines.append(label)
        header = ["band".ljust(8)] + [
            c.rjust(width) for c in ("avg solo", "best solo", "group", "solo n", "group n")
        ]
        lines.append(" ".join(header))
        for b in report.bands:
            solo_stats = report.stats.get((b, "solo"))
            group_stats = report.stats.get((b, "group"))
            agg = report.members.get((b, member_metric))
            row = [b.ljust(8)]
            row.append(_fmt(agg.average_member).rjust(width) if agg else "-".rjust(width))
            row.append(_fmt(agg.best_member).rjust(width) if agg else "-".rjust(width))
            row.append(
                _fmt(getattr(group_stats, metric)).rjust(width) if group_stats else "-".rjust(width)
            )
            row.append(str(solo_stats.n if solo_stats else 0).rjust(width))
            row.append(str(group_stats.n if group_stats else 0).rjust(width))
            lines.append(" ".join(row))
        lines.append("")
    lines.append(
        f"comparisons ({report.ttest_variant} t-test, two-sided, alpha 0.05; "
        f"member rollup: {report.member_mode})"
    )
    for c in report.comparisons:
        if c.result is None:
            verdict = "insufficient data"
        else:
            sig = "significant" if c.result.significant_at_05 else "not significant"
            verdict = (
                f"t={c.result.t:.3f} df={c.result.df:.1f} "
                f"p={c.result.p_value:.4f} ({sig})"
            )
        lines.append(
            f"  {c.band:8s} {c.kind:20s} group={_fmt(c.group_mean)} "
            f"solo={_fmt(c.solo_mean)} {verdict}"
        )
    lines.append("")
    lines.append(f"unsolved puzzles at session end (excluded from means): {report.attrition}")
    return "\n".join(lines) + "\n"


def render_csv(report: MetricsReport) -> str:
    rows = ["band,condition,metric,value"]

    def add(b: str, cond: str, metric: str, value: float | int) -> None:
        v = _fmt(value) if isinstance(value, float) else str(value)
        rows.append(f"{b},{cond},{metric},{v}")

    for b in report.bands:
        for cond in CONDITIONS:
            st = report.stats.get((b, cond))
            if st is None:
                continue
            add(b, cond, "n", st.n)
            add(b, cond, "mean_moves", st.mean_moves)
            add(b, cond, "mean_quality", st.mean_quality)
            add(b, cond, "mean_time_s", st.mean_time_s)
        for metric in ("moves", "quality", "time_s"):
            agg = report.members.get((b, metric))
            if agg is None:
                continue
            add(b, "solo_average_member", f"mean_{metric}", agg.average_member)
            add(b, "solo_best_member", f"mean_{metric}", agg.best_member)
    for c in report.comparisons:
        if c.result is None:
            continue
        add(c.band, "comparison", f"{c.kind}_t", c.result.t)
        add(c.band, "comparison", f"{c.kind}_p", c.result.p_value)
        add(
            c.band,
            "comparison",
            f"{c.kind}_significant",
            int(c.result.significant_at_05),
        )
    return "\n".join(rows) + "\n"
