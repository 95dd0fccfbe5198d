"""Deterministic discrete-event replication of the group-vs-solo experiment.

Synthetic voters drive the exact same session engine the live server uses,
under a virtual clock: agent votes are scheduled at sampled latencies and
the engine is ticked at its own transition times, never in between. A full
simulated 30-minute session finishes in milliseconds of wall time, and a
fixed plan plus seed reproduces logs byte for byte.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from statistics import fmean

from .agents import AgentProfile, agent_decide, sample_latency_ms
from .engine import Mode, SessionConfig, start_session
from .eventlog import make_header, make_record, write_session_log
from .events import Event, RoundOpened, VoteTally
from .metrics import (
    InsufficientData,
    MetricsReport,
    SolveRecord,
    TTestResult,
    aggregate_solo,
    build_report,
    compare,
    extract_records,
)
from .oracle import DistanceTable, derive_seed

CONDITIONS = ("group", "solo")


@dataclass(frozen=True)
class ExperimentPlan:
    agents: list[AgentProfile]
    config: SessionConfig  # shared across conditions; mode is set per condition
    trials: int = 1
    master_seed: int = 0

    def validate(self) -> None:
        if not self.agents:
            raise ValueError("plan needs at least one agent")
        if len({a.agent_id for a in self.agents}) != len(self.agents):
            raise ValueError("duplicate agent ids")
        for a in self.agents:
            a.validate(self.config.round_seconds)


@dataclass
class SessionLog:
    session_id: str
    mode: Mode
    config: SessionConfig
    trial: int
    events: list[Event]

    def as_log(self) -> tuple[dict, list[dict]]:
        header = make_header(self.session_id, self.mode, self.config)
        records = [
            make_record(ev, self.session_id, self.mode, i)
            for i, ev in enumerate(self.events, start=1)
        ]
        return header, records


def simulate_session(
    table: DistanceTable,
    config: SessionConfig,
    profiles: list[AgentProfile],
    session_id: str,
    agent_seed_parts: tuple,
) -> list[Event]:
    """Run one full session as a discrete-event loop; returns its event log.

    Agent RNG streams are seeded independently of the condition so a single
    agent behaves identically whether it plays solo or in a group of one.
    """
    session, start_events = start_session(
        config, [p.agent_id for p in profiles], 0, table, session_id
    )
    log: list[Event] = []
    rngs = {
        p.agent_id: random.Random(derive_seed(*agent_seed_parts, p.agent_id))
        for p in profiles
    }
    heap: list[tuple[int, int, str, int, int]] = []  # (ts, tiebreak, agent, round, tile)
    seq = 0
    votes: dict[str, int] = {}

    def schedule(ts: int, agent_id: str, round_id: int, tile: int) -> None:
        nonlocal seq
        seq += 1
        heapq.heappush(heap, (ts, seq, agent_id, round_id, tile))

    def current_round_board(round_id: int):
        rnd = session.run.round if session.run else None
        if rnd is None or rnd.round_id != round_id:
            return None  # the round already closed within this event batch
        return session.run.current_board

    def on_events(evs: list[Event]) -> None:
        log.extend(evs)
        for ev in evs:
            if isinstance(ev, RoundOpened):
                board = current_round_board(ev.round)
                if board is None:
                    continue
                votes.clear()
                for p in profiles:
                    rng = rngs[p.agent_id]
                    latency = sample_latency_ms(p, rng)
                    tile = agent_decide(p, board, table, rng)
                    schedule(ev.ts_ms + latency, p.agent_id, ev.round, tile)
            elif isinstance(ev, VoteTally):
                if all(p.persistence <= 0 for p in profiles):
                    continue
                board = current_round_board(ev.round)
                if board is None:
                    continue
                for p in profiles:
                    cv = votes.get(p.agent_id)
                    if p.persistence <= 0 or cv is None:
                        continue
                    rng = rngs[p.agent_id]
                    choice = agent_decide(p, board, table, rng, ev.counts, cv)
                    if choice != cv:
                        schedule(
                            ev.ts_ms + sample_latency_ms(p, rng),
                            p.agent_id,
                            ev.round,
                            choice,
                        )

    on_events(start_events)
    while not session.ended:
        if not heap:
            nt = session.next_transition_ms()
            on_events(session.tick(nt))
            continue
        ts, _, agent_id, round_id, tile = heapq.heappop(heap)
        nt = session.next_transition_ms()
        if nt is not None and nt <= ts:
            # the engine transition comes first; the vote may now be stale
            on_events(session.tick(ts))
        if session.ended:
            break
        rnd = session.run.round if session.run else None
        if rnd is None or rnd.round_id != round_id or agent_id not in rnd.eligible:
            continue  # stale vote for a finished round
        votes[agent_id] = tile
        on_events(session.submit_vote(agent_id, tile, ts, round_id))
    return log


def run_condition(
    plan: ExperimentPlan, table: DistanceTable, condition: str, trial: int
) -> list[SessionLog]:
    """All sessions of one condition for one trial (one group run, or one
    solo run per agent), with trial-stable session seeds so both conditions
    see the same puzzle sequence."""
    session_seed = derive_seed(plan.master_seed, "session", trial)
    agent_parts = (plan.master_seed, "agents", trial)
    out = []
    if condition == "group":
        cfg = replace(plan.config, mode=Mode.GROUP, rng_seed=session_seed)
        sid = f"g{trial:03d}"
        events = simulate_session(table, cfg, plan.agents, sid, agent_parts)
        out.append(SessionLog(sid, Mode.GROUP, cfg, trial, events))
    else:
        cfg = replace(plan.config, mode=Mode.SOLO, rng_seed=session_seed)
        for p in plan.agents:
            sid = f"s{trial:03d}-{p.agent_id}"
            events = simulate_session(table, cfg, [p], sid, agent_parts)
            out.append(SessionLog(sid, Mode.SOLO, cfg, trial, events))
    return out


@dataclass
class TrialStats:
    trial: int
    group_quality: dict[str, float] = field(default_factory=dict)  # band -> mean
    avg_member_quality: dict[str, float] = field(default_factory=dict)
    best_member_quality: dict[str, float] = field(default_factory=dict)
    group_time: dict[str, float] = field(default_factory=dict)
    avg_member_time: dict[str, float] = field(default_factory=dict)
    solo_time: dict[str, float] = field(default_factory=dict)  # pooled over solves


@dataclass
class ExperimentResult:
    plan: ExperimentPlan
    logs: list[SessionLog]
    records: list[SolveRecord]
    attrition: int
    report: MetricsReport
    trial_stats: list[TrialStats]

    def trial_samples(self, band: str, measure: str) -> tuple[list[float], list[float]]:
        """Per-trial (group, solo) sample vectors for a measure, dropping
        trials where either side has no solves in the band."""
        group_key, solo_key = {
            "quality_vs_average": ("group_quality", "avg_member_quality"),
            "quality_vs_best": ("group_quality", "best_member_quality"),
            "time_vs_average": ("group_time", "avg_member_time"),
            "time_vs_solo": ("group_time", "solo_time"),
        }[measure]
        g, s = [], []
        for t in self.trial_stats:
            gv = getattr(t, group_key).get(band)
            sv = getattr(t, solo_key).get(band)
            if gv is not None and sv is not None:
                g.append(gv)
                s.append(sv)
        return g, s

    def trial_comparison(
        self, band: str, measure: str, variant: str = "welch"
    ) -> tuple[float, float, TTestResult | None]:
        g, s = self.trial_samples(band, measure)
        try:
            res = compare(g, s, variant)
        except InsufficientData:
            res = None
        return (fmean(g) if g else float("nan"), fmean(s) if s else float("nan"), res)


def _bands_present(records: list[SolveRecord]) -> list[str]:
    present = [b for b in ("easy", "hard", "beyond") if any(r.band == b for r in records)]
    return present + ["overall"]


def _trial_stats(trial: int, records: list[SolveRecord]) -> TrialStats:
    stats = TrialStats(trial)
    group = [r for r in records if r.condition == "group"]
    solo = [r for r in records if r.condition == "solo"]
    for band in _bands_present(records):
        g_in = [r for r in group if band == "overall" or r.band == band]
        if g_in:
            stats.group_quality[band] = fmean(r.quality for r in g_in)
            stats.group_time[band] = fmean(r.time_s for r in g_in)
        s_in = [r for r in solo if band == "overall" or r.band == band]
        if s_in:
            q = aggregate_solo(solo, band, "quality")
            t = aggregate_solo(solo, band, "time_s")
            stats.avg_member_quality[band] = q.average_member
            stats.best_member_quality[band] = q.best_member
            stats.avg_member_time[band] = t.average_member
            stats.solo_time[band] = fmean(r.time_s for r in s_in)
    return stats


def run_experiment(
    plan: ExperimentPlan,
    table: DistanceTable,
    out_dir: str | Path | None = None,
) -> ExperimentResult:
    """Run every trial of both conditions, validate the logs by replay, and
    aggregate. Optionally writes one JSONL log per session plus nothing else
    (reports are the caller's concern)."""
    plan.validate()
    logs: list[SessionLog] = []
    for trial in range(plan.trials):
        for condition in CONDITIONS:
            logs.extend(run_condition(plan, table, condition, trial))
    all_records: list[SolveRecord] = []
    attrition = 0
    per_trial: dict[int, list[SolveRecord]] = {t: [] for t in range(plan.trials)}
    for slog in logs:
        header, records = slog.as_log()
        recs, unsolved = extract_records(header, records, table)
        all_records.extend(recs)
        attrition += unsolved
        per_trial[slog.trial].extend(recs)
    if out_dir is not None:
        out_dir = Path(out_dir)
        for slog in logs:
            sub = out_dir / slog.mode.value
            write_session_log(
                sub / f"{slog.session_id}.jsonl",
                slog.session_id,
                slog.mode,
                slog.config,
                slog.events,
            )
    return ExperimentResult(
        plan=plan,
        logs=logs,
        records=all_records,
        attrition=attrition,
        report=build_report(all_records, attrition),
        trial_stats=[_trial_stats(t, recs) for t, recs in sorted(per_trial.items())],
    )


def default_plan(
    skills: list[float],
    latency: tuple[float, float] = (2.0, 20.0),
    trials: int = 30,
    master_seed: int = 42,
    persistence: float = 0.0,
    config: SessionConfig | None = None,
) -> ExperimentPlan:
    agents = [
        AgentProfile(f"a{i}", skill, latency, persistence, seed=i)
        for i, skill in enumerate(skills)
    ]
    return ExperimentPlan(
        agents=agents,
        config=config or SessionConfig(),
        trials=trials,
        master_seed=master_seed,
    )
