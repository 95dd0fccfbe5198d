"""Append-only JSONL behavior log: the system of record for replay and analytics.

One file per session, named `<session_id>.jsonl`. The first line is a
header carrying the schema version, the goal encoding, and the full
session config; every further line is one event record with a strictly
increasing per-session sequence number. Timestamps are the engine-injected
ones, so simulated and real logs are format-identical.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from . import board as puzzle
from .board import GOAL_BOARD, Board
from .engine import Mode, SessionConfig
from .events import Event
from .oracle import DistanceTable

SCHEMA_VERSION = 1


class SequenceGap(ValueError):
    pass


class IoFailure(OSError):
    pass


class CorruptLog(ValueError):
    def __init__(self, message: str, seq: int | None = None):
        super().__init__(f"seq {seq}: {message}" if seq is not None else message)
        self.seq = seq


def make_header(session_id: str, mode: Mode, config: SessionConfig) -> dict:
    return {
        "type": "header",
        "schema": SCHEMA_VERSION,
        "goal": list(GOAL_BOARD),
        "session": session_id,
        "mode": mode.value,
        "config": config.to_dict(),
    }


def make_record(event: Event, session_id: str, mode: Mode, seq: int) -> dict:
    return {
        "ts_ms": event.ts_ms,
        "session": session_id,
        "mode": mode.value,
        "seq": seq,
        "event": event.name,
        "payload": event.payload(),
    }


def dump_line(record: dict) -> str:
    return json.dumps(record, separators=(",", ":")) + "\n"


class EventLogWriter:
    """Single-writer append channel for one session's log.

    `flush_each` trades throughput for durability: the live server flushes
    every record before acking, the simulator buffers.
    """

    def __init__(
        self,
        target: str | Path | IO[str],
        session_id: str,
        mode: Mode,
        config: SessionConfig,
        flush_each: bool = True,
    ):
        self.session_id = session_id
        self.mode = mode
        self.flush_each = flush_each
        self._seq = 0
        if isinstance(target, (str, Path)):
            Path(target).parent.mkdir(parents=True, exist_ok=True)
            self._f = open(target, "w", encoding="utf-8")
            self._owns = True
        else:
            self._f = target
            self._owns = False
        self._write(make_header(session_id, mode, config))

    def append_event(self, event: Event) -> int:
        """Append one engine event; returns its assigned sequence number."""
        self._seq += 1
        self._write(make_record(event, self.session_id, self.mode, self._seq))
        return self._seq

    def append_record(self, record: dict) -> None:
        """Append a pre-built record, enforcing the no-gap sequence contract."""
        seq = record.get("seq")
        if seq != self._seq + 1:
            raise SequenceGap(f"expected seq {self._seq + 1}, got {seq}")
        self._seq = seq
        self._write(record)

    def _write(self, record: dict) -> None:
        try:
            self._f.write(dump_line(record))
            if self.flush_each:
                self._f.flush()
        except OSError as e:
            raise IoFailure(f"event log write failed: {e}") from e

    def close(self) -> None:
        if not self._f.closed:
            self._f.flush()
            if self._owns:
                self._f.close()

    def __enter__(self) -> "EventLogWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_log(source: str | Path | Iterable[str]) -> tuple[dict, list[dict]]:
    """Parse one log into (header, records), enforcing sequence contiguity."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as f:
            lines = f.readlines()
    else:
        lines = list(source)
    if not lines:
        raise CorruptLog("empty log")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise CorruptLog(f"unparseable header: {e}") from e
    if header.get("type") != "header":
        raise CorruptLog("first line is not a header record")
    if header.get("schema") != SCHEMA_VERSION:
        raise CorruptLog(f"unsupported schema {header.get('schema')}")
    records = []
    for i, line in enumerate(lines[1:], start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorruptLog(f"unparseable record: {e}", seq=i) from e
        if rec.get("seq") != i:
            raise SequenceGap(f"expected seq {i}, got {rec.get('seq')}")
        records.append(rec)
    return header, records


@dataclass
class SolveOutcome:
    puzzle_id: int
    difficulty: int
    moves: int
    optimal: int
    quality: int
    elapsed_s: float
    solved_ts_ms: int


@dataclass
class ReplayResult:
    session_id: str
    mode: Mode
    config: SessionConfig
    players: list[str]  # current roster after the last record
    roster: list[str]  # every player id ever seen, in join order
    solves: list[SolveOutcome]
    summary: dict | None
    final_board: Board | None  # board of the last unfinished puzzle, if any
    record_count: int = 0
    unsolved_puzzle: int | None = None


def replay(
    header: dict, records: list[dict], table: DistanceTable | None = None
) -> ReplayResult:
    """Re-derive every board state from the log and verify it against the
    logged boards, counters, plurality outcomes, and solve records.

    Raises CorruptLog at the first divergent sequence number.
    """
    if tuple(header.get("goal", ())) != GOAL_BOARD:
        raise CorruptLog("log was written under a different goal convention")
    config = SessionConfig.from_dict(header["config"])
    mode = Mode(header["mode"])
    result = ReplayResult(
        session_id=header["session"],
        mode=mode,
        config=config,
        players=[],
        roster=[],
        solves=[],
        summary=None,
        final_board=None,
    )

    board: Board | None = None
    move_count = 0
    difficulty = None
    appeared_ms = None
    puzzle_id = None
    open_round: int | None = None
    round_deadline = None
    round_votes: dict[str, int] = {}
    last_ts = None

    def fail(msg: str, seq: int) -> CorruptLog:
        return CorruptLog(msg, seq=seq)

    for rec in records:
        seq = rec["seq"]
        ts = rec["ts_ms"]
        ev = rec["event"]
        p = rec.get("payload", {})
        if last_ts is not None and ts < last_ts:
            raise fail(f"timestamp went backwards ({ts} < {last_ts})", seq)
        last_ts = ts

        if ev == "player_joined":
            result.players.append(p["player"])
            if p["player"] not in result.roster:
                result.roster.append(p["player"])
        elif ev == "player_left":
            if p["player"] not in result.players:
                raise fail(f"unknown player left: {p['player']}", seq)
            result.players.remove(p["player"])
            round_votes.pop(p["player"], None)  # in-flight vote is discarded
        elif ev == "puzzle_issued":
            if board is not None:
                raise fail("puzzle issued while another is active", seq)
            board = tuple(p["board"])
            puzzle.validate_board(board)
            difficulty = p["difficulty"]
            puzzle_id = p["puzzle"]
            appeared_ms = ts
            move_count = 0
            if table is not None and table.distances.get(board) != difficulty:
                raise fail(
                    f"issued board is {table.distances.get(board)} moves from goal, "
                    f"not the stated difficulty {difficulty}",
                    seq,
                )
        elif ev == "round_opened":
            if board is None or open_round is not None:
                raise fail("round opened out of order", seq)
            open_round = p["round"]
            round_deadline = p["deadline_ms"]
            round_votes = {}
        elif ev == "vote_cast":
            if open_round is None or p["round"] != open_round:
                raise fail("vote outside an open round", seq)
            if p["tile"] not in puzzle.legal_moves(board):
                raise fail(f"illegal vote for tile {p['tile']}", seq)
            round_votes[p["player"]] = p["tile"]
        elif ev == "vote_tally":
            counts = {str(t): n for t, n in sorted(Counter(round_votes.values()).items())}
            if p["counts"] != counts:
                raise fail(f"tally {p['counts']} does not match votes {counts}", seq)
        elif ev == "move_executed":
            if open_round is None or p["round"] != open_round:
                raise fail("move without a matching open round", seq)
            if ts > round_deadline:
                raise fail("move executed after the round deadline", seq)
            tile = p["tile"]
            if round_votes and tile not in _plurality_set(round_votes):
                raise fail(f"executed tile {tile} is not a plurality winner", seq)
            try:
                board = puzzle.apply_move(board, tile)
            except puzzle.IllegalMove as e:
                raise fail(str(e), seq) from e
            move_count += 1
            if tuple(p["board"]) != board:
                raise fail("logged board diverges from replayed board", seq)
            if p["move_count"] != move_count:
                raise fail(
                    f"move_count {p['move_count']} != replayed {move_count}", seq
                )
            open_round = None
        elif ev == "pass":
            if open_round is None or p["round"] != open_round:
                raise fail("pass without a matching open round", seq)
            if round_votes:
                raise fail("round passed despite cast votes", seq)
            move_count += 1
            if p["move_count"] != move_count:
                raise fail(
                    f"move_count {p['move_count']} != replayed {move_count}", seq
                )
            open_round = None
        elif ev == "puzzle_solved":
            if board is None or not puzzle.is_goal(board):
                raise fail("solve recorded but replayed board is not the goal", seq)
            if p["moves"] != move_count:
                raise fail(f"solve moves {p['moves']} != replayed {move_count}", seq)
            optimal = p["optimal"]
            if table is not None and optimal != difficulty:
                raise fail(f"optimal {optimal} != issued difficulty {difficulty}", seq)
            if p["quality"] != p["moves"] - optimal:
                raise fail("quality != moves - optimal", seq)
            elapsed = (ts - appeared_ms) / 1000
            if abs(p["elapsed_s"] - elapsed) > 1e-9:
                raise fail(f"elapsed {p['elapsed_s']} != {elapsed}", seq)
            result.solves.append(
                SolveOutcome(
                    puzzle_id=p["puzzle"],
                    difficulty=p["difficulty"],
                    moves=p["moves"],
                    optimal=optimal,
                    quality=p["quality"],
                    elapsed_s=p["elapsed_s"],
                    solved_ts_ms=ts,
                )
            )
            board = None
            difficulty = None
        elif ev == "session_end":
            result.summary = p["summary"]
        else:
            raise fail(f"unknown event type {ev!r}", seq)
        result.record_count = seq

    if board is not None:
        result.final_board = board
        result.unsolved_puzzle = puzzle_id
    return result


def _plurality_set(votes: dict[str, int]) -> set[int]:
    tally = Counter(votes.values())
    top = max(tally.values())
    return {t for t, n in tally.items() if n == top}


def write_session_log(
    path: str | Path,
    session_id: str,
    mode: Mode,
    config: SessionConfig,
    events: Iterable[Event],
) -> Path:
    """Write a complete in-memory event stream as one log file."""
    path = Path(path)
    with EventLogWriter(path, session_id, mode, config, flush_each=False) as w:
        for ev in events:
            w.append_event(ev)
    return path
