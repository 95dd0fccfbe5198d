"""Typed session events, shared by the engine, server, simulator, and event log.

Every event carries the engine-injected timestamp (virtual in simulation,
wall-clock in the live server), so logs from both sources are
format-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import ClassVar

from .board import Board


@dataclass(frozen=True)
class Event:
    name: ClassVar[str] = ""
    ts_ms: int

    def payload(self) -> dict:
        """Event-specific fields as a JSON-ready dict (boards become lists)."""
        out = {}
        for f in fields(self):
            if f.name == "ts_ms":
                continue
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out


@dataclass(frozen=True)
class PlayerJoined(Event):
    name: ClassVar[str] = "player_joined"
    player: str


@dataclass(frozen=True)
class PlayerLeft(Event):
    name: ClassVar[str] = "player_left"
    player: str


@dataclass(frozen=True)
class PuzzleIssued(Event):
    name: ClassVar[str] = "puzzle_issued"
    puzzle: int
    difficulty: int
    board: Board


@dataclass(frozen=True)
class RoundOpened(Event):
    name: ClassVar[str] = "round_opened"
    puzzle: int
    round: int
    deadline_ms: int


@dataclass(frozen=True)
class VoteCast(Event):
    name: ClassVar[str] = "vote_cast"
    round: int
    player: str
    tile: int


@dataclass(frozen=True)
class VoteTally(Event):
    name: ClassVar[str] = "vote_tally"
    round: int
    counts: dict[str, int]  # tile (as string, JSON-object key) -> votes


@dataclass(frozen=True)
class MoveExecuted(Event):
    name: ClassVar[str] = "move_executed"
    round: int
    tile: int
    board: Board
    move_count: int


@dataclass(frozen=True)
class RoundPassed(Event):
    name: ClassVar[str] = "pass"
    round: int
    move_count: int


@dataclass(frozen=True)
class PuzzleSolved(Event):
    name: ClassVar[str] = "puzzle_solved"
    puzzle: int
    difficulty: int
    moves: int
    optimal: int
    quality: int
    elapsed_s: float


@dataclass(frozen=True)
class SessionEnded(Event):
    name: ClassVar[str] = "session_end"
    summary: dict
