"""Session state machine for solo and group play.

One session runs a sequence of puzzles of stepwise-increasing difficulty
inside a fixed time budget. Each move is decided in a timed round: solo
players move immediately, groups vote and the plurality tile is executed
when the quorum is met or the round deadline passes, whichever comes
first. A round that times out with no votes still consumes a move.

The engine never reads a wall clock. Every operation takes the caller's
timestamp (epoch milliseconds, virtual or real), so identical command
sequences produce identical state and events, and the real-time server
and the discrete-event simulator share this module unchanged.

Callers must serialize all operations on one session (one command queue
per session); there is no internal locking.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, asdict
from enum import Enum
import random

from . import board as puzzle
from .board import Board
from .events import (
    Event,
    MoveExecuted,
    PlayerJoined,
    PlayerLeft,
    PuzzleIssued,
    PuzzleSolved,
    RoundOpened,
    RoundPassed,
    SessionEnded,
    VoteCast,
    VoteTally,
)
from .oracle import DistanceTable, derive_seed, generate_puzzle


class Mode(str, Enum):
    SOLO = "solo"
    GROUP = "group"


class Quorum(str, Enum):
    ALL = "all"
    MAJORITY = "majority"


class TieBreak(str, Enum):
    LOWEST_TILE = "lowest"
    SEEDED_RANDOM = "random"


class EngineError(Exception):
    pass


class BadConfig(EngineError):
    pass


class NotParticipant(EngineError):
    pass


class RoundClosed(EngineError):
    """Vote arrived for a round that is no longer (or not yet) open."""


class SessionOver(EngineError):
    pass


@dataclass(frozen=True)
class SessionConfig:
    mode: Mode = Mode.GROUP
    round_seconds: float = 30.0
    session_minutes: float = 30.0
    inter_puzzle_delay: float = 5.0
    start_difficulty: int = 1
    difficulty_step: int = 1
    feedback_enabled: bool = True
    quorum: Quorum = Quorum.ALL
    tie_break: TieBreak = TieBreak.LOWEST_TILE
    rng_seed: int = 0

    def validate(self) -> None:
        if self.round_seconds <= 0 or self.session_minutes <= 0 or self.inter_puzzle_delay <= 0:
            raise BadConfig("durations must be positive")
        if self.start_difficulty < 1:
            raise BadConfig("start_difficulty must be >= 1")
        if self.difficulty_step < 1:
            raise BadConfig("difficulty_step must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, Enum):
                d[k] = v.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SessionConfig":
        kwargs = dict(d)
        if "mode" in kwargs:
            kwargs["mode"] = Mode(kwargs["mode"])
        if "quorum" in kwargs:
            kwargs["quorum"] = Quorum(kwargs["quorum"])
        if "tie_break" in kwargs:
            kwargs["tie_break"] = TieBreak(kwargs["tie_break"])
        unknown = set(kwargs) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise BadConfig(f"unknown config fields: {sorted(unknown)}")
        return cls(**kwargs)


@dataclass
class VoteRound:
    round_id: int
    deadline_ms: int
    eligible: set[str]  # participants present when the round opened
    votes: dict[str, int] = field(default_factory=dict)  # latest vote per player

    def counts(self) -> dict[str, int]:
        tally = Counter(self.votes.values())
        return {str(tile): tally[tile] for tile in sorted(tally)}


@dataclass
class PuzzleRun:
    puzzle_id: int
    initial_board: Board
    current_board: Board
    difficulty: int
    appeared_ms: int
    move_count: int = 0
    round: VoteRound | None = None


def resolve_round(
    votes: dict[str, int], config: SessionConfig, round_rng: random.Random | None = None
) -> int | None:
    """Plurality winner of a vote set, or None (pass) when nobody voted.

    Ties go to the smallest tile number, or to a uniform pick from
    `round_rng` under the seeded-random policy.
    """
    if not votes:
        return None
    tally = Counter(votes.values())
    top = max(tally.values())
    tied = sorted(t for t, n in tally.items() if n == top)
    if len(tied) == 1 or config.tie_break is TieBreak.LOWEST_TILE:
        return tied[0]
    if round_rng is None:
        round_rng = random.Random(config.rng_seed)
    return round_rng.choice(tied)


class Session:
    """One solo or group run. All mutations go through the public operations."""

    def __init__(
        self,
        config: SessionConfig,
        players: list[str],
        now_ms: int,
        table: DistanceTable,
        session_id: str = "session",
    ):
        config.validate()
        players = list(players)
        if not players:
            raise BadConfig("a session needs at least one player")
        if len(set(players)) != len(players):
            raise BadConfig("duplicate player ids")
        if config.mode is Mode.SOLO and len(players) != 1:
            raise BadConfig("solo sessions have exactly one player")

        self.session_id = session_id
        self.config = config
        self.table = table
        self.participants: list[str] = players
        self.started_ms = now_ms
        self.deadline_ms = now_ms + round(config.session_minutes * 60_000)
        self.ended = False
        self.run: PuzzleRun | None = None
        self.idle_until_ms: int | None = None
        self.solved_count = 0
        self.total_moves = 0
        self._puzzle_seq = 0
        self._round_seq = 0
        self._round_ms = round(config.round_seconds * 1000)
        self._delay_ms = round(config.inter_puzzle_delay * 1000)
        self._pending: list[Event] = [PlayerJoined(now_ms, p) for p in players]
        self._issue_puzzle(now_ms)

    # -- public operations ----------------------------------------------

    def submit_vote(
        self, player: str, tile: int, now_ms: int, round_id: int | None = None
    ) -> list[Event]:
        """Record (or overwrite) a player's vote; solo votes execute immediately.

        Group rounds close as soon as the quorum condition is met.
        """
        self._advance(now_ms)
        rnd = self.run.round if self.run else None
        if self.ended or rnd is None:
            raise RoundClosed("no round is open")
        if player not in self.participants:
            raise NotParticipant(f"{player} is not in this session")
        if round_id is not None and round_id != rnd.round_id:
            raise RoundClosed(f"round {round_id} is over (current: {rnd.round_id})")
        if player not in rnd.eligible:
            raise RoundClosed("joined mid-round; wait for the next round")
        if tile not in puzzle.legal_moves(self.run.current_board):
            raise puzzle.IllegalMove(f"tile {tile} is not adjacent to the blank")

        if self.config.mode is Mode.SOLO:
            self._execute(tile, now_ms)
        else:
            rnd.votes[player] = tile
            self._emit(VoteCast(now_ms, rnd.round_id, player, tile))
            if self.config.feedback_enabled:
                self._emit(VoteTally(now_ms, rnd.round_id, rnd.counts()))
            if self._quorum_met(rnd):
                self._close_round(now_ms)
        return self._drain()

    def tick(self, now_ms: int) -> list[Event]:
        """Drive every time-based transition due at or before now_ms.

        Idempotent between transitions; a no-op on an ended session.
        """
        self._advance(now_ms)
        return self._drain()

    def add_player(self, player: str, now_ms: int) -> list[Event]:
        """Join a group session; the newcomer votes from the next round on."""
        self._advance(now_ms)
        if self.ended:
            raise SessionOver("session already ended")
        if self.config.mode is Mode.SOLO:
            raise BadConfig("solo sessions are single-player")
        if player in self.participants:
            raise BadConfig(f"player id {player} already in session")
        self.participants.append(player)
        self._emit(PlayerJoined(now_ms, player))
        return self._drain()

    def remove_player(self, player: str, now_ms: int) -> list[Event]:
        """Drop a player: discard their in-flight vote, shrink quorum, maybe end."""
        self._advance(now_ms)
        if self.ended or player not in self.participants:
            return self._drain()
        self.participants.remove(player)
        self._emit(PlayerLeft(now_ms, player))
        rnd = self.run.round if self.run else None
        if rnd is not None:
            rnd.eligible.discard(player)
            rnd.votes.pop(player, None)
        if not self.participants:
            self._end(now_ms, reason="empty")
        elif rnd is not None and self._quorum_met(rnd):
            self._close_round(now_ms)
        return self._drain()

    def next_transition_ms(self) -> int | None:
        """When the next time-based transition is due (None once ended)."""
        nxt = self._next_transition()
        return nxt[0] if nxt else None

    # -- internals --------------------------------------------------------

    def _quorum_met(self, rnd: VoteRound) -> bool:
        if self.config.quorum is Quorum.ALL:
            return len(rnd.votes) >= len(rnd.eligible)
        return len(rnd.votes) > len(rnd.eligible) / 2

    def _next_transition(self) -> tuple[int, int] | None:
        if self.ended:
            return None
        # Priority at equal timestamps: a round decision made exactly at the
        # session deadline still counts; a new puzzle at the deadline does not.
        candidates = [(self.deadline_ms, 1)]
        if self.run is not None and self.run.round is not None:
            candidates.append((self.run.round.deadline_ms, 0))
        if self.idle_until_ms is not None:
            candidates.append((self.idle_until_ms, 2))
        return min(candidates)

    def _advance(self, now_ms: int) -> None:
        while True:
            nxt = self._next_transition()
            if nxt is None or nxt[0] > now_ms:
                return
            at, kind = nxt
            if kind == 0:
                self._close_round(at)
            elif kind == 1:
                self._end(at, reason="deadline")
            else:
                self.idle_until_ms = None
                self._issue_puzzle(at)

    def _issue_puzzle(self, now_ms: int) -> None:
        self._puzzle_seq += 1
        wanted = self.config.start_difficulty + self.config.difficulty_step * (
            self._puzzle_seq - 1
        )
        # The table is finite; sessions that outrun it stay at the hardest level.
        difficulty = min(wanted, self.table.max_distance)
        seed = derive_seed(self.config.rng_seed, "puzzle", self._puzzle_seq)
        b = generate_puzzle(self.table, difficulty, seed)
        self.run = PuzzleRun(
            puzzle_id=self._puzzle_seq,
            initial_board=b,
            current_board=b,
            difficulty=difficulty,
            appeared_ms=now_ms,
        )
        self._emit(PuzzleIssued(now_ms, self._puzzle_seq, difficulty, b))
        self._open_round(now_ms)

    def _open_round(self, now_ms: int) -> None:
        self._round_seq += 1
        self.run.round = VoteRound(
            round_id=self._round_seq,
            deadline_ms=now_ms + self._round_ms,
            eligible=set(self.participants),
        )
        self._emit(
            RoundOpened(now_ms, self.run.puzzle_id, self._round_seq, self.run.round.deadline_ms)
        )

    def _close_round(self, at_ms: int) -> None:
        rnd = self.run.round
        self.run.round = None
        rng = random.Random(derive_seed(self.config.rng_seed, "round", rnd.round_id))
        tile = resolve_round(rnd.votes, self.config, rng)
        if tile is None:
            # Timed out with no votes: the move counter still advances.
            self.run.move_count += 1
            self.total_moves += 1
            self._emit(RoundPassed(at_ms, rnd.round_id, self.run.move_count))
            self._open_round(at_ms)
        else:
            self._execute(tile, at_ms, rnd.round_id)

    def _execute(self, tile: int, at_ms: int, round_id: int | None = None) -> None:
        run = self.run
        if round_id is None:
            round_id = run.round.round_id
        run.round = None
        run.current_board = puzzle.apply_move(run.current_board, tile)
        run.move_count += 1
        self.total_moves += 1
        self._emit(MoveExecuted(at_ms, round_id, tile, run.current_board, run.move_count))
        if puzzle.is_goal(run.current_board):
            self._solved(at_ms)
        else:
            self._open_round(at_ms)

    def _solved(self, at_ms: int) -> None:
        run = self.run
        elapsed_ms = at_ms - run.appeared_ms
        self._emit(
            PuzzleSolved(
                at_ms,
                puzzle=run.puzzle_id,
                difficulty=run.difficulty,
                moves=run.move_count,
                optimal=run.difficulty,
                quality=run.move_count - run.difficulty,
                elapsed_s=elapsed_ms / 1000,
            )
        )
        self.solved_count += 1
        self.run = None
        self.idle_until_ms = at_ms + self._delay_ms

    def _end(self, at_ms: int, reason: str) -> None:
        self.ended = True
        summary = {
            "reason": reason,
            "puzzles_solved": self.solved_count,
            "total_moves": self.total_moves,
            "unsolved_puzzle": self.run.puzzle_id if self.run else None,
            "duration_s": (at_ms - self.started_ms) / 1000,
        }
        self.run = None
        self.idle_until_ms = None
        self._emit(SessionEnded(at_ms, summary))

    def _emit(self, ev: Event) -> None:
        self._pending.append(ev)

    def _drain(self) -> list[Event]:
        out, self._pending = self._pending, []
        return out


def start_session(
    config: SessionConfig,
    players: list[str],
    now_ms: int,
    table: DistanceTable,
    session_id: str = "session",
) -> tuple[Session, list[Event]]:
    """Create a running session with its first puzzle issued and round open."""
    s = Session(config, players, now_ms, table, session_id)
    return s, s._drain()
