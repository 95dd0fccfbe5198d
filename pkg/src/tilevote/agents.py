"""Skill-parameterized synthetic voters.

An agent votes for a strictly distance-decreasing move with probability
`skill` and uniformly over all legal moves otherwise. Optional tally
reactivity: when the feedback display shows a different leading tile, the
agent switches to it with probability `persistence` (0 disables this, so
baseline runs do not depend on the invented behavior).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .board import Board, neighbors
from .oracle import DistanceTable


@dataclass(frozen=True)
class AgentProfile:
    agent_id: str
    skill: float  # probability of picking a distance-decreasing move
    latency_range: tuple[float, float]  # seconds from round open to vote
    persistence: float = 0.0  # probability of chasing the tally leader
    seed: int = 0

    def validate(self, round_seconds: float) -> None:
        lo, hi = self.latency_range
        if not 0.0 <= self.skill <= 1.0:
            raise ValueError(f"skill {self.skill} outside [0, 1]")
        if not 0.0 <= self.persistence <= 1.0:
            raise ValueError(f"persistence {self.persistence} outside [0, 1]")
        if not 0 <= lo <= hi <= round_seconds:
            raise ValueError(
                f"latency range {self.latency_range} outside [0, {round_seconds}]"
            )


def tally_leader(counts: dict[str, int]) -> int:
    """Leading tile of a feedback tally (lowest tile wins display ties)."""
    top = max(counts.values())
    return min(int(t) for t, n in counts.items() if n == top)


def agent_decide(
    profile: AgentProfile,
    board: Board,
    table: DistanceTable,
    rng: random.Random,
    tally: dict[str, int] | None = None,
    current_vote: int | None = None,
) -> int:
    """Pick the tile this agent votes for.

    With a tally and an existing vote this is a reaction decision: keep the
    current vote unless persistence triggers a switch to the leader.
    """
    if tally is not None and current_vote is not None:
        leader = tally_leader(tally)
        if leader != current_vote and rng.random() < profile.persistence:
            return leader
        return current_vote
    d = table.distances[board]
    options = neighbors(board)
    decreasing = [t for t, nb in options if table.distances[nb] < d]
    if decreasing and rng.random() < profile.skill:
        return rng.choice(decreasing)
    return rng.choice([t for t, _ in options])


def sample_latency_ms(profile: AgentProfile, rng: random.Random) -> int:
    lo, hi = profile.latency_range
    return round(rng.uniform(lo, hi) * 1000)
