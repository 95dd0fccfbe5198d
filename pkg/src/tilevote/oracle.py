"""Exact optimal-distance oracle over the full reachable 8-puzzle space.

A single retrograde breadth-first sweep from the goal labels every one of
the 181,440 reachable boards with its optimal distance. The whole table
fits in memory, so lookups are O(1) and the difficulty-graded generator
can sample uniformly from exact-distance buckets.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .board import GOAL_BOARD, Board, neighbors, validate_board

REACHABLE_STATES = 181440  # 9!/2

EASY_MAX = 8
HARD_MAX = 16

_CACHE_SCHEMA = 1
_UNREACHABLE = 0xFF


class Unsolvable(ValueError):
    """Board is not in the goal's reachability class."""


class NoSuchDifficulty(ValueError):
    """Requested difficulty exceeds the maximum distance in the table."""


def band(difficulty: int) -> str:
    """Difficulty band label: easy (1-8), hard (9-16), beyond (17+)."""
    if difficulty <= EASY_MAX:
        return "easy"
    if difficulty <= HARD_MAX:
        return "hard"
    return "beyond"


@dataclass
class DistanceTable:
    distances: dict[Board, int]
    by_distance: list[list[Board]] = field(repr=False)

    @property
    def max_distance(self) -> int:
        return len(self.by_distance) - 1

    def __len__(self) -> int:
        return len(self.distances)

    def __contains__(self, b: Board) -> bool:
        return b in self.distances


def build_distance_table() -> DistanceTable:
    """BFS backward from the goal over all reachable states."""
    distances: dict[Board, int] = {GOAL_BOARD: 0}
    by_distance: list[list[Board]] = [[GOAL_BOARD]]
    frontier = [GOAL_BOARD]
    while frontier:
        nxt = []
        for b in frontier:
            for _, nb in neighbors(b):
                if nb not in distances:
                    distances[nb] = len(by_distance)
                    nxt.append(nb)
        if nxt:
            nxt.sort()  # stable bucket order for seeded sampling
            by_distance.append(nxt)
        frontier = nxt
    return DistanceTable(distances, by_distance)


def optimal_distance(table: DistanceTable, b: Board) -> int:
    """Exact minimal move count from b to the goal."""
    d = table.distances.get(tuple(b))
    if d is None:
        validate_board(tuple(b))
        raise Unsolvable(f"board {b} is not reachable from the goal")
    return d


def generate_puzzle(table: DistanceTable, difficulty: int, rng_seed: int) -> Board:
    """A board at exactly `difficulty` optimal moves, uniform under the seed."""
    if difficulty < 1 or difficulty > table.max_distance:
        raise NoSuchDifficulty(
            f"difficulty {difficulty} outside 1..{table.max_distance}"
        )
    bucket = table.by_distance[difficulty]
    return random.Random(rng_seed).choice(bucket)


def greedy_path(table: DistanceTable, b: Board) -> list[int]:
    """A shortest move sequence from b to the goal (lowest tile on ties).

    Follows strictly distance-decreasing moves, so its length is exactly
    the optimal distance of b.
    """
    d = optimal_distance(table, b)
    path = []
    while d > 0:
        tile, nb = min(
            (t, n) for t, n in neighbors(b) if table.distances[n] == d - 1
        )
        path.append(tile)
        b, d = nb, d - 1
    return path


def derive_seed(*parts: object) -> int:
    """Stable 64-bit sub-seed from a tuple of labels (master seed, indices...)."""
    text = ":".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


# --- optional on-disk cache -------------------------------------------------
#
# Header line of JSON (schema, goal, max distance), then one byte per
# permutation in Lehmer-rank order: its distance, or 0xFF if unreachable.

_FACTORIALS = [1, 1, 2, 6, 24, 120, 720, 5040, 40320]


def _rank(b: Board) -> int:
    cells = list(b)
    r = 0
    for i in range(9):
        smaller = sum(1 for v in cells[i + 1 :] if v < cells[i])
        r += smaller * _FACTORIALS[8 - i]
    return r


def _unrank(r: int) -> Board:
    pool = [0, 1, 2, 3, 4, 5, 6, 7, 8]
    out = []
    for i in range(9):
        f = _FACTORIALS[8 - i]
        idx, r = divmod(r, f)
        out.append(pool.pop(idx))
    return tuple(out)


def save_table(table: DistanceTable, path: str | Path) -> None:
    header = {
        "schema": _CACHE_SCHEMA,
        "goal": list(GOAL_BOARD),
        "max_distance": table.max_distance,
        "states": len(table),
    }
    blob = bytearray([_UNREACHABLE]) * 362880  # one byte per permutation rank
    for b, d in table.distances.items():
        blob[_rank(b)] = d
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(json.dumps(header, separators=(",", ":")).encode() + b"\n")
        f.write(bytes(blob))


def load_table(path: str | Path) -> DistanceTable:
    """Load a cached table, validating its embedded goal encoding."""
    with open(path, "rb") as f:
        header = json.loads(f.readline())
        blob = f.read()
    if header.get("schema") != _CACHE_SCHEMA:
        raise ValueError(f"unsupported cache schema: {header.get('schema')}")
    if tuple(header.get("goal", ())) != GOAL_BOARD:
        raise ValueError("cache was built for a different goal convention")
    if len(blob) != 362880:
        raise ValueError("truncated distance cache")
    distances: dict[Board, int] = {}
    by_distance: list[list[Board]] = [[] for _ in range(header["max_distance"] + 1)]
    for r, d in enumerate(blob):
        if d == _UNREACHABLE:
            continue
        b = _unrank(r)
        distances[b] = d
        by_distance[d].append(b)
    # Lehmer-rank order is lexicographic, so buckets arrive already sorted.
    return DistanceTable(distances, by_distance)


def load_or_build(cache_path: str | Path | None = None) -> DistanceTable:
    """Use the cache when present and valid, rebuilding (and re-caching) otherwise."""
    if cache_path is None:
        return build_distance_table()
    cache_path = Path(cache_path)
    if cache_path.exists():
        try:
            return load_table(cache_path)
        except (ValueError, OSError):
            pass  # fall through to rebuild
    table = build_distance_table()
    save_table(table, cache_path)
    return table
