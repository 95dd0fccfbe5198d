"""8-puzzle domain model: boards, legal tile slides, goal convention, solvability.

A board is an immutable tuple of 9 ints in row-major order. 0 marks the
blank. The goal places tiles 1-8 clockwise around the perimeter starting
at the top-left corner, blank in the center:

    1 2 3
    8 _ 4
    7 6 5

Moves are identified by the tile that slides into the blank, matching the
click-a-tile interaction model and the voting domain.
"""

from __future__ import annotations

Board = tuple[int, ...]

GOAL_BOARD: Board = (1, 2, 3, 8, 0, 4, 7, 6, 5)

# Orthogonal neighbours of each cell index on the 3x3 grid.
_ADJACENT: tuple[tuple[int, ...], ...] = (
    (1, 3),
    (0, 2, 4),
    (1, 5),
    (0, 4, 6),
    (1, 3, 5, 7),
    (2, 4, 8),
    (3, 7),
    (4, 6, 8),
    (5, 7),
)

_CELLS = frozenset(range(9))


class IllegalMove(ValueError):
    """Raised when the named tile is not adjacent to the blank (protocol violation)."""


def validate_board(b: Board) -> None:
    """Raise ValueError unless b is a permutation of 0..8."""
    if len(b) != 9 or set(b) != _CELLS:
        raise ValueError(f"not a permutation of 0..8: {b!r}")


def goal_board() -> Board:
    return GOAL_BOARD


def is_goal(b: Board) -> bool:
    return b == GOAL_BOARD


def blank_index(b: Board) -> int:
    return b.index(0)


def legal_moves(b: Board) -> set[int]:
    """Tiles that may slide into the blank: 2 from a corner, 3 from an edge, 4 from center."""
    z = b.index(0)
    return {b[i] for i in _ADJACENT[z]}


def apply_move(b: Board, tile: int) -> Board:
    """Slide `tile` into the blank, returning a new board.

    Value semantics: the input board is never modified. Raises IllegalMove
    if the tile is not orthogonally adjacent to the blank.
    """
    z = b.index(0)
    for i in _ADJACENT[z]:
        if b[i] == tile:
            cells = list(b)
            cells[z], cells[i] = cells[i], cells[z]
            return tuple(cells)
    raise IllegalMove(f"tile {tile} is not adjacent to the blank in {b}")


def neighbors(b: Board) -> list[tuple[int, Board]]:
    """All (tile, resulting board) pairs reachable in one slide, in cell order."""
    z = b.index(0)
    out = []
    for i in _ADJACENT[z]:
        cells = list(b)
        cells[z], cells[i] = cells[i], cells[z]
        out.append((b[i], tuple(cells)))
    return out


def is_solvable(b: Board) -> bool:
    """True iff b is in the same reachability class as the goal.

    Each slide is one transposition (flips permutation parity) and moves the
    blank by one cell (flips the parity of its taxicab offset), so the two
    parities must stay equal to the goal's.
    """
    validate_board(b)
    perm = [GOAL_BOARD.index(v) for v in b]
    seen = [False] * 9
    transpositions = 0
    for start in range(9):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        transpositions += length - 1
    z = b.index(0)
    blank_offset = abs(z // 3 - 1) + abs(z % 3 - 1)  # goal blank is cell 4 = (1,1)
    return transpositions % 2 == blank_offset % 2
