import itertools
import random

import pytest

from tilevote.board import GOAL_BOARD, apply_move, is_solvable, legal_moves, neighbors
from tilevote.oracle import (
    NoSuchDifficulty,
    Unsolvable,
    band,
    build_distance_table,
    derive_seed,
    generate_puzzle,
    greedy_path,
    load_table,
    optimal_distance,
    save_table,
)

MAX_DISTANCE = 30  # eccentricity of the center-blank goal, frozen from the full BFS


def test_table_covers_exactly_half_of_all_permutations(table):
    assert len(table) == 181_440


def test_solvability_parity_agrees_with_bfs_reachability(table):
    # brute-force parity count over all 9! permutations, cross-checked
    # against the BFS enumeration
    solvable = [p for p in itertools.permutations(range(9)) if is_solvable(p)]
    assert len(solvable) == 181_440
    assert set(solvable) == set(table.distances)


def test_known_distances(table):
    assert optimal_distance(table, GOAL_BOARD) == 0
    assert optimal_distance(table, (1, 0, 3, 8, 2, 4, 7, 6, 5)) == 1
    assert optimal_distance(table, (0, 1, 3, 8, 2, 4, 7, 6, 5)) == 2


def test_unsolvable_board_rejected(table):
    with pytest.raises(Unsolvable):
        optimal_distance(table, (2, 1, 3, 8, 0, 4, 7, 6, 5))


def test_max_distance(table):
    assert table.max_distance == MAX_DISTANCE
    assert sum(len(bucket) for bucket in table.by_distance) == len(table)
    assert all(table.by_distance[d] for d in range(MAX_DISTANCE + 1))


def test_neighbor_distances_differ_by_one_sampled(table):
    rng = random.Random(11)
    boards = rng.sample(list(table.distances), 10_000)
    for b in boards:
        d = table.distances[b]
        for _, nb in neighbors(b):
            assert abs(table.distances[nb] - d) == 1


def test_greedy_descent_reaches_goal_in_exactly_d_moves(table):
    rng = random.Random(5)
    for b in rng.sample(list(table.distances), 200):
        d = table.distances[b]
        path = greedy_path(table, b)
        assert len(path) == d
        for tile in path:
            b = apply_move(b, tile)
        assert b == GOAL_BOARD


def test_distance_one_boards_are_goal_neighbors(table):
    want = {nb for _, nb in neighbors(GOAL_BOARD)}
    assert set(table.by_distance[1]) == want
    for seed in range(20):
        assert generate_puzzle(table, 1, seed) in want


def test_generator_exactness_small_sweep(table):
    for d in range(1, 17):
        for seed in range(10):
            b = generate_puzzle(table, d, derive_seed(42, d, seed))
            assert optimal_distance(table, b) == d


def test_generator_determinism(table):
    assert generate_puzzle(table, 8, 123) == generate_puzzle(table, 8, 123)
    picks = {generate_puzzle(table, 8, s) for s in range(40)}
    assert len(picks) > 1  # seeds actually vary the instance


def test_generator_rejects_unreachable_difficulty(table):
    with pytest.raises(NoSuchDifficulty):
        generate_puzzle(table, MAX_DISTANCE + 1, 0)
    with pytest.raises(NoSuchDifficulty):
        generate_puzzle(table, 0, 0)


def test_band_edges():
    assert band(1) == "easy" and band(8) == "easy"
    assert band(9) == "hard" and band(16) == "hard"
    assert band(17) == "beyond"


def test_cache_roundtrip(tmp_path, table):
    path = tmp_path / "distances.bin"
    save_table(table, path)
    loaded = load_table(path)
    assert loaded.distances == table.distances
    assert loaded.by_distance == table.by_distance


def test_cache_rejects_other_goal(tmp_path, table):
    path = tmp_path / "distances.bin"
    save_table(table, path)
    raw = path.read_bytes()
    head, _, body = raw.partition(b"\n")
    tampered = head.replace(b'"goal":[1,2,3', b'"goal":[3,2,1')
    path.write_bytes(tampered + b"\n" + body)
    with pytest.raises(ValueError):
        load_table(path)


def test_derive_seed_is_stable():
    assert derive_seed(1, "puzzle", 2) == derive_seed(1, "puzzle", 2)
    assert derive_seed(1, "puzzle", 2) != derive_seed(1, "puzzle", 3)


def test_build_is_deterministic(table):
    again = build_distance_table()
    assert again.by_distance == table.by_distance
