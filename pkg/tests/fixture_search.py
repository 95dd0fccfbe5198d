"""One-off parameter search behind the table-replication fixtures.

The fixture logs must hit published per-band mean cells to 3 decimal
places *jointly* with the overall mean (which is computed over all
records, not as a mean of band means). Move counts are integers and
elapsed times are whole milliseconds, so the (record count, total) pairs
per band form a small Diophantine problem. Run this script to (re)derive
the constants frozen in fixtures.py.
"""

from __future__ import annotations

import math


def window(cell: float, count: int, half: float) -> tuple[float, float]:
    """Open interval of totals whose mean rounds to `cell` (margin-tightened)."""
    margin = 0.10 * half  # keep away from round-half boundaries
    return ((cell - half + margin) * count, (cell + half - margin) * count)


def int_range(lo: float, hi: float) -> range:
    return range(math.ceil(lo), math.floor(hi) + 1)


def joint_band_search(
    easy_cell: float,
    hard_cell: float,
    overall_cell: float,
    half: float = 0.0005,
    max_count: int = 1200,
    easy_exact: float | None = None,
) -> tuple[int, int, int, int] | None:
    """Find (n_easy, easy_total, n_hard, hard_total) with integer totals so
    that both band means and the pooled overall mean round to the cells.

    Searched in increasing record-count order, so the first hit is minimal.
    """
    easy_opts: dict[int, range] = {}
    hard_opts: dict[int, range] = {}
    for n in range(1, max_count + 1):
        if easy_exact is not None:
            t = easy_exact * n
            easy_opts[n] = range(int(t), int(t) + 1) if t == int(t) else range(0)
        else:
            easy_opts[n] = int_range(*window(easy_cell, n, half))
        hard_opts[n] = int_range(*window(hard_cell, n, half))
    for total_n in range(2, 2 * max_count + 1):
        for ne in range(1, min(total_n - 1, max_count) + 1):
            nh = total_n - ne
            if nh > max_count or not easy_opts[ne] or not hard_opts[nh]:
                continue
            olo, ohi = window(overall_cell, total_n, half)
            elo, ehi = easy_opts[ne][0], easy_opts[ne][-1]
            hlo, hhi = hard_opts[nh][0], hard_opts[nh][-1]
            lo = max(olo, elo + hlo)
            hi = min(ohi, ehi + hhi)
            if lo > hi:
                continue
            for s in int_range(lo, hi):
                for e in range(max(elo, s - hhi), min(ehi, s - hlo) + 1):
                    return ne, e, nh, s - e
    return None


def verify(
    ne: int, e: int, nh: int, h: int, cells: tuple[float, float, float], scale: float = 1.0
) -> bool:
    means = (e / ne / scale, h / nh / scale, (e + h) / (ne + nh) / scale)
    return all(round(m, 3) == round(c, 3) for m, c in zip(means, cells))


def main() -> None:
    # Moves table, average-member column: member 1 is pinned to exact
    # per-band means (4.0 easy over 2 puzzles, 14.0 hard over 2, overall 9.0);
    # member 2 must land the two-member averages on the published cells.
    t1_avg = (11.016, 41.137, 24.615)
    m1 = (4.0, 14.0, 9.0)
    want2 = tuple(2 * c - v for c, v in zip(t1_avg, m1))
    got = joint_band_search(*want2)
    print("T1 avg member2 target", want2, "->", got, verify(*got, want2))

    # Moves table, group column: single-puzzle group sessions.
    t1_group = (5.279, 10.5, 7.182)
    got = joint_band_search(*t1_group)
    print("T1 group ->", got, verify(*got, t1_group))

    # Best-member table: one member hits (4, 13.833, 8.538) jointly; easy
    # mean exactly 4 so it also prints as the bare "4" cell.
    t2_best = (4.0, 13.833, 8.538)
    got = joint_band_search(*t2_best, easy_exact=4.0)
    print("T2 best ->", got, verify(*got, t2_best))

    t2_group = (4.7, 10.078, 7.182)
    got = joint_band_search(*t2_group)
    print("T2 group ->", got, verify(*got, t2_group))

    # Time table, group column: single-puzzle sessions, elapsed in whole ms,
    # so cells scale by 1000 and the rounding half-width is 0.5 ms.
    t3_group = (142.189, 202.038, 180.089)
    got = joint_band_search(
        t3_group[0] * 1000,
        t3_group[1] * 1000,
        t3_group[2] * 1000,
        half=0.5,
        max_count=500,
    )
    ok = verify(*got, t3_group, scale=1000.0)
    print("T3 group (ms) ->", got, ok)


if __name__ == "__main__":
    main()
