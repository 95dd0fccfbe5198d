import json

import pytest

from tilevote.engine import Mode, SessionConfig, start_session
from tilevote.eventlog import (
    CorruptLog,
    EventLogWriter,
    SequenceGap,
    make_record,
    read_log,
    replay,
    write_session_log,
)
from tilevote.events import VoteCast
from tilevote.oracle import greedy_path


def run_group_session(table, seed=5, puzzles=2):
    cfg = SessionConfig(mode=Mode.GROUP, rng_seed=seed, session_minutes=60)
    s, events = start_session(cfg, ["a", "b"], 0, table, session_id="g-test")
    t = 0
    for _ in range(puzzles):
        while s.run is not None:
            tile = greedy_path(table, s.run.current_board)[0]
            t += 1_000
            events += s.submit_vote("a", tile, t)
            t += 500
            events += s.submit_vote("b", tile, t)
        t += 5_000
        events += s.tick(t)
    events += s.remove_player("a", t + 100)
    events += s.remove_player("b", t + 200)
    return cfg, events


def test_append_assigns_contiguous_seqs(tmp_path, table):
    cfg, events = run_group_session(table)
    path = write_session_log(tmp_path / "g-test.jsonl", "g-test", Mode.GROUP, cfg, events)
    header, records = read_log(path)
    assert header["goal"] == [1, 2, 3, 8, 0, 4, 7, 6, 5]
    assert header["config"]["round_seconds"] == 30.0
    assert [r["seq"] for r in records] == list(range(1, len(records) + 1))


def test_append_record_rejects_gaps(tmp_path):
    cfg = SessionConfig()
    w = EventLogWriter(tmp_path / "x.jsonl", "x", Mode.GROUP, cfg)
    ev = VoteCast(10, 1, "a", 4)
    w.append_record(make_record(ev, "x", Mode.GROUP, 1))
    with pytest.raises(SequenceGap):
        w.append_record(make_record(ev, "x", Mode.GROUP, 3))
    w.close()


def test_roundtrip_preserves_records(tmp_path, table):
    cfg, events = run_group_session(table)
    path = write_session_log(tmp_path / "g.jsonl", "g-test", Mode.GROUP, cfg, events)
    _, records = read_log(path)
    assert len(records) == len(events)
    for rec, ev in zip(records, events):
        assert rec["event"] == ev.name
        assert rec["ts_ms"] == ev.ts_ms


def test_replay_validates_and_extracts_solves(tmp_path, table):
    cfg, events = run_group_session(table, puzzles=2)
    path = write_session_log(tmp_path / "g.jsonl", "g-test", Mode.GROUP, cfg, events)
    header, records = read_log(path)
    result = replay(header, records, table)
    assert result.session_id == "g-test"
    assert len(result.solves) == 2
    assert [s.difficulty for s in result.solves] == [1, 2]
    assert all(s.quality == s.moves - s.optimal for s in result.solves)
    assert result.summary is not None and result.summary["reason"] == "empty"


def test_replay_detects_tampered_move(tmp_path, table):
    cfg, events = run_group_session(table)
    path = write_session_log(tmp_path / "g.jsonl", "g-test", Mode.GROUP, cfg, events)
    lines = path.read_text().splitlines()
    tampered = []
    bad_seq = None
    for line in lines:
        rec = json.loads(line)
        if rec.get("event") == "move_executed" and bad_seq is None:
            rec["payload"]["board"], bad_seq = rec["payload"]["board"][::-1], rec["seq"]
        tampered.append(json.dumps(rec))
    header, records = read_log(tampered)
    with pytest.raises(CorruptLog) as err:
        replay(header, records, table)
    assert err.value.seq == bad_seq


def test_replay_rejects_wrong_goal_convention(tmp_path, table):
    cfg, events = run_group_session(table)
    path = write_session_log(tmp_path / "g.jsonl", "g-test", Mode.GROUP, cfg, events)
    header, records = read_log(path)
    header["goal"] = list(range(9))
    with pytest.raises(CorruptLog):
        replay(header, records, table)


def test_read_rejects_missing_header(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"ts_ms":1,"seq":1,"event":"pass"}\n')
    with pytest.raises(CorruptLog):
        read_log(p)


def test_read_rejects_seq_gap(tmp_path, table):
    cfg, events = run_group_session(table)
    path = write_session_log(tmp_path / "g.jsonl", "g-test", Mode.GROUP, cfg, events)
    lines = path.read_text().splitlines()
    del lines[3]
    with pytest.raises(SequenceGap):
        read_log(lines)
