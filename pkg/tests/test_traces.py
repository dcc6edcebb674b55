import numpy as np
import pytest

from helpers import random_traceset

from rnnfuzz import (
    Trace,
    TraceFormatError,
    TraceSet,
    TraceStep,
    ValidationError,
    load_traces,
    save_traces,
    trace_transitions,
)


def _simple_traceset():
    steps = [
        TraceStep([0, 0, 0, 0], [1.0, 2.0], 3),
        TraceStep([0.1, -0.2, 0.3, 0.4], [0.5, -0.5], 0),
        TraceStep([0.2, 0.2, 0.2, 0.2], [1.5, 2.5], 7),
    ]
    return TraceSet(4, 2, [Trace("utt-1", steps, [0.9, 0.8, 0.7, 0.6])])


def test_load_hand_written_fixture(tmp_path):
    text = (
        "RNNTRACE 1 4 2\n"
        "T utt-1\n"
        "S 3 | 1 2 | 0 0 0 0\n"
        "S 0 | 0.5 -0.5 | 0.1 -0.2 0.3 0.4\n"
        "S 7 | 1.5 2.5 | 0.2 0.2 0.2 0.2\n"
        "F 0.9 0.8 0.7 0.6\n"
    )
    path = tmp_path / "one.trc"
    path.write_text(text, encoding="utf-8")
    ts = load_traces(path)
    assert ts.state_dim == 4 and ts.input_dim == 2
    assert len(ts.traces) == 1 and len(ts.traces[0]) == 3
    assert ts == _simple_traceset()


def test_empty_trace_list_roundtrip(tmp_path):
    ts = TraceSet(3, 2)
    path = tmp_path / "empty.trc"
    save_traces(ts, path)
    assert path.read_text(encoding="utf-8") == "RNNTRACE 1 3 2\n"
    assert load_traces(path) == ts


def test_one_step_trace_emits_one_step_record(tmp_path):
    ts = TraceSet(2, 1, [Trace("a", [TraceStep([0, 0], [0.5], 1)], [0.1, 0.2])])
    path = tmp_path / "one_step.trc"
    save_traces(ts, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert sum(1 for ln in lines if ln.startswith("S ")) == 1


def test_roundtrip_random_tracesets(tmp_path):
    rng = np.random.default_rng(42)
    for i in range(50):
        ts = random_traceset(rng)
        path = tmp_path / f"r{i}.trc"
        save_traces(ts, path)
        loaded = load_traces(path)
        assert loaded == ts
        # save(load(p)) byte-compares equal to the canonical file
        path2 = tmp_path / f"r{i}b.trc"
        save_traces(loaded, path2)
        assert path2.read_bytes() == path.read_bytes()


def test_parse_error_names_line_number(tmp_path):
    path = tmp_path / "bad.trc"
    path.write_text("RNNTRACE 1 2 1\nT a\nS x | 1 | 0 0\nF 0 0\n", encoding="utf-8")
    with pytest.raises(TraceFormatError, match="line 3"):
        load_traces(path)


def test_dimension_mismatch_names_trace_id(tmp_path):
    path = tmp_path / "dim.trc"
    path.write_text("RNNTRACE 1 2 1\nT bad-id\nS 0 | 1 | 0 0 0\nF 0 0\n", encoding="utf-8")
    with pytest.raises(TraceFormatError, match="line 3"):
        load_traces(path)
    with pytest.raises(ValidationError, match="other"):
        TraceSet(3, 1, [Trace("other", [TraceStep([0, 0], [1.0], 0)], [0.0, 0.0])])


def test_nonzero_initial_state_rejected():
    with pytest.raises(ValidationError, match="zero vector"):
        Trace("t", [TraceStep([0.1], [1.0], 0)], [0.5])


def test_unclosed_trace_rejected(tmp_path):
    path = tmp_path / "open.trc"
    path.write_text("RNNTRACE 1 1 1\nT a\nS 0 | 1 | 0\n", encoding="utf-8")
    with pytest.raises(TraceFormatError, match="not closed"):
        load_traces(path)


def test_transitions_chain_structure():
    ts = _simple_traceset()
    trans = trace_transitions(ts.traces[0])
    assert len(trans) == 3
    for i in range(len(trans) - 1):
        assert np.array_equal(trans[i][3], trans[i + 1][0])
    assert np.array_equal(trans[-1][3], ts.traces[0].final_state)


def test_single_step_transition():
    t = Trace("t", [TraceStep([0.0], [2.0], 4)], [0.75])
    ((s, x, y, nxt),) = trace_transitions(t)
    assert s[0] == 0.0 and x[0] == 2.0 and y == 4 and nxt[0] == 0.75


def test_transition_sources_equal_step_states(rng):
    for _ in range(20):
        ts = random_traceset(rng)
        for t in ts.traces:
            trans = trace_transitions(t)
            assert len(trans) == len(t.steps)
            for step, (src, x, y, _) in zip(t.steps, trans):
                assert np.array_equal(step.state, src)
                assert np.array_equal(step.input, x)
                assert step.output == y


def test_nonfinite_rejected():
    with pytest.raises(ValidationError):
        TraceStep([np.nan], [1.0], 0)
    with pytest.raises(ValidationError):
        TraceStep([0.0], [np.inf], 0)


def test_negative_token_rejected():
    with pytest.raises(ValidationError):
        TraceStep([0.0], [1.0], -1)
