import numpy as np
import pytest

import mindsim as ms
from mindsim.trace import ANSWER_NAMES

from conftest import make_record


def _rld(d=1, h=0, w=0, t=30.0, s=False, r=False):
    return ms.RealLifeData(d, h, w, t, s, r)


def _trace(n=10, session_id=1):
    rng = np.random.default_rng(0)
    trace = ms.SessionTrace(session_id=session_id)
    for m in range(n):
        answers = ms.quantize_answers(rng.uniform(-1, 1, 8))
        trace.records.append(make_record(
            m, _rld(d=int(rng.integers(0, 6)), t=float(rng.uniform(5, 300))),
            answers, actions=rng.integers(0, 2, 5), seconds=30.0 * m, puzzle=1 + m // 2))
    return trace


# ---------------------------------------------------------------------------
# quantizer
# ---------------------------------------------------------------------------

def test_quantizer_neutral_and_roundtrip():
    assert ms.quantize_answers(np.array([0.0]))[0] == 0.0
    rng = np.random.default_rng(2)
    x = rng.uniform(-1, 1, 2000)
    q = ms.quantize_answers(x)
    assert np.all(np.abs(q - x) <= 0.1 + 1e-12)
    # values land on the 0..10 answer grid
    assert np.allclose(np.round(5 * (q + 1)), 5 * (q + 1))


def test_quantizer_rounds_half_up():
    # 5 * (0.5 + 1) = 7.5 rounds away from zero to 8
    assert ms.quantize_answers(np.array([0.5]))[0] == pytest.approx(0.6)
    assert ms.quantize_answers(np.array([1.2]))[0] == 1.0  # clipped first


# ---------------------------------------------------------------------------
# traces and persistence
# ---------------------------------------------------------------------------

def test_trace_roundtrip_bytes(tmp_path):
    trace = _trace(12)
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    trace.save(p1)
    loaded = ms.SessionTrace.load(p1)
    loaded.save(p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert loaded.session_id == trace.session_id
    assert len(loaded) == len(trace)
    for a, b in zip(trace.records, loaded.records):
        assert np.array_equal(a.answers, b.answers)
        assert np.array_equal(a.actions, b.actions)
        assert a.rld.channels().tolist() == b.rld.channels().tolist()
        assert a.seconds == b.seconds and a.puzzle == b.puzzle


def test_trace_incomplete_flag_roundtrip(tmp_path):
    trace = _trace(6)
    trace.incomplete = True
    trace.save(tmp_path / "t.csv")
    assert ms.SessionTrace.load(tmp_path / "t.csv").incomplete


def test_trace_validation_rejects_bad_indices():
    trace = _trace(5)
    trace.records[3].m = trace.records[2].m
    with pytest.raises(ms.DataError):
        trace.validate()


def test_trace_validation_rejects_out_of_range_answers():
    trace = _trace(5)
    trace.records[0].answers[0] = 1.2
    with pytest.raises(ms.DataError):
        trace.validate()


# ---------------------------------------------------------------------------
# dataset split
# ---------------------------------------------------------------------------

def test_split_counts_and_order():
    ds = ms.Dataset.from_traces([_trace(30)])
    train, test = ms.split_dataset(ds, 0.67)
    assert train.n_measurements == 20
    assert test.n_measurements == 10
    assert train.tag == "train" and test.tag == "test"
    all_ms = [r.m for r in train.records()] + [r.m for r in test.records()]
    assert all_ms == [r.m for r in ds.records()]


def test_split_ratio_one_rejected():
    ds = ms.Dataset.from_traces([_trace(30)])
    with pytest.raises(ms.DataError):
        ms.split_dataset(ds, 1.0)


def test_split_too_few_measurements():
    ds = ms.Dataset.from_traces([_trace(5)])
    with pytest.raises(ms.DataError):
        ms.split_dataset(ds, 0.67)


def test_split_deterministic_and_disjoint():
    ds = ms.Dataset.from_traces([_trace(14, 1), _trace(9, 2)])
    t1 = ms.split_dataset(ds, 0.67, seed=1)
    t2 = ms.split_dataset(ds, 0.67, seed=1)
    ids1 = [id(r) for r in t1[0].records()] + [id(r) for r in t1[1].records()]
    ids2 = [id(r) for r in t2[0].records()] + [id(r) for r in t2[1].records()]
    assert ids1 == ids2
    train_set = {id(r) for r in t1[0].records()}
    test_set = {id(r) for r in t1[1].records()}
    assert not train_set & test_set
    assert len(train_set | test_set) == ds.n_measurements


def test_split_never_pairs_across_sessions():
    ds = ms.Dataset.from_traces([_trace(10, 1), _trace(10, 2)])
    assert ds.n_pairs() == 18  # 9 within each session, none across


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

def test_normalizer_maps_to_unit_interval(spec):
    ds = ms.Dataset.from_traces([_trace(25)])
    norm = ms.ChannelNormalizer.fit(ds, spec)
    rows = np.vstack([t.channel_matrix() for t in ds.segments])
    z = norm.transform(rows)
    assert z.min() >= 0.0 and z.max() <= 1.0
    assert z[:, 0].min() == 0.0 and z[:, 0].max() == 1.0


def test_normalizer_boolean_channels_untouched(spec):
    trace = _trace(10)
    for rec in trace.records:
        rec.rld.skipped = False  # constant boolean channel
    norm = ms.ChannelNormalizer.fit(ms.Dataset.from_traces([trace]), spec)
    assert norm.lo[4] == 0.0 and norm.hi[4] == 1.0
    out = norm.transform(np.array([0.0, 0, 0, 0, 1.0, 1.0]))
    assert out[4] == 1.0 and out[5] == 1.0


def test_normalizer_constant_channel_maps_to_zero():
    lo = np.zeros(6)
    hi = np.zeros(6)
    hi[3:] = 1.0
    norm = ms.ChannelNormalizer(lo, hi)
    out = norm.transform(np.array([2.0, 3.0, 4.0, 0.5, 0, 0]))
    assert out[0] == 0.0 and out[1] == 0.0 and out[2] == 0.0


def test_answer_names_match_spec_order(spec):
    assert ANSWER_NAMES == spec.belief_vars + spec.goal_vars + spec.emotion_vars
