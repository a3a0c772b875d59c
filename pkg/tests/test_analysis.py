"""Sweeps, trend detection, CSV round-trips and byte stability."""

from __future__ import annotations

import numpy as np
import pytest

from knockout.analysis import (
    LONG_HEADER,
    SUMMARY_HEADER,
    ExcludedPoint,
    SweepRecord,
    SweepSpec,
    desk_scale_spec,
    detect_trends,
    even_bump,
    grid_values,
    read_long_rows,
    run_sweep,
    write_long_csv,
    write_summary_csv,
)
from knockout.model import MatrixMode, ShotParams, win_distribution

P49 = ShotParams(0.4, 0.9)


def small_spec(**overrides):
    base = dict(
        n_values=(2, 3, 4),
        p_values=(0.0, 0.4, 0.8),
        q_values=(0.5, 1.0),
        mode=MatrixMode.CORRECTED,
    )
    base.update(overrides)
    return SweepSpec(**base)


# ------------------------------------------------------------------ grid maths


def test_grid_values_inclusive_and_clean():
    assert grid_values(0.0, 0.95, 0.05) == tuple(round(0.05 * k, 10) for k in range(20))
    assert grid_values(0.05, 1.0, 0.05)[-1] == 1.0
    assert 0.15 in grid_values(0.0, 0.95, 0.05)  # no 0.15000000000000002 artifacts
    assert grid_values(0.3, 0.3, 0.1) == (0.3,)
    with pytest.raises(ValueError):
        grid_values(0.0, 1.0, 0.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(n_values=(), p_values=(0.4,), q_values=(0.9,))
    with pytest.raises(ValueError):
        SweepSpec(n_values=(1, 2), p_values=(0.4,), q_values=(0.9,))


def test_desk_scale_spec_shape():
    spec = desk_scale_spec()
    assert spec.n_values == tuple(range(2, 13))
    assert len(spec.p_values) == 20 and len(spec.q_values) == 20
    assert spec.mode is MatrixMode.CORRECTED


# ------------------------------------------------------------------- sweeping


def test_sweep_order_is_n_major_then_p_then_q():
    result = run_sweep(small_spec())
    keys = [(r.n, r.p, r.q) for r in result.records] + [
        (e.n, e.p, e.q) for e in result.excluded
    ]
    want = [
        (n, p, q)
        for n in (2, 3, 4)
        for p in (0.0, 0.4, 0.8)
        for q in (0.5, 1.0)
    ]
    assert sorted(keys) == sorted(want)
    # records themselves stay in grid order
    grid_order = [k for k in want if k not in {(e.n, e.p, e.q) for e in result.excluded}]
    assert [(r.n, r.p, r.q) for r in result.records] == grid_order


def test_sweep_excludes_only_the_invalid_corner():
    result = run_sweep(small_spec())
    assert {(e.p, e.q) for e in result.excluded} == {(0.0, 1.0)}
    assert len(result.excluded) == 3  # once per n
    assert all("p=0" in e.reason for e in result.excluded)


def test_sweep_jobs_do_not_change_records():
    a = run_sweep(small_spec(), jobs=1)
    b = run_sweep(small_spec(), jobs=3)
    assert a.records == b.records
    assert a.excluded == b.excluded


def test_sweep_honours_extra_exclusions():
    spec = small_spec(exclusions=(lambda p, q: p > 0.5,))
    result = run_sweep(spec)
    assert all(r.p <= 0.5 for r in result.records)
    assert any(e.reason == "excluded by sweep rule" for e in result.excluded)


def test_sweep_record_extremes_match_win_distribution():
    result = run_sweep(small_spec())
    for r in result.records:
        w = win_distribution(r.n, ShotParams(r.p, r.q), r.mode)
        assert np.abs(np.array(r.win_probs) - w).max() < 1e-15
        assert r.argmin == int(np.argmin(w)) + 1
        assert r.argmax == int(np.argmax(w)) + 1
        assert r.spread == pytest.approx(float(w.max() - w.min()), abs=1e-15)
        assert r.expected_steps == pytest.approx(
            (r.n - 1) * 170 / 39 if (r.p, r.q) == (0.4, 0.9) else r.expected_steps
        )


# ---------------------------------------------------------------- even bump


def test_even_bump_zero_on_linear_profiles():
    assert np.abs(even_bump([0.125, 0.25, 0.375, 0.5])).max() == 0.0


def test_even_bump_matches_reference_table():
    w = win_distribution(7, P49)
    bumps = even_bump(w)
    assert len(bumps) == 5
    assert bumps[0] == pytest.approx(0.02211, abs=5e-6)  # position 2 pokes up
    assert bumps[0] > 0 and bumps[2] > 0  # even positions above neighbours
    assert bumps[1] < 0 and bumps[3] < 0


def test_even_bump_needs_three_positions():
    with pytest.raises(ValueError):
        even_bump([0.5, 0.5])


# ------------------------------------------------------------------- trends


def _record(n, p, q, win_probs):
    w = np.asarray(win_probs, dtype=float)
    lo, hi = w.min(), w.max()
    mins = tuple(int(i) + 1 for i in np.flatnonzero(w <= lo + 1e-12))
    maxs = tuple(int(i) + 1 for i in np.flatnonzero(w >= hi - 1e-12))
    return SweepRecord(
        n=n,
        p=p,
        q=q,
        mode=MatrixMode.CORRECTED,
        win_probs=tuple(float(x) for x in w),
        argmin=mins[0],
        argmax=maxs[0],
        argmin_ties=mins,
        argmax_ties=maxs,
        spread=float(hi - lo),
        expected_steps=1.0,
    )


def test_detect_trends_on_crafted_records():
    records = (
        _record(3, 0.1, 0.5, [0.2, 0.3, 0.5]),   # well-behaved
        _record(3, 0.2, 0.5, [0.3, 0.5, 0.2]),   # position 1 not worst
        _record(3, 0.3, 0.5, [0.2, 0.5, 0.3]),   # last not best (argmax 2 = n-1)
        _record(4, 0.1, 0.5, [0.25, 0.25, 0.2, 0.3]),  # tie at the minimum
    )
    trends = detect_trends(records)
    assert trends.record_count == 4
    assert trends.first_worst_violations == ((3, 0.2, 0.5), (4, 0.1, 0.5))
    assert trends.last_best_count == 2
    assert trends.last_best_exceptions == ((3, 0.2, 0.5, 2), (3, 0.3, 0.5, 2))
    assert trends.last_best_fraction == pytest.approx(0.5)
    # spread per (n, q): n=3 has spreads 0.3/0.3/0.3 -> earliest p wins the tie
    assert trends.spread_argmax_p[(3, 0.5)] == 0.1
    text = trends.describe()
    assert "violations at" in text and "exceptions" in text
    jsonable = trends.to_jsonable()
    import json

    json.dumps(jsonable)  # must be serialisable as-is
    assert jsonable["record_count"] == 4


def test_detect_trends_on_real_slice():
    result = run_sweep(small_spec())
    trends = detect_trends(result.records)
    assert trends.first_worst_violations == ()
    assert trends.record_count == len(result.records)
    # n=2 and n=4 are even: every exception must be an odd n with argmax n-1
    for n, _, _, argmax in trends.last_best_exceptions:
        assert n % 2 == 1 and argmax == n - 1
    assert 2 in trends.even_bump_profile
    assert trends.even_bump_profile[2] > 0


# ----------------------------------------------------------------------- CSV


GOLDEN_RECORD = SweepRecord(
    n=2,
    p=0.4,
    q=0.9,
    mode=MatrixMode.CORRECTED,
    win_probs=(0.38461538461538464, 0.6153846153846154),
    argmin=1,
    argmax=2,
    argmin_ties=(1,),
    argmax_ties=(2,),
    spread=0.23076923076923078,
    expected_steps=4.358974358974359,
)

GOLDEN_LONG = (
    "n,p,q,mode,pos,win_prob\n"
    "2,0.4,0.9,corrected,1,0.384615384615\n"
    "2,0.4,0.9,corrected,2,0.615384615385\n"
)

GOLDEN_SUMMARY = (
    "n,p,q,mode,argmin,argmax,spread,expected_steps\n"
    "2,0.4,0.9,corrected,1,2,0.230769230769,4.35897435897\n"
)


def test_long_csv_golden_bytes(tmp_path):
    path = tmp_path / "long.csv"
    write_long_csv([GOLDEN_RECORD], path)
    assert path.read_bytes() == GOLDEN_LONG.encode()


def test_summary_csv_golden_bytes(tmp_path):
    path = tmp_path / "summary.csv"
    write_summary_csv([GOLDEN_RECORD], path)
    assert path.read_bytes() == GOLDEN_SUMMARY.encode()


def test_csv_reruns_are_byte_identical(tmp_path):
    records = run_sweep(small_spec()).records
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_long_csv(records, a)
    write_long_csv(records, b)
    assert a.read_bytes() == b.read_bytes()
    write_summary_csv(records, a)
    write_summary_csv(records, b)
    assert a.read_bytes() == b.read_bytes()


def test_read_long_rows_roundtrip(tmp_path):
    records = run_sweep(small_spec()).records
    path = tmp_path / "long.csv"
    write_long_csv(records, path)
    rows = read_long_rows(path)
    assert len(rows) == sum(r.n for r in records)
    first = rows[0]
    assert first == {
        "n": records[0].n,
        "p": records[0].p,
        "q": records[0].q,
        "mode": "corrected",
        "pos": 1,
        "win_prob": pytest.approx(records[0].win_probs[0], abs=1e-11),
    }


def test_read_long_rows_rejects_bad_input(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text(LONG_HEADER + "\n")
    with pytest.raises(ValueError, match="no data rows"):
        read_long_rows(empty)
    wrong = tmp_path / "wrong.csv"
    wrong.write_text(SUMMARY_HEADER + "\n1,2,3\n")
    with pytest.raises(ValueError, match="expected header"):
        read_long_rows(wrong)
    malformed = tmp_path / "bad.csv"
    malformed.write_text(LONG_HEADER + "\n1,2,3\n")
    with pytest.raises(ValueError, match="malformed"):
        read_long_rows(malformed)
