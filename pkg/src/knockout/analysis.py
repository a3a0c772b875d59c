"""Parameter sweeps over (n, p, q), trend detection, and CSV emission.

A sweep evaluates the exact solver over a grid and records, per point, the
win distribution plus its extremes.  The interesting structure is not the
raw numbers but the patterns: position 1 is worst everywhere, the last
position is usually (not always) best, and even positions stick out above
their odd neighbours.  :func:`detect_trends` condenses a sweep into exactly
those statements.

All grid evaluation is deterministic (n-major, then p, then q) and the CSV
writers emit 12-significant-digit fixed-schema rows, so a rerun of the same
sweep is byte-identical.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParams, NonAbsorbingChain
from .model import MatrixMode, ShotParams, solve_game

# Win probabilities this close count as tied for an extreme.
TIE_TOL = 1e-12

LONG_HEADER = "n,p,q,mode,pos,win_prob"
SUMMARY_HEADER = "n,p,q,mode,argmin,argmax,spread,expected_steps"

__all__ = [
    "TIE_TOL",
    "LONG_HEADER",
    "SUMMARY_HEADER",
    "SweepSpec",
    "SweepRecord",
    "ExcludedPoint",
    "SweepResult",
    "TrendSummary",
    "grid_values",
    "desk_scale_spec",
    "run_sweep",
    "even_bump",
    "detect_trends",
    "write_long_csv",
    "write_summary_csv",
    "read_long_rows",
]


def grid_values(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive arithmetic grid, rounded to 10 decimals to keep values clean."""
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    out = []
    k = 0
    while True:
        v = round(start + k * step, 10)
        if v > stop + step * 1e-9:
            break
        out.append(v)
        k += 1
    return tuple(out)


@dataclass(frozen=True)
class SweepSpec:
    """Grid to evaluate.

    exclusions are extra predicates (p, q) -> bool; points outside the
    ShotParams domain are always skipped and reported, so the default desk
    grid excludes exactly the corner (p=0, q=1).
    """

    n_values: tuple[int, ...]
    p_values: tuple[float, ...]
    q_values: tuple[float, ...]
    mode: MatrixMode = MatrixMode.CORRECTED
    exclusions: tuple[Callable[[float, float], bool], ...] = ()

    def __post_init__(self):
        if not self.n_values or not self.p_values or not self.q_values:
            raise ValueError("sweep grid must not be empty")
        if any(n < 2 for n in self.n_values):
            raise ValueError("sweep requires n >= 2 everywhere")


def desk_scale_spec(mode: MatrixMode = MatrixMode.CORRECTED) -> SweepSpec:
    """n in 2..12, p and q on 0.05-steps; runs in well under two minutes."""
    return SweepSpec(
        n_values=tuple(range(2, 13)),
        p_values=grid_values(0.0, 0.95, 0.05),
        q_values=grid_values(0.05, 1.0, 0.05),
        mode=mode,
    )


@dataclass(frozen=True)
class SweepRecord:
    """Solved grid point.

    argmin/argmax are 1-based positions, earliest position on a tie; the
    *_ties tuples list every position within TIE_TOL of the extreme.
    """

    n: int
    p: float
    q: float
    mode: MatrixMode
    win_probs: tuple[float, ...]
    argmin: int
    argmax: int
    argmin_ties: tuple[int, ...]
    argmax_ties: tuple[int, ...]
    spread: float
    expected_steps: float


@dataclass(frozen=True)
class ExcludedPoint:
    n: int
    p: float
    q: float
    reason: str


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    records: tuple[SweepRecord, ...]
    excluded: tuple[ExcludedPoint, ...]


def _evaluate(n: int, p: float, q: float, mode: MatrixMode) -> SweepRecord | ExcludedPoint:
    try:
        params = ShotParams(p, q)
    except InvalidParams as exc:
        return ExcludedPoint(n, p, q, str(exc))
    try:
        sol = solve_game(n, params, mode)
    except NonAbsorbingChain as exc:
        return ExcludedPoint(n, p, q, str(exc))
    w = sol.win_probs
    lo, hi = w.min(), w.max()
    argmin_ties = tuple(int(k) + 1 for k in np.flatnonzero(w <= lo + TIE_TOL))
    argmax_ties = tuple(int(k) + 1 for k in np.flatnonzero(w >= hi - TIE_TOL))
    return SweepRecord(
        n=n,
        p=p,
        q=q,
        mode=mode,
        win_probs=tuple(float(x) for x in w),
        argmin=argmin_ties[0],
        argmax=argmax_ties[0],
        argmin_ties=argmin_ties,
        argmax_ties=argmax_ties,
        spread=float(hi - lo),
        expected_steps=sol.expected_steps_numeric,
    )


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Evaluate the grid in n-major (then p, then q) order.

    Grid points are independent, so jobs > 1 fans them out over threads;
    the result order is the deterministic grid order either way.  A point
    whose chain fails to absorb becomes an ExcludedPoint, never an abort.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    points = [
        (n, p, q)
        for n in spec.n_values
        for p in spec.p_values
        for q in spec.q_values
    ]

    def eval_point(point: tuple[int, float, float]) -> SweepRecord | ExcludedPoint:
        n, p, q = point
        if any(rule(p, q) for rule in spec.exclusions):
            return ExcludedPoint(n, p, q, "excluded by sweep rule")
        return _evaluate(n, p, q, spec.mode)

    if jobs == 1:
        outcomes = [eval_point(pt) for pt in points]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(eval_point, points))

    records = tuple(o for o in outcomes if isinstance(o, SweepRecord))
    excluded = tuple(o for o in outcomes if isinstance(o, ExcludedPoint))
    return SweepResult(spec=spec, records=records, excluded=excluded)


def even_bump(win_probs) -> np.ndarray:
    """How far each interior position pokes above the mean of its neighbours.

    Entry k-2 is w(k) - (w(k-1) + w(k+1)) / 2 for k = 2..n-1.  Positive
    values at even k are the sawtooth visible in the win tables; any linear
    profile gives exactly zero.
    """
    w = np.asarray(win_probs, dtype=float)
    if w.ndim != 1 or w.size < 3:
        raise ValueError(f"need at least 3 positions, got shape {w.shape}")
    return w[1:-1] - (w[:-2] + w[2:]) / 2.0


@dataclass(frozen=True)
class TrendSummary:
    """The sweep's qualitative claims, quantified.

    Attributes:
        record_count: solved grid points.
        first_worst_violations: (n, p, q) of points where position 1 is not
            the unique minimum.
        last_best_count: points where the last position is the maximum.
        last_best_fraction: that count over record_count.
        last_best_exceptions: (n, p, q, argmax) where some other position is
            best.
        spread_argmax_p: for each (n, q), the p maximising the win-prob
            spread (smallest such p on ties).
        even_bump_profile: mean bump per interior position across records
            that contain it.
    """

    record_count: int
    first_worst_violations: tuple[tuple[int, float, float], ...]
    last_best_count: int
    last_best_fraction: float
    last_best_exceptions: tuple[tuple[int, float, float, int], ...]
    spread_argmax_p: dict[tuple[int, float], float]
    even_bump_profile: dict[int, float]

    def describe(self) -> str:
        lines = [f"records: {self.record_count}"]
        lines.append(
            f"position 1 strictly worst: {self.record_count - len(self.first_worst_violations)}"
            f"/{self.record_count}"
            + (
                ""
                if not self.first_worst_violations
                else "; violations at "
                + ", ".join(
                    f"(n={n}, p={p:g}, q={q:g})"
                    for n, p, q in self.first_worst_violations[:10]
                )
                + ("..." if len(self.first_worst_violations) > 10 else "")
            )
        )
        exc = self.last_best_exceptions
        line = (
            f"last position best: {self.last_best_count}/{self.record_count}"
            f" ({100.0 * self.last_best_fraction:.2f}%)"
        )
        if exc:
            odd_second = all(n % 2 == 1 and a == n - 1 for n, _, _, a in exc)
            line += (
                f"; {len(exc)} exceptions"
                + (", all odd n with position n-1 best" if odd_second else "")
            )
        lines.append(line)
        if self.spread_argmax_p:
            counts: dict[float, int] = {}
            for p in self.spread_argmax_p.values():
                counts[p] = counts.get(p, 0) + 1
            top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
            lines.append(
                "spread-maximising p by (n, q): "
                + ", ".join(f"p={p:g} for {c} pairs" for p, c in top[:4])
            )
        if self.even_bump_profile:
            lines.append(
                "mean even-position bump: "
                + ", ".join(
                    f"pos {k}: {v:+.5f}" for k, v in sorted(self.even_bump_profile.items())
                )
            )
        return "\n".join(lines)

    def to_jsonable(self) -> dict:
        return {
            "record_count": self.record_count,
            "first_worst_violations": [list(v) for v in self.first_worst_violations],
            "last_best_count": self.last_best_count,
            "last_best_fraction": self.last_best_fraction,
            "last_best_exceptions": [list(v) for v in self.last_best_exceptions],
            "spread_argmax_p": [
                {"n": n, "q": q, "p": p}
                for (n, q), p in sorted(self.spread_argmax_p.items())
            ],
            "even_bump_profile": {
                str(k): v for k, v in sorted(self.even_bump_profile.items())
            },
        }


def detect_trends(records: tuple[SweepRecord, ...]) -> TrendSummary:
    """Condense sweep records into the position-trend statements."""
    violations = tuple(
        (r.n, r.p, r.q)
        for r in records
        if r.argmin != 1 or r.argmin_ties != (1,)
    )
    exceptions = tuple(
        (r.n, r.p, r.q, r.argmax) for r in records if r.argmax != r.n
    )
    last_best = len(records) - len(exceptions)

    spread_best: dict[tuple[int, float], tuple[float, float]] = {}
    for r in records:
        key = (r.n, r.q)
        cur = spread_best.get(key)
        if cur is None or r.spread > cur[0]:
            spread_best[key] = (r.spread, r.p)
    spread_argmax_p = {key: p for key, (_, p) in sorted(spread_best.items())}

    bump_sum: dict[int, float] = {}
    bump_cnt: dict[int, int] = {}
    for r in records:
        if r.n < 3:
            continue
        for k, b in enumerate(even_bump(r.win_probs), start=2):
            bump_sum[k] = bump_sum.get(k, 0.0) + float(b)
            bump_cnt[k] = bump_cnt.get(k, 0) + 1
    profile = {k: bump_sum[k] / bump_cnt[k] for k in sorted(bump_sum)}

    count = len(records)
    return TrendSummary(
        record_count=count,
        first_worst_violations=violations,
        last_best_count=last_best,
        last_best_fraction=last_best / count if count else 0.0,
        last_best_exceptions=exceptions,
        spread_argmax_p=spread_argmax_p,
        even_bump_profile=profile,
    )


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def write_long_csv(records, path) -> None:
    """One row per (grid point, position): n,p,q,mode,pos,win_prob."""
    lines = [LONG_HEADER]
    for r in records:
        for pos, w in enumerate(r.win_probs, start=1):
            lines.append(
                f"{r.n},{_fmt(r.p)},{_fmt(r.q)},{r.mode.value},{pos},{_fmt(w)}"
            )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_summary_csv(records, path) -> None:
    """One row per grid point: n,p,q,mode,argmin,argmax,spread,expected_steps."""
    lines = [SUMMARY_HEADER]
    for r in records:
        lines.append(
            f"{r.n},{_fmt(r.p)},{_fmt(r.q)},{r.mode.value},{r.argmin},{r.argmax},"
            f"{_fmt(r.spread)},{_fmt(r.expected_steps)}"
        )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_long_rows(path) -> list[dict]:
    """Parse a long-form CSV back into row dicts; raises ValueError if it
    is missing the pinned header or contains no data rows."""
    with open(path, "r", newline="") as fh:
        text = fh.read()
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines or lines[0] != LONG_HEADER:
        raise ValueError(
            f"{path}: expected header {LONG_HEADER!r}, got {lines[0] if lines else 'nothing'!r}"
        )
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 6:
            raise ValueError(f"{path}: malformed row {ln!r}")
        rows.append(
            {
                "n": int(parts[0]),
                "p": float(parts[1]),
                "q": float(parts[2]),
                "mode": parts[3],
                "pos": int(parts[4]),
                "win_prob": float(parts[5]),
            }
        )
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows
