"""SVG figure rendering for win-distribution data.

Rendering is deterministic: the Agg backend, a pinned svg.hashsalt, and no
embedded creation date, so reruns produce identical bytes for identical
data.  Series values are plotted exactly as read, no rounding.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import SweepRecord, even_bump

FIGURE_KINDS = ("positions", "bump")

# Legends beyond this many series add clutter, not information.
_LEGEND_CAP = 12

__all__ = ["FIGURE_KINDS", "rows_from_records", "render_rows", "render_sweep_figure"]


def rows_from_records(records) -> list[dict]:
    """Long-form rows (as from the long CSV) for a set of sweep records."""
    rows = []
    for r in records:
        for pos, w in enumerate(r.win_probs, start=1):
            rows.append(
                {
                    "n": r.n,
                    "p": r.p,
                    "q": r.q,
                    "mode": r.mode.value,
                    "pos": pos,
                    "win_prob": w,
                }
            )
    return rows


def _group_series(rows) -> dict[tuple, list[tuple[int, float]]]:
    series: dict[tuple, list[tuple[int, float]]] = {}
    for row in rows:
        key = (row["n"], row["p"], row["q"], row["mode"])
        series.setdefault(key, []).append((row["pos"], row["win_prob"]))
    for pts in series.values():
        pts.sort()
    return series


def render_rows(rows, kind: str, out_path) -> None:
    """Render long-form rows to an SVG file.

    kind "positions": win probability vs starting position, one series per
    (n, p, q, mode).  kind "bump": the even-position bump
    w(k) - (w(k-1) + w(k+1))/2 vs interior position; series with fewer than
    three positions are skipped.

    Raises ValueError for an unknown kind or when nothing is plottable.
    """
    if kind not in FIGURE_KINDS:
        raise ValueError(f"unknown figure kind {kind!r}, expected one of {FIGURE_KINDS}")
    series = _group_series(rows)
    if not series:
        raise ValueError("no data rows to plot")

    matplotlib.rcParams["svg.hashsalt"] = "knockout"
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    plotted = 0
    for (n, p, q, mode), pts in series.items():
        label = f"n={n} p={p:g} q={q:g} [{mode}]"
        xs = [pos for pos, _ in pts]
        ys = [w for _, w in pts]
        if kind == "bump":
            if len(ys) < 3:
                continue
            bumps = even_bump(ys)
            ax.plot(xs[1:-1], bumps, marker="o", label=label)
        else:
            ax.plot(xs, ys, marker="o", label=label)
        plotted += 1
    if plotted == 0:
        raise ValueError("no series with enough positions to plot")

    ax.set_xlabel("starting position")
    if kind == "bump":
        ax.set_ylabel("win prob above neighbour mean")
        ax.axhline(0.0, color="0.6", linewidth=0.8)
    else:
        ax.set_ylabel("win probability")
    ax.grid(True, alpha=0.3)
    if plotted <= _LEGEND_CAP:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)


def render_sweep_figure(records: tuple[SweepRecord, ...], out_path) -> None:
    """Representative slice of a sweep: win vs position per n at the median grid point.

    For each n, plots the record at the median (p, q) of that n's records,
    falling back to the first record for the n if the median point was
    excluded from the grid.
    """
    if not records:
        raise ValueError("no sweep records to plot")
    by_n: dict[int, list[SweepRecord]] = {}
    for r in records:
        by_n.setdefault(r.n, []).append(r)
    chosen = []
    for n in sorted(by_n):
        recs = by_n[n]
        ps = sorted({r.p for r in recs})
        qs = sorted({r.q for r in recs})
        p_mid, q_mid = ps[len(ps) // 2], qs[len(qs) // 2]
        pick = next((r for r in recs if r.p == p_mid and r.q == q_mid), recs[0])
        chosen.append(pick)
    render_rows(rows_from_records(chosen), "positions", out_path)
