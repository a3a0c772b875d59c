"""Command-line interface.

Commands:
    solve      exact win/elimination distributions and expected steps
    expected   closed-form expected game length (works for huge n)
    simulate   rules-level Monte Carlo with reproducible substreams
    sweep      grid sweep -> two CSVs, trend report, optional SVG figure
    plot       render a long-form CSV to an SVG figure

Exit codes: 0 success, 2 usage or domain error (one-line diagnostic on
stderr), 3 runtime degeneracy (step cap exceeded, non-absorbing chain).
Output never contains timestamps; identical invocations produce identical
bytes, regardless of --jobs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import analysis, plots
from .errors import InvalidParams, NonAbsorbingChain, StepCapExceeded
from .model import (
    MatrixMode,
    ShotParams,
    expected_steps_game,
    expected_steps_round_closed_form,
    solve_game,
)
from .simulate import DEFAULT_STEP_CAP, SimConfig, empirical_summary, simulate_many

LONG_CSV_NAME = "win_by_position.csv"
SUMMARY_CSV_NAME = "summary.csv"

__all__ = ["main", "parse_float_range", "parse_int_range"]


def parse_float_range(text: str) -> tuple[float, ...]:
    """'start:stop:step' inclusive grid, or a single value; never empty."""
    parts = text.split(":")
    if len(parts) == 1:
        return (float(parts[0]),)
    if len(parts) == 2:
        raise ValueError(f"range {text!r} needs start:stop:step (or a single value)")
    if len(parts) != 3:
        raise ValueError(f"malformed range {text!r}")
    start, stop, step = (float(x) for x in parts)
    values = analysis.grid_values(start, stop, step)
    if not values:
        raise ValueError(f"range {text!r} contains no values")
    return values


def parse_int_range(text: str) -> tuple[int, ...]:
    """'start:stop[:step]' inclusive integer grid, or a single value; never empty."""
    parts = text.split(":")
    if len(parts) == 1:
        return (int(parts[0]),)
    if len(parts) == 2:
        start, stop, step = int(parts[0]), int(parts[1]), 1
    elif len(parts) == 3:
        start, stop, step = (int(x) for x in parts)
    else:
        raise ValueError(f"malformed range {text!r}")
    if step <= 0:
        raise ValueError(f"range {text!r} has non-positive step")
    values = tuple(range(start, stop + 1, step))
    if not values:
        raise ValueError(f"range {text!r} contains no values")
    return values


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _cmd_solve(args) -> int:
    params = ShotParams(args.p, args.q)
    mode = MatrixMode(args.mode)
    sol = solve_game(args.players, params, mode)
    win = [float(x) for x in sol.win_probs]
    elim = [float(x) for x in sol.round1_elimination]
    if args.format == "json":
        _emit_json(
            {
                "n": sol.n,
                "p": params.p,
                "q": params.q,
                "mode": mode.value,
                "win_probs": win,
                "round1_elimination": elim,
                "expected_steps": {
                    "numeric": sol.expected_steps_numeric,
                    "closed_form": sol.expected_steps_closed_form,
                    "per_round_closed_form": sol.expected_round_steps_closed_form,
                },
            }
        )
    elif args.format == "csv":
        print(
            "n,p,q,mode,pos,win_prob,round1_elim_prob,"
            "expected_steps_numeric,expected_steps_closed_form"
        )
        for pos in range(1, sol.n + 1):
            print(
                f"{sol.n},{_fmt(params.p)},{_fmt(params.q)},{mode.value},{pos},"
                f"{_fmt(win[pos - 1])},{_fmt(elim[pos - 1])},"
                f"{_fmt(sol.expected_steps_numeric)},{_fmt(sol.expected_steps_closed_form)}"
            )
    else:
        print(f"n={sol.n} p={_fmt(params.p)} q={_fmt(params.q)} mode={mode.value}")
        print("pos  win_prob         round1_elim_prob")
        for pos in range(1, sol.n + 1):
            print(f"{pos:>3}  {win[pos - 1]:<16.12g} {elim[pos - 1]:<16.12g}")
        print(
            f"expected steps: numeric {_fmt(sol.expected_steps_numeric)}, "
            f"closed form {_fmt(sol.expected_steps_closed_form)} "
            f"({sol.n - 1} rounds x {_fmt(sol.expected_round_steps_closed_form)})"
        )
    return 0


def _cmd_expected(args) -> int:
    params = ShotParams(args.p, args.q)
    mode = MatrixMode(args.mode)
    per_round = expected_steps_round_closed_form(params)
    game = expected_steps_game(args.players, params)
    if args.format == "json":
        _emit_json(
            {
                "n": args.players,
                "p": params.p,
                "q": params.q,
                "mode": mode.value,
                "rounds": args.players - 1,
                "per_round_closed_form": per_round,
                "game_closed_form": game,
            }
        )
    elif args.format == "csv":
        print("n,p,q,mode,rounds,per_round_closed_form,game_closed_form")
        print(
            f"{args.players},{_fmt(params.p)},{_fmt(params.q)},{mode.value},"
            f"{args.players - 1},{_fmt(per_round)},{_fmt(game)}"
        )
    else:
        print(
            f"n={args.players} p={_fmt(params.p)} q={_fmt(params.q)} mode={mode.value}: "
            f"expected {_fmt(game)} steps "
            f"({args.players - 1} rounds x {_fmt(per_round)} per round)"
        )
    return 0


def _cmd_simulate(args) -> int:
    params = ShotParams(args.p, args.q)
    config = SimConfig(
        n=args.players,
        params=params,
        games=args.games,
        seed=args.seed,
        step_cap=args.step_cap,
    )
    summary = empirical_summary(simulate_many(config, jobs=args.jobs))
    if args.format == "json":
        _emit_json(
            {
                "n": config.n,
                "p": params.p,
                "q": params.q,
                "games": config.games,
                "seed": config.seed,
                "step_cap": config.step_cap,
                "win_probs": list(summary.win_probs),
                "win_prob_se": list(summary.win_prob_se),
                "round1_elim_probs": list(summary.round1_elim_probs),
                "round1_elim_se": list(summary.round1_elim_se),
                "mean_steps": summary.mean_steps,
                "mean_steps_se": summary.mean_steps_se,
                "early_elim_rate": summary.early_elim_rate,
                "early_elim_se": summary.early_elim_se,
            }
        )
    elif args.format == "csv":
        print("n,p,q,games,seed,pos,win_prob,win_prob_se,round1_elim_prob,round1_elim_se")
        for pos in range(1, config.n + 1):
            print(
                f"{config.n},{_fmt(params.p)},{_fmt(params.q)},{config.games},"
                f"{config.seed},{pos},{_fmt(summary.win_probs[pos - 1])},"
                f"{_fmt(summary.win_prob_se[pos - 1])},"
                f"{_fmt(summary.round1_elim_probs[pos - 1])},"
                f"{_fmt(summary.round1_elim_se[pos - 1])}"
            )
    else:
        print(
            f"n={config.n} p={_fmt(params.p)} q={_fmt(params.q)} "
            f"games={config.games} seed={config.seed}"
        )
        print("pos  win_prob (se)                round1_elim (se)")
        for pos in range(1, config.n + 1):
            print(
                f"{pos:>3}  {summary.win_probs[pos - 1]:<10.6f} "
                f"({summary.win_prob_se[pos - 1]:.6f})          "
                f"{summary.round1_elim_probs[pos - 1]:<10.6f} "
                f"({summary.round1_elim_se[pos - 1]:.6f})"
            )
        print(
            f"mean steps {summary.mean_steps:.6f} (se {summary.mean_steps_se:.6f}), "
            f"P1 early elimination rate {summary.early_elim_rate:.6f} "
            f"(se {summary.early_elim_se:.6f})"
        )
    return 0


def _cmd_sweep(args) -> int:
    spec = analysis.SweepSpec(
        n_values=parse_int_range(args.n_range),
        p_values=parse_float_range(args.p_range),
        q_values=parse_float_range(args.q_range),
        mode=MatrixMode(args.mode),
    )
    result = analysis.run_sweep(spec, jobs=args.jobs)
    trends = analysis.detect_trends(result.records)

    os.makedirs(args.out_dir, exist_ok=True)
    long_path = os.path.join(args.out_dir, LONG_CSV_NAME)
    summary_path = os.path.join(args.out_dir, SUMMARY_CSV_NAME)
    analysis.write_long_csv(result.records, long_path)
    analysis.write_summary_csv(result.records, summary_path)
    figure_path = None
    if args.figure:
        plots.render_sweep_figure(result.records, args.figure)
        figure_path = args.figure

    grid_points = len(result.records) + len(result.excluded)
    if args.format == "json":
        payload = {
            "mode": spec.mode.value,
            "grid_points": grid_points,
            "solved": len(result.records),
            "excluded": len(result.excluded),
            "trends": trends.to_jsonable(),
            "files": {"long": long_path, "summary": summary_path},
        }
        if figure_path:
            payload["files"]["figure"] = figure_path
        _emit_json(payload)
    else:
        print(f"mode: {spec.mode.value}")
        print(
            f"grid: {grid_points} points, {len(result.records)} solved, "
            f"{len(result.excluded)} excluded"
        )
        print(trends.describe())
        print(f"wrote {long_path}")
        print(f"wrote {summary_path}")
        if figure_path:
            print(f"wrote {figure_path}")
    return 0


def _cmd_plot(args) -> int:
    rows = analysis.read_long_rows(args.input)
    plots.render_rows(rows, args.kind, args.out)
    print(f"wrote {args.out}")
    return 0


def _add_common_point_args(sub, with_mode: bool = True) -> None:
    sub.add_argument("--players", type=int, required=True, help="number of players n")
    sub.add_argument("--p", type=float, required=True, help="long-shot probability")
    sub.add_argument("--q", type=float, required=True, help="short-shot probability")
    if with_mode:
        sub.add_argument(
            "--mode",
            choices=[m.value for m in MatrixMode],
            default=MatrixMode.CORRECTED.value,
            help="block-4 elimination convention (default: corrected)",
        )
    sub.add_argument(
        "--format",
        choices=["json", "csv", "human"],
        default="json",
        help="output format (default: json)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="knockout",
        description="Exact solver and Monte Carlo oracle for the game Knockout.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser(
        "solve",
        help="exact win and round-1 elimination distributions plus expected steps",
    )
    _add_common_point_args(solve)
    solve.set_defaults(func=_cmd_solve)

    expected = sub.add_parser(
        "expected",
        help="closed-form expected game length (mode-independent; fast for any n)",
    )
    _add_common_point_args(expected)
    expected.set_defaults(func=_cmd_expected)

    simulate = sub.add_parser(
        "simulate",
        help="rules-level Monte Carlo; output depends only on the arguments, not --jobs",
    )
    _add_common_point_args(simulate, with_mode=False)
    simulate.add_argument("--games", type=int, default=100_000, help="games to play")
    simulate.add_argument("--seed", type=int, default=0, help="root seed (64-bit)")
    simulate.add_argument("--jobs", type=int, default=1, help="worker threads")
    simulate.add_argument(
        "--step-cap",
        type=int,
        default=DEFAULT_STEP_CAP,
        help="abort any game exceeding this many steps (exit 3)",
    )
    simulate.set_defaults(func=_cmd_simulate)

    sweep = sub.add_parser(
        "sweep",
        help="solve a (n, p, q) grid; writes win_by_position.csv and summary.csv",
    )
    sweep.add_argument("--n-range", default="2:12", help="players, start:stop[:step] or value")
    sweep.add_argument("--p-range", default="0:0.95:0.05", help="p grid, start:stop:step or value")
    sweep.add_argument("--q-range", default="0.05:1:0.05", help="q grid, start:stop:step or value")
    sweep.add_argument(
        "--mode",
        choices=[m.value for m in MatrixMode],
        default=MatrixMode.CORRECTED.value,
        help="block-4 elimination convention (default: corrected)",
    )
    sweep.add_argument("--jobs", type=int, default=1, help="worker threads")
    sweep.add_argument("--out-dir", default=".", help="directory for the CSV files")
    sweep.add_argument(
        "--figure",
        default=None,
        help="also render an SVG: win vs position per n at the median grid point",
    )
    sweep.add_argument(
        "--format",
        choices=["json", "human"],
        default="human",
        help="trend report format (default: human)",
    )
    sweep.set_defaults(func=_cmd_sweep)

    plot = sub.add_parser("plot", help="render a long-form CSV to an SVG figure")
    plot.add_argument("--input", required=True, help="long-form CSV (n,p,q,mode,pos,win_prob)")
    plot.add_argument(
        "--kind",
        choices=list(plots.FIGURE_KINDS),
        default="positions",
        help="positions: win prob by position; bump: even-position bump",
    )
    plot.add_argument("--out", required=True, help="output SVG path")
    plot.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse has already printed usage/help; normalise its exit code
        code = exc.code if isinstance(exc.code, int) else 2
        return 0 if code == 0 else 2
    try:
        return args.func(args)
    except (InvalidParams, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NonAbsorbingChain, StepCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
