"""Exact solver and Monte Carlo oracle for the playground game Knockout.

Players line up and shoot in pairs; whoever is in front is knocked out if
the player behind scores first.  The package answers, per starting position:
who wins how often, who is eliminated when, and how long games run, both by
absorbing Markov chains (exact) and by rules-level simulation (oracle).
"""

from __future__ import annotations

from .errors import (
    DenominatorZero,
    EliminatedHasNoPosition,
    InvalidParams,
    KnockoutError,
    NonAbsorbingChain,
    SingularMatrix,
    StepCapExceeded,
)
from .markov import (
    AbsorbingChain,
    ChainDiagnostics,
    absorption_by_power_series,
    absorption_probabilities,
    expected_steps,
    power_series_terms,
    solve_linear,
    validate_chain,
)
from .model import (
    GameSolution,
    MatrixMode,
    RoundChain,
    ShotParams,
    build_round_chain,
    build_two_player_chain,
    cyclic_shift,
    elimination_distribution,
    expected_steps_game,
    expected_steps_round_closed_form,
    new_position,
    p1_early_elimination,
    solve_game,
    three_player_elim_closed_form,
    two_player_win_closed_form,
    win_distribution,
)
from .rng import Xoshiro256PlusPlus, substream_seed
from .simulate import (
    BLOCK_GAMES,
    DEFAULT_STEP_CAP,
    EmpiricalSummary,
    GameTrace,
    SimConfig,
    SimResult,
    empirical_summary,
    simulate_game,
    simulate_many,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "KnockoutError",
    "InvalidParams",
    "SingularMatrix",
    "NonAbsorbingChain",
    "StepCapExceeded",
    "DenominatorZero",
    "EliminatedHasNoPosition",
    "AbsorbingChain",
    "ChainDiagnostics",
    "solve_linear",
    "absorption_probabilities",
    "expected_steps",
    "absorption_by_power_series",
    "power_series_terms",
    "validate_chain",
    "ShotParams",
    "MatrixMode",
    "RoundChain",
    "GameSolution",
    "cyclic_shift",
    "build_two_player_chain",
    "build_round_chain",
    "elimination_distribution",
    "new_position",
    "win_distribution",
    "solve_game",
    "two_player_win_closed_form",
    "expected_steps_round_closed_form",
    "expected_steps_game",
    "p1_early_elimination",
    "three_player_elim_closed_form",
    "Xoshiro256PlusPlus",
    "substream_seed",
    "BLOCK_GAMES",
    "DEFAULT_STEP_CAP",
    "SimConfig",
    "GameTrace",
    "SimResult",
    "EmpiricalSummary",
    "simulate_game",
    "simulate_many",
    "empirical_summary",
]
