"""Rules-level Monte Carlo oracle for knockout games.

Nothing here knows about the chain model: games are played out shot by shot
from the rules, so agreement with the exact route is evidence for the model
rather than a tautology.

Two implementations share pinned RNG streams (see :mod:`knockout.rng`):

* :func:`simulate_game`, a readable pure-Python reference that also accepts
  stubbed generators for forced-path tests, and
* the compiled batch kernel in :mod:`knockout._kernel` used by
  :func:`simulate_many`.

simulate_many splits work into fixed blocks of BLOCK_GAMES games, block b
drawing from substream_seed(seed, b).  Workers only distribute whole blocks
and aggregation is a sum over blocks in index order, so results are
byte-identical for any `jobs` value.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .errors import InvalidParams, StepCapExceeded
from .model import ShotParams
from .rng import Xoshiro256PlusPlus, substream_seed

# Games per substream block; fixed so that results never depend on scheduling.
BLOCK_GAMES = 1 << 16

DEFAULT_STEP_CAP = 10_000_000

__all__ = [
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


@dataclass(frozen=True)
class SimConfig:
    """A reproducible simulation request."""

    n: int
    params: ShotParams
    games: int
    seed: int
    step_cap: int = DEFAULT_STEP_CAP

    def __post_init__(self):
        if self.n < 2:
            raise InvalidParams(f"a game needs at least 2 players, got n={self.n}")
        if self.games < 1:
            raise InvalidParams(f"games must be >= 1, got {self.games}")
        if not 0 <= self.seed < 2**64:
            raise InvalidParams(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.step_cap < 1:
            raise InvalidParams(f"step_cap must be >= 1, got {self.step_cap}")


@dataclass(frozen=True)
class GameTrace:
    """Full outcome of one simulated game.

    elimination_order holds starting positions, first knockout first; the
    winner's starting position is the one missing from it.  steps counts
    shot pairs (a lone chaser shot that ends a round still counts one), so
    steps >= n - 1.
    """

    winner_start_position: int
    steps: int
    elimination_order: tuple[int, ...]
    p1_eliminated_early: bool


@dataclass(frozen=True)
class SimResult:
    """Aggregate counts from a batch of games."""

    config: SimConfig
    win_counts: np.ndarray
    round1_elim_counts: np.ndarray
    total_steps: int
    total_steps_sq: float
    early_elim_count: int
    games_played: int


def simulate_game(
    n: int,
    params: ShotParams,
    rng,
    step_cap: int = DEFAULT_STEP_CAP,
) -> GameTrace:
    """Play one n-player game shot by shot.

    Args:
        n: number of players, >= 2.
        params: shot probabilities.
        rng: any object with random() -> float in [0, 1); one draw per shot.
        step_cap: raise StepCapExceeded when the step counter passes this.

    Players start in line order 1..n.  The two front players hold the balls;
    the holder in front is the target, the one behind the chaser.  A target
    who scores hands their ball to the first player waiting in line (keeping
    it if nobody waits) and rejoins the back; a chaser who scores knocks the
    target out and ends the round.  Survivors keep their waiting order for
    the next round and the chaser joins at the back.
    """
    if n < 2:
        raise InvalidParams(f"a game needs at least 2 players, got n={n}")
    p, q = params.p, params.q
    order = list(range(1, n + 1))
    steps = 0
    eliminated: list[int] = []
    p1_made = False
    p1_early = False
    first_round = True
    while len(order) > 1:
        pa, pb = order[0], order[1]
        waiting = order[2:]
        la = lb = True
        target = pa
        out = 0
        chaser = 0
        while out == 0:
            steps += 1
            if steps > step_cap:
                raise StepCapExceeded(
                    f"game exceeded step cap {step_cap} at n={n}, p={p}, q={q}"
                )
            if rng.random() < (p if la else q):
                if pa == target:
                    if first_round and pa == 1:
                        p1_made = True
                    if waiting:
                        waiting.append(pa)
                        pa = waiting.pop(0)
                    la = True
                    target = pb
                else:
                    out = target
                    chaser = pa
                    break
            else:
                la = False
            if rng.random() < (p if lb else q):
                if pb == target:
                    if first_round and pb == 1:
                        p1_made = True
                    if waiting:
                        waiting.append(pb)
                        pb = waiting.pop(0)
                    lb = True
                    target = pa
                else:
                    out = target
                    chaser = pb
                    break
            else:
                lb = False
        eliminated.append(out)
        if first_round:
            if out == 1 and not p1_made:
                p1_early = True
            first_round = False
        order = waiting + [chaser]
    return GameTrace(
        winner_start_position=order[0],
        steps=steps,
        elimination_order=tuple(eliminated),
        p1_eliminated_early=p1_early,
    )


def _block_sizes(games: int) -> list[int]:
    full, rest = divmod(games, BLOCK_GAMES)
    sizes = [BLOCK_GAMES] * full
    if rest:
        sizes.append(rest)
    return sizes


def simulate_many(config: SimConfig, jobs: int = 1) -> SimResult:
    """Run config.games games through the compiled kernel.

    jobs > 1 distributes whole substream blocks across threads (the kernel
    releases the GIL); aggregates are identical for every jobs value.
    """
    if jobs < 1:
        raise InvalidParams(f"jobs must be >= 1, got {jobs}")
    n = config.n
    p, q = config.params.p, config.params.q
    sizes = _block_sizes(config.games)

    def run(block: int):
        # np.uint64: seeds above 2**63 overflow the default int64 argument typing
        return _kernel.run_block(
            np.uint64(substream_seed(config.seed, block)),
            sizes[block],
            n,
            p,
            q,
            config.step_cap,
        )

    if jobs == 1 or len(sizes) == 1:
        results = [run(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, range(len(sizes))))

    win = np.zeros(n, dtype=np.int64)
    elim1 = np.zeros(n, dtype=np.int64)
    total_steps = 0
    total_steps_sq = 0.0
    early = 0
    for block, (w, e, ts, ts2, ea, cap_hit) in enumerate(results):
        if cap_hit >= 0:
            raise StepCapExceeded(
                f"game {block * BLOCK_GAMES + cap_hit} exceeded step cap "
                f"{config.step_cap}",
                game_index=block * BLOCK_GAMES + cap_hit,
            )
        win += w
        elim1 += e
        total_steps += int(ts)
        total_steps_sq += float(ts2)
        early += int(ea)
    return SimResult(
        config=config,
        win_counts=win,
        round1_elim_counts=elim1,
        total_steps=total_steps,
        total_steps_sq=total_steps_sq,
        early_elim_count=early,
        games_played=config.games,
    )


@dataclass(frozen=True)
class EmpiricalSummary:
    """Frequencies with binomial standard errors, plus step statistics."""

    win_probs: tuple[float, ...]
    win_prob_se: tuple[float, ...]
    round1_elim_probs: tuple[float, ...]
    round1_elim_se: tuple[float, ...]
    mean_steps: float
    mean_steps_se: float
    early_elim_rate: float
    early_elim_se: float
    games_played: int


def _binomial_se(f: float, games: int) -> float:
    return math.sqrt(f * (1.0 - f) / games)


def empirical_summary(result: SimResult) -> EmpiricalSummary:
    g = result.games_played
    win = tuple(float(c) / g for c in result.win_counts)
    elim = tuple(float(c) / g for c in result.round1_elim_counts)
    mean = result.total_steps / g
    var = max(result.total_steps_sq / g - mean * mean, 0.0)
    early = result.early_elim_count / g
    return EmpiricalSummary(
        win_probs=win,
        win_prob_se=tuple(_binomial_se(f, g) for f in win),
        round1_elim_probs=elim,
        round1_elim_se=tuple(_binomial_se(f, g) for f in elim),
        mean_steps=mean,
        mean_steps_se=math.sqrt(var / g),
        early_elim_rate=early,
        early_elim_se=_binomial_se(early, g),
        games_played=g,
    )
