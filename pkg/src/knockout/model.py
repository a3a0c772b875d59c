"""Knockout round chains, elimination/win distributions, and closed forms.

A round with m players in line order P1..Pm is an absorbing chain over pair
states: two players hold balls at any time, the one in front is in danger,
and the one behind eliminates them by scoring first.  Each step is one pair
of shots.  Absorption tells us who gets knocked out; chaining rounds through
the reseating rule gives per-starting-position win probabilities for the
whole game.

State blocks of the m-player round chain (block index j is cyclic, with
successor s = j mod m + 1; P_j is the player in danger in every block):

    block 1: P_j long shot, then P_s long shot
    block 2: P_j short shot, then P_s short shot
    block 3: P_s short shot, then P_j short shot   (chaser shoots first)
    block 4: P_j short shot, then P_s long shot
    block 5: P_s long shot, then P_j short shot    (chaser shoots first)

followed by m absorbing states "P_j eliminated".  In blocks 3 and 5 a make
by the chaser ends the step after a single shot.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DenominatorZero,
    EliminatedHasNoPosition,
    InvalidParams,
    NonAbsorbingChain,
)
from .markov import AbsorbingChain, absorption_probabilities, expected_steps

__all__ = [
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
]


@dataclass(frozen=True)
class ShotParams:
    """Shot-making probabilities.

    Args:
        p: probability of making the long shot that opens each possession.
        q: probability of making each short shot after a long-shot miss.

    Domain: 0 <= p < 1 and 0 < q <= 1, excluding (p=0, q=1).  Outside it a
    game can last forever: with p = 1 every possession scores immediately
    and nobody is ever in danger long enough to lose, with q = 0 two players
    who both missed their long shots brick short shots for eternity, and
    with p = 0, q = 1 the pair alternates miss-make-make forever.
    """

    p: float
    q: float

    def __post_init__(self):
        p, q = float(self.p), float(self.q)
        if not (math.isfinite(p) and math.isfinite(q)):
            raise InvalidParams(f"shot probabilities must be finite, got p={p}, q={q}")
        if not 0.0 <= p < 1.0:
            raise InvalidParams(f"long-shot probability p must satisfy 0 <= p < 1, got {p}")
        if not 0.0 < q <= 1.0:
            raise InvalidParams(f"short-shot probability q must satisfy 0 < q <= 1, got {q}")
        if p == 0.0 and q == 1.0:
            raise InvalidParams(
                "p=0 with q=1 never terminates (long shots always miss, "
                "short shots always rescue)"
            )
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)


class MatrixMode(str, enum.Enum):
    """Which player the mixed-shot elimination in block 4 is charged to.

    CORRECTED: the player in danger who missed their short shot is the one
    eliminated when the long shot behind them drops (identity column).
    This is what the rules say, and rules-level simulation confirms it.

    PAPER: that one elimination column is cyclically shifted down a player,
    as produced by extending the shift pattern of the neighbouring blocks
    when writing the matrix out by hand.  Kept as a comparison switch; the
    two modes differ in exactly m entries of the m-player round matrix.
    """

    CORRECTED = "corrected"
    PAPER = "paper"


@dataclass(frozen=True, eq=False)
class RoundChain:
    """One round of knockout as an absorbing chain.

    Attributes:
        n: number of players in the round.
        params: shot probabilities.
        mode: block-4 elimination convention.
        chain: the canonical-form chain; absorbing state k means the player
            who started the round at absorbing_positions[k-1] is eliminated.
        start: 1-based index of the start state (fresh pair at the front).
        absorbing_positions: starting position knocked out per absorbing state.
    """

    n: int
    params: ShotParams
    mode: MatrixMode
    chain: AbsorbingChain
    start: int
    absorbing_positions: tuple[int, ...]


def cyclic_shift(n: int, k: int = 1) -> np.ndarray:
    """Permutation matrix sending row j to column (j + k) mod n (0-based)."""
    if n < 1:
        raise InvalidParams(f"shift matrix order must be >= 1, got {n}")
    m = np.zeros((n, n))
    m[np.arange(n), (np.arange(n) + k) % n] = 1.0
    return m


def _two_player_blocks(p: float, q: float) -> tuple[np.ndarray, np.ndarray]:
    # Raw (Q, R) for the 7-state two-player round; G1..G5 transient,
    # absorbing order (P2 eliminated, P1 eliminated).
    q_ = np.array(
        [
            [p * p, (1 - p) ** 2, 0.0, p * (1 - p), 0.0],
            [q * q, (1 - q) ** 2, 0.0, q * (1 - q), 0.0],
            [q * p, (1 - q) * (1 - p), 0.0, q * (1 - p), 0.0],
            [0.0, 0.0, (1 - p) * q, 0.0, (1 - p) * (1 - q)],
            [0.0, 0.0, (1 - q) * q, 0.0, (1 - q) ** 2],
        ]
    )
    r_ = np.array(
        [
            [0.0, (1 - p) * p],
            [0.0, (1 - q) * q],
            [0.0, (1 - q) * p],
            [p, 0.0],
            [q, 0.0],
        ]
    )
    return q_, r_


_TWO_PLAYER_LABELS = (
    "G1: P1 long shot, then P2 long shot (P1 in danger)",
    "G2: P1 short shot, then P2 short shot (P1 in danger)",
    "G3: P1 short shot, then P2 long shot (P1 in danger)",
    "G4: P2 long shot, then P1 short shot (P2 in danger)",
    "G5: P2 short shot, then P1 short shot (P2 in danger)",
    "G6: P2 eliminated",
    "G7: P1 eliminated",
)


def build_two_player_chain(params: ShotParams) -> RoundChain:
    """Dedicated 7-state chain for a two-player round.

    With nobody waiting in line, a player who scores keeps the ball, so the
    pair structure collapses to five transient states G1..G5 plus the two
    eliminations.  The start state G1 is both players on fresh long shots
    with P1 in danger.
    """
    q_, r_ = _two_player_blocks(params.p, params.q)
    chain = AbsorbingChain(q_, r_, labels=_TWO_PLAYER_LABELS)
    return RoundChain(
        n=2,
        params=params,
        mode=MatrixMode.CORRECTED,
        chain=chain,
        start=1,
        absorbing_positions=(2, 1),
    )


def _round_blocks(
    n: int, p: float, q: float, mode: MatrixMode
) -> tuple[np.ndarray, np.ndarray]:
    # Raw (Q, R) for the 6n-state round chain; block layout per module docstring.
    a = cyclic_shift(n, 1)
    b = cyclic_shift(n, 2)
    i = np.eye(n)
    z = np.zeros((n, n))
    q_ = np.block(
        [
            [p * p * b, (1 - p) ** 2 * i, z, z, p * (1 - p) * a],
            [q * q * b, (1 - q) ** 2 * i, z, z, q * (1 - q) * a],
            [z, z, (1 - q) ** 2 * i, (1 - q) * q * a, z],
            [q * p * b, (1 - q) * (1 - p) * i, z, z, q * (1 - p) * a],
            [z, z, (1 - p) * (1 - q) * i, (1 - p) * q * a, z],
        ]
    )
    elim4 = a if mode is MatrixMode.PAPER else i
    r_ = np.vstack(
        [
            (1 - p) * p * i,
            (1 - q) * q * i,
            q * i,
            (1 - q) * p * elim4,
            p * i,
        ]
    )
    return q_, r_


def _round_labels(n: int) -> tuple[str, ...]:
    def s(j: int) -> int:
        return j % n + 1

    shots = (
        ("long shot", "long shot", False),
        ("short shot", "short shot", False),
        ("short shot", "short shot", True),
        ("short shot", "long shot", False),
        ("long shot", "short shot", True),
    )
    labels: list[str] = []
    for first_shot, second_shot, chaser_first in shots:
        for j in range(1, n + 1):
            if chaser_first:
                first, second = s(j), j
            else:
                first, second = j, s(j)
            labels.append(
                f"P{first} {first_shot}, then P{second} {second_shot} (P{j} in danger)"
            )
    labels.extend(f"P{j} eliminated" for j in range(1, n + 1))
    return tuple(labels)


def build_round_chain(
    n: int, params: ShotParams, mode: MatrixMode = MatrixMode.CORRECTED
) -> RoundChain:
    """Block-structured 6n-state chain for an n-player round (n >= 2).

    Absorbing state j means the player who started the round in position j
    is eliminated.  The start state is block 1, position 1: P1 and P2 on
    fresh long shots.  At n = 2 exactly 7 of the 12 states are reachable
    and the chain restricted to them coincides with
    :func:`build_two_player_chain`.
    """
    if n < 2:
        raise InvalidParams(f"a round needs at least 2 players, got n={n}")
    mode = MatrixMode(mode)
    q_, r_ = _round_blocks(n, params.p, params.q, mode)
    chain = AbsorbingChain(q_, r_, labels=_round_labels(n))
    return RoundChain(
        n=n,
        params=params,
        mode=mode,
        chain=chain,
        start=1,
        absorbing_positions=tuple(range(1, n + 1)),
    )


def elimination_distribution(round_chain: RoundChain) -> np.ndarray:
    """Probability that each starting position is the one knocked out.

    Indexed by position: entry k-1 is the probability that the player who
    began the round in position k is eliminated.
    """
    try:
        raw = absorption_probabilities(round_chain.chain, round_chain.start)
    except NonAbsorbingChain as exc:
        pr = round_chain.params
        raise NonAbsorbingChain(
            f"round with n={round_chain.n}, p={pr.p}, q={pr.q} never eliminates: {exc}"
        ) from exc
    out = np.zeros(round_chain.n)
    for slot, pos in enumerate(round_chain.absorbing_positions):
        out[pos - 1] = raw[slot]
    return out


def new_position(k: int, i: int, m: int) -> int:
    """Next-round position of the player at position k after P_i is knocked out.

    The eliminator is the player right behind P_i (cyclically): they have
    just scored, so they hand the ball on and rejoin at the back.  The next
    round therefore opens P_{i+2}, P_{i+3}, ..., P_{i-1} with the eliminator
    last, which for survivors means ((k - i - 2) mod m) + 1 and m - 1 for
    the eliminator.
    """
    if m < 2:
        raise InvalidParams(f"a round needs at least 2 players, got m={m}")
    if not (1 <= k <= m and 1 <= i <= m):
        raise InvalidParams(f"positions must lie in 1..{m}, got k={k}, i={i}")
    if k == i:
        raise EliminatedHasNoPosition(
            f"P{i} was eliminated from the {m}-player round and has no next position"
        )
    if k == i % m + 1:
        return m - 1
    return (k - i - 2) % m + 1


def _round_elimination(m: int, params: ShotParams, mode: MatrixMode) -> np.ndarray:
    # Final head-to-head rounds always use the exact 7-state chain; the
    # block-4 convention only matters when somebody is waiting in line.
    if m == 2:
        return elimination_distribution(build_two_player_chain(params))
    return elimination_distribution(build_round_chain(m, params, mode))


@dataclass(frozen=True, eq=False)
class GameSolution:
    """Everything the exact route knows about one parameter point."""

    n: int
    params: ShotParams
    mode: MatrixMode
    win_probs: np.ndarray
    round1_elimination: np.ndarray
    expected_steps_numeric: float
    expected_steps_closed_form: float
    expected_round_steps_closed_form: float


def solve_game(
    n: int, params: ShotParams, mode: MatrixMode = MatrixMode.CORRECTED
) -> GameSolution:
    """Chain rounds from n players down to 2 and solve the whole game.

    Win probabilities follow the recursion w_1 = (1,) and

        w_m(k) = sum over eliminated i != k of e_m(i) * w_{m-1}(new_position(k, i, m))

    where e_m is the round elimination distribution.  Expected game length
    is the sum of per-round expected steps (which are n-independent, so the
    numeric sum cross-checks (n-1) times the closed form).
    """
    if n < 2:
        raise InvalidParams(f"a game needs at least 2 players, got n={n}")
    mode = MatrixMode(mode)
    w = np.array([1.0])
    steps_numeric = 0.0
    elim_n: np.ndarray | None = None
    for m in range(2, n + 1):
        rc = build_two_player_chain(params) if m == 2 else build_round_chain(m, params, mode)
        e = elimination_distribution(rc)
        steps_numeric += expected_steps(rc.chain, rc.start)
        if m == n:
            elim_n = e
        k = np.arange(1, m + 1)[:, np.newaxis]
        i = np.arange(1, m + 1)[np.newaxis, :]
        pos = (k - i - 2) % m + 1
        pos = np.where(i % m + 1 == k, m - 1, pos)
        contrib = e[np.newaxis, :] * w[pos - 1]
        w = np.where(k == i, 0.0, contrib).sum(axis=1)
    assert elim_n is not None
    per_round = expected_steps_round_closed_form(params)
    return GameSolution(
        n=n,
        params=params,
        mode=mode,
        win_probs=w,
        round1_elimination=elim_n,
        expected_steps_numeric=steps_numeric,
        expected_steps_closed_form=(n - 1) * per_round,
        expected_round_steps_closed_form=per_round,
    )


def win_distribution(
    n: int, params: ShotParams, mode: MatrixMode = MatrixMode.CORRECTED
) -> np.ndarray:
    """Probability that each starting position wins the n-player game."""
    if n == 1:
        return np.array([1.0])
    return solve_game(n, params, mode).win_probs


def two_player_win_closed_form(p: float) -> float:
    """P1's win probability in a head-to-head game: 1 / (3 - p).

    Notably independent of the short-shot probability q.
    """
    p = float(p)
    if not (math.isfinite(p) and 0.0 <= p < 1.0):
        raise InvalidParams(f"long-shot probability p must satisfy 0 <= p < 1, got {p}")
    return 1.0 / (3.0 - p)


def expected_steps_round_closed_form(params: ShotParams) -> float:
    """Expected steps (shot pairs) per round, independent of the player count."""
    p, q = params.p, params.q
    num = -(p + q - 3.0) * (p * p - p * q - 2.0 * p + 2.0 * q + 1.0)
    den = q * (p - 3.0) * (p - 1.0) * (p - q + 1.0)
    return num / den


def expected_steps_game(n: int, params: ShotParams) -> float:
    """Expected steps for a full n-player game: (n - 1) rounds' worth."""
    if n < 2:
        raise InvalidParams(f"a game needs at least 2 players, got n={n}")
    return (n - 1) * expected_steps_round_closed_form(params)


def p1_early_elimination(params: ShotParams) -> float:
    """Probability P1 is knocked out in round 1 without ever scoring.

    P1 falls at the first pair with probability (1-p)p, or survives into
    the both-on-short-shots grind and loses it without scoring:
    (1-p)^2 (1-q)q / (1 - (1-q)^2).
    """
    p, q = params.p, params.q
    return (1.0 - p) * p + (1.0 - p) ** 2 * (1.0 - q) * q / (1.0 - (1.0 - q) ** 2)


def three_player_elim_closed_form(params: ShotParams) -> float:
    """Probability that P1 is the player knocked out of a 3-player round.

    Evaluates the factored rational expression verbatim, including the
    common factor F2 of numerator and denominator; DenominatorZero flags
    parameter points where a printed denominator factor vanishes instead of
    silently cancelling it.
    """
    p, q = params.p, params.q
    f1 = p**3 - 2 * p**2 * q + p * q**2 + p * q - 2 * q**2 - p + 5 * q - 4
    f2 = p**4 - 2 * p**3 * q + p**2 * q**2 - p**3 + p**2 * q + 4 * p**2 - 3 * p * q - 3 * p + 3
    d1 = (
        p**4 - 2 * p**3 * q + p**2 * q**2 - 3 * p**3 + 5 * p**2 * q - 2 * p * q**2
        + 4 * p**2 - 7 * p * q + 4 * q**2 + 3 * p - 8 * q + 7
    )
    if d1 == 0.0 or f2 == 0.0:
        raise DenominatorZero(
            f"denominator factor vanishes at p={p}, q={q} (D1={d1}, F2={f2})"
        )
    return -(f1 * f2) / (d1 * f2)
