"""Monte Carlo oracle: reference simulator, compiled kernel, RNG streams."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knockout import _kernel
from knockout.errors import InvalidParams, StepCapExceeded
from knockout.model import ShotParams
from knockout.rng import Xoshiro256PlusPlus, splitmix64_mix, substream_seed
from knockout.simulate import (
    BLOCK_GAMES,
    EmpiricalSummary,
    GameTrace,
    SimConfig,
    SimResult,
    empirical_summary,
    simulate_game,
    simulate_many,
)

P49 = ShotParams(0.4, 0.9)


class ScriptedRng:
    """Returns a fixed list of draws; fails loudly if exhausted."""

    def __init__(self, draws):
        self.draws = list(draws)

    def random(self) -> float:
        return self.draws.pop(0)


# ----------------------------------------------------------------- forced paths


def test_forced_path_target_scores_then_chaser_wins():
    # pair 1: P1 (target) makes the long shot, P2 misses -> P2 now in danger
    # pair 2: P1 (now chasing) makes immediately -> P2 out after 2 steps
    rng = ScriptedRng([0.0, 0.95, 0.0])
    trace = simulate_game(2, P49, rng)
    assert trace == GameTrace(
        winner_start_position=1,
        steps=2,
        elimination_order=(2,),
        p1_eliminated_early=False,
    )
    assert rng.draws == []  # exactly three shots happen


def test_forced_path_p1_eliminated_without_scoring():
    # P1 misses the long shot, P2 drains theirs: earliest possible exit
    trace = simulate_game(2, P49, ScriptedRng([0.95, 0.0]))
    assert trace.winner_start_position == 2
    assert trace.steps == 1
    assert trace.elimination_order == (1,)
    assert trace.p1_eliminated_early is True


def test_forced_path_p1_scores_before_falling_is_not_early():
    # P1 makes (ball passes on, n=3), then loses the rematch later
    draws = [
        0.0,   # P1 makes long shot; ball to P3, P1 to the back, P2 in danger
        0.0,   # P2 makes; ball passes to P1(!), P3 in danger
        0.95,  # P3 misses long shot
        0.0,   # P1 makes: P3 out, round over; order P2, P1... P2 vs P1 next
        0.95,  # P2 misses
        0.0,   # P1 makes: P2 out
    ]
    trace = simulate_game(3, P49, ScriptedRng(draws))
    assert trace.elimination_order == (3, 2)
    assert trace.winner_start_position == 1
    assert trace.p1_eliminated_early is False
    assert trace.steps == 3


def test_forced_path_round_order_puts_eliminator_last():
    # n=4: P2 eliminates P1 on the first pair; next round must open P3 P4 P2
    draws = [
        0.95, 0.0,       # P1 misses, P2 scores: P1 out; round 2 is P3 P4 P2
        0.95, 0.0,       # P3 misses, P4 scores: P3 out; round 3 is P2 P4
        0.0, 0.95,       # P2 (in danger) scores and swaps roles; P4 misses
        0.0,             # P2 scores as chaser: P4 out
    ]
    trace = simulate_game(4, P49, ScriptedRng(draws))
    assert trace.elimination_order == (1, 3, 4)
    assert trace.winner_start_position == 2
    assert trace.steps == 4


def test_step_cap_raises():
    rng = ScriptedRng([0.95, 0.95] * 10)
    with pytest.raises(StepCapExceeded):
        simulate_game(2, P49, rng, step_cap=3)


def test_simulate_game_rejects_single_player():
    with pytest.raises(InvalidParams):
        simulate_game(1, P49, ScriptedRng([]))


@given(seed=st.integers(0, 2**64 - 1), n=st.integers(2, 8))
@settings(max_examples=40, deadline=None)
def test_trace_shape_invariants(seed, n):
    trace = simulate_game(n, P49, Xoshiro256PlusPlus(seed))
    assert trace.steps >= n - 1
    assert len(trace.elimination_order) == n - 1
    everyone = set(trace.elimination_order) | {trace.winner_start_position}
    assert everyone == set(range(1, n + 1))


def test_simulate_game_is_deterministic_per_seed():
    a = simulate_game(5, P49, Xoshiro256PlusPlus(99))
    b = simulate_game(5, P49, Xoshiro256PlusPlus(99))
    assert a == b


# ------------------------------------------------------------------ rng streams


def test_splitmix_golden_values():
    # SplitMix64 of state 0 advances to the golden-ratio constant; mixing is
    # fixed forever, so these outputs are frozen
    assert splitmix64_mix(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF
    assert substream_seed(0, 0) == 0xE220A8397B1DCDAF
    assert substream_seed(0, 1) == 0x6E789E6AA1B965F4
    assert substream_seed(1, 0) == 0x910A2DEC89025CC1


def test_substream_seeds_are_distinct():
    seeds = {substream_seed(12345, i) for i in range(4096)}
    assert len(seeds) == 4096


def test_xoshiro_uniform_range():
    rng = Xoshiro256PlusPlus(7)
    draws = [rng.random() for _ in range(1000)]
    assert all(0.0 <= d < 1.0 for d in draws)
    assert 0.4 < sum(draws) / len(draws) < 0.6


@pytest.mark.parametrize("seed", [0, 1, 7, 0xDEADBEEF, 2**64 - 1])
def test_kernel_stream_matches_pure_python(seed):
    ref = Xoshiro256PlusPlus(seed)
    want = np.array([ref.next_uint64() for _ in range(128)], dtype=np.uint64)
    got = _kernel.stream_probe(np.uint64(seed), 128)
    assert (want == got).all()


# ------------------------------------------------------------ kernel vs python


def _python_block(seed, games, n, params):
    rng = Xoshiro256PlusPlus(seed)
    win = np.zeros(n, np.int64)
    elim1 = np.zeros(n, np.int64)
    steps = 0
    steps_sq = 0.0
    early = 0
    for _ in range(games):
        t = simulate_game(n, params, rng)
        win[t.winner_start_position - 1] += 1
        elim1[t.elimination_order[0] - 1] += 1
        steps += t.steps
        steps_sq += float(t.steps) ** 2
        early += t.p1_eliminated_early
    return win, elim1, steps, steps_sq, early


@pytest.mark.parametrize(
    "n,p,q,seed,games",
    [
        (2, 0.4, 0.9, 7, 500),
        (3, 0.4, 0.9, 11, 500),
        (7, 0.4, 0.9, 123, 300),
        (10, 0.5, 0.9, 5, 200),
        (4, 0.05, 0.2, 99, 150),
    ],
)
def test_kernel_matches_reference_exactly(n, p, q, seed, games):
    params = ShotParams(p, q)
    s = substream_seed(seed, 0)
    kw, ke, kts, kts2, kearly, cap = _kernel.run_block(
        np.uint64(s), games, n, p, q, 10_000_000
    )
    pw, pe, pts, pts2, pearly = _python_block(s, games, n, params)
    assert cap == -1
    assert (kw == pw).all()
    assert (ke == pe).all()
    assert int(kts) == pts
    assert float(kts2) == pts2
    assert int(kearly) == pearly


# -------------------------------------------------------------- simulate_many


def test_single_game_equals_reference_game():
    config = SimConfig(n=4, params=P49, games=1, seed=31337)
    result = simulate_many(config)
    trace = simulate_game(4, P49, Xoshiro256PlusPlus(substream_seed(31337, 0)))
    assert result.win_counts[trace.winner_start_position - 1] == 1
    assert result.win_counts.sum() == 1
    assert result.round1_elim_counts[trace.elimination_order[0] - 1] == 1
    assert result.total_steps == trace.steps
    assert result.early_elim_count == int(trace.p1_eliminated_early)


def test_jobs_do_not_change_results():
    config = SimConfig(n=5, params=P49, games=3 * BLOCK_GAMES + 1234, seed=2024)
    r1 = simulate_many(config, jobs=1)
    r3 = simulate_many(config, jobs=3)
    assert (r1.win_counts == r3.win_counts).all()
    assert (r1.round1_elim_counts == r3.round1_elim_counts).all()
    assert r1.total_steps == r3.total_steps
    assert r1.total_steps_sq == r3.total_steps_sq
    assert r1.early_elim_count == r3.early_elim_count


def test_counts_conserve_games():
    config = SimConfig(n=6, params=P49, games=20_000, seed=5)
    r = simulate_many(config)
    assert r.win_counts.sum() == r.games_played == 20_000
    assert r.round1_elim_counts.sum() == 20_000
    assert r.total_steps >= 5 * 20_000  # n - 1 steps minimum per game


def test_step_cap_reports_global_game_index():
    config = SimConfig(n=2, params=P49, games=10, seed=1, step_cap=1)
    with pytest.raises(StepCapExceeded) as exc_info:
        simulate_many(config)
    # some game in the first block trips the cap; index must be in range
    assert 0 <= exc_info.value.game_index < 10


def test_sim_config_validation():
    with pytest.raises(InvalidParams):
        SimConfig(n=1, params=P49, games=10, seed=0)
    with pytest.raises(InvalidParams):
        SimConfig(n=3, params=P49, games=0, seed=0)
    with pytest.raises(InvalidParams):
        SimConfig(n=3, params=P49, games=10, seed=-1)
    with pytest.raises(InvalidParams):
        SimConfig(n=3, params=P49, games=10, seed=2**64)
    with pytest.raises(InvalidParams):
        SimConfig(n=3, params=P49, games=10, seed=0, step_cap=0)
    with pytest.raises(InvalidParams):
        simulate_many(SimConfig(n=3, params=P49, games=10, seed=0), jobs=0)


# ------------------------------------------------------------------- summaries


def test_empirical_summary_exact_arithmetic():
    config = SimConfig(n=2, params=P49, games=100, seed=0)
    result = SimResult(
        config=config,
        win_counts=np.array([25, 75], dtype=np.int64),
        round1_elim_counts=np.array([75, 25], dtype=np.int64),
        total_steps=400,
        total_steps_sq=2500.0,
        early_elim_count=10,
        games_played=100,
    )
    s = empirical_summary(result)
    assert s.win_probs == (0.25, 0.75)
    assert s.win_prob_se[0] == pytest.approx((0.25 * 0.75 / 100) ** 0.5, abs=1e-15)
    assert s.mean_steps == 4.0
    # var = 25 - 16 = 9, se = 3/10
    assert s.mean_steps_se == pytest.approx(0.3, abs=1e-15)
    assert s.early_elim_rate == 0.1
    assert s.games_played == 100


def test_summary_tracks_exact_model_at_modest_size():
    from knockout.model import win_distribution

    config = SimConfig(n=3, params=P49, games=200_000, seed=77)
    s = empirical_summary(simulate_many(config, jobs=2))
    w = win_distribution(3, P49)
    for k in range(3):
        assert abs(s.win_probs[k] - w[k]) < 5 * s.win_prob_se[k]
