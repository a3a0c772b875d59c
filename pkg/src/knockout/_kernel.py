"""Compiled Monte Carlo kernel.

Implements exactly the same game loop and xoshiro256++/SplitMix64 streams as
the pure-Python reference in :mod:`knockout.simulate`, in uint64 arithmetic
under numba.  Tests assert game-by-game equality of the two routes; all
throughput-motivated cleverness lives here so the reference can stay plain.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_R11 = np.uint64(11)
_R17 = np.uint64(17)
_R19 = np.uint64(19)
_R23 = np.uint64(23)
_R27 = np.uint64(27)
_R30 = np.uint64(30)
_R31 = np.uint64(31)
_R41 = np.uint64(41)
_R45 = np.uint64(45)
_INV53 = 2.0**-53


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> _R30)) * _MIX1
    z = (z ^ (z >> _R27)) * _MIX2
    return z ^ (z >> _R31)


@njit(cache=True, inline="always")
def _u01(s0, s1, s2, s3):
    # One xoshiro256++ output as a uniform double plus the updated state.
    x = s0 + s3
    res = ((x << _R23) | (x >> _R41)) + s0
    t = s1 << _R17
    s2 = s2 ^ s0
    s3 = s3 ^ s1
    s1 = s1 ^ s2
    s0 = s0 ^ s3
    s2 = s2 ^ t
    s3 = (s3 << _R45) | (s3 >> _R19)
    return (res >> _R11) * _INV53, s0, s1, s2, s3


@njit(cache=True)
def stream_probe(seed, count):
    """Raw xoshiro256++ outputs for stream cross-validation in tests."""
    out = np.empty(count, np.uint64)
    s = np.uint64(seed)
    s = s + _GOLDEN
    s0 = _mix(s)
    s = s + _GOLDEN
    s1 = _mix(s)
    s = s + _GOLDEN
    s2 = _mix(s)
    s = s + _GOLDEN
    s3 = _mix(s)
    for i in range(count):
        x = s0 + s3
        out[i] = ((x << _R23) | (x >> _R41)) + s0
        t = s1 << _R17
        s2 = s2 ^ s0
        s3 = s3 ^ s1
        s1 = s1 ^ s2
        s0 = s0 ^ s3
        s2 = s2 ^ t
        s3 = (s3 << _R45) | (s3 >> _R19)
    return out


@njit(cache=True, nogil=True)
def run_block(seed, games, n, p, q, step_cap):
    """Simulate `games` games of n players from one substream seed.

    Returns (win_counts, round1_elim_counts, total_steps, total_steps_sq,
    early_elim_count, cap_hit) where cap_hit is the in-block index of the
    first game to blow the step cap, or -1 if none did.
    """
    win = np.zeros(n, np.int64)
    elim1 = np.zeros(n, np.int64)
    total_steps = 0
    total_steps_sq = 0.0
    early = 0

    s = np.uint64(seed)
    s = s + _GOLDEN
    s0 = _mix(s)
    s = s + _GOLDEN
    s1 = _mix(s)
    s = s + _GOLDEN
    s2 = _mix(s)
    s = s + _GOLDEN
    s3 = _mix(s)

    order = np.empty(n, np.int64)
    buf = np.empty(n, np.int64)
    nxt = np.empty(n, np.int64)

    for g in range(games):
        for i in range(n):
            order[i] = i + 1
        m = n
        steps = 0
        p1_made = False
        p1_early = False
        first_round = True
        first_elim = 0
        while m > 1:
            pa = order[0]
            pb = order[1]
            head = 0
            tail = m - 2
            cnt = m - 2
            for i in range(cnt):
                buf[i] = order[2 + i]
            la = True
            lb = True
            target = pa
            out = 0
            chaser = 0
            while out == 0:
                steps += 1
                if steps > step_cap:
                    return win, elim1, total_steps, total_steps_sq, early, g
                u, s0, s1, s2, s3 = _u01(s0, s1, s2, s3)
                if u < (p if la else q):
                    if pa == target:
                        if first_round and pa == 1:
                            p1_made = True
                        if cnt > 0:
                            r = buf[head]
                            head = (head + 1) % n
                            buf[tail] = pa
                            tail = (tail + 1) % n
                            pa = r
                        la = True
                        target = pb
                    else:
                        out = target
                        chaser = pa
                        break
                else:
                    la = False
                u, s0, s1, s2, s3 = _u01(s0, s1, s2, s3)
                if u < (p if lb else q):
                    if pb == target:
                        if first_round and pb == 1:
                            p1_made = True
                        if cnt > 0:
                            r = buf[head]
                            head = (head + 1) % n
                            buf[tail] = pb
                            tail = (tail + 1) % n
                            pb = r
                        lb = True
                        target = pa
                    else:
                        out = target
                        chaser = pb
                        break
                else:
                    lb = False
            if first_round:
                first_elim = out
                if out == 1 and not p1_made:
                    p1_early = True
                first_round = False
            for i in range(cnt):
                nxt[i] = buf[(head + i) % n]
            nxt[cnt] = chaser
            m -= 1
            for i in range(m):
                order[i] = nxt[i]
        win[order[0] - 1] += 1
        elim1[first_elim - 1] += 1
        total_steps += steps
        total_steps_sq += float(steps) * float(steps)
        if p1_early:
            early += 1

    return win, elim1, total_steps, total_steps_sq, early, -1
