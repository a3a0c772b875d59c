"""Absorbing Markov chains in canonical form.

A chain is stored as the block pair (Q, R) of the canonical form

    T = [ Q  R ]
        [ 0  I ]

with Q the transient-to-transient block and R the transient-to-absorbing
block.  Absorption probabilities and expected hitting times are obtained by
LU solves against (I - Q); the fundamental matrix N = (I - Q)^-1 is never
formed explicitly.  A truncated power series over the same blocks serves as
an independent cross-check of the solver route.
"""

from __future__ import annotations

import warnings
from dataclasses import InitVar, dataclass

import numpy as np
import scipy.linalg

from .errors import NonAbsorbingChain, SingularMatrix

# Pivot magnitudes below this are treated as numerically singular.
PIVOT_TOL = 1e-13
# Each row of [Q | R] must sum to 1 within this tolerance.
ROW_SUM_TOL = 1e-12

__all__ = [
    "PIVOT_TOL",
    "ROW_SUM_TOL",
    "AbsorbingChain",
    "ChainDiagnostics",
    "solve_linear",
    "absorption_probabilities",
    "expected_steps",
    "absorption_by_power_series",
    "power_series_terms",
    "validate_chain",
]


@dataclass(frozen=True, eq=False)
class AbsorbingChain:
    """Canonical-form absorbing chain.

    Args:
        q: (t, t) transient-to-transient transition block.
        r: (t, a) transient-to-absorbing transition block.
        labels: optional state labels, transient states first, length t + a.
        validate: check shapes, entry ranges and row sums on construction.
            Pass False to build a deliberately defective chain for
            diagnostics (see :func:`validate_chain`).
    """

    q: np.ndarray
    r: np.ndarray
    labels: tuple[str, ...] = ()
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        q = np.array(self.q, dtype=float)
        r = np.array(self.r, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError(f"q must be square, got shape {q.shape}")
        if r.ndim != 2 or r.shape[0] != q.shape[0]:
            raise ValueError(
                f"r must have one row per transient state ({q.shape[0]}), got shape {r.shape}"
            )
        if q.shape[0] < 1 or r.shape[1] < 1:
            raise ValueError("need at least one transient and one absorbing state")
        q.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)
        if not self.labels:
            labels = tuple(f"S{i + 1}" for i in range(q.shape[0])) + tuple(
                f"A{j + 1}" for j in range(r.shape[1])
            )
            object.__setattr__(self, "labels", labels)
        elif len(self.labels) != q.shape[0] + r.shape[1]:
            raise ValueError(
                f"expected {q.shape[0] + r.shape[1]} labels, got {len(self.labels)}"
            )
        if validate:
            diag = validate_chain(self)
            if diag.row_sum_defects or diag.range_violations:
                raise ValueError(f"defective chain: {diag.describe()}")

    @property
    def num_transient(self) -> int:
        return self.q.shape[0]

    @property
    def num_absorbing(self) -> int:
        return self.r.shape[1]

    @property
    def num_states(self) -> int:
        return self.num_transient + self.num_absorbing


@dataclass(frozen=True)
class ChainDiagnostics:
    """Structural defects found in a chain; all index reports are 1-based.

    Attributes:
        row_sum_defects: (row, actual_sum) for rows of [Q | R] off 1 by more
            than ROW_SUM_TOL.
        range_violations: (row, col, value) for entries of [Q | R] outside
            [0, 1]; columns beyond the transient count index into R.
        no_absorption_states: transient states from which no absorbing state
            is reachable.
    """

    row_sum_defects: tuple[tuple[int, float], ...]
    range_violations: tuple[tuple[int, int, float], ...]
    no_absorption_states: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not (
            self.row_sum_defects or self.range_violations or self.no_absorption_states
        )

    def describe(self) -> str:
        if self.ok:
            return "chain is a valid absorbing chain"
        parts = []
        if self.row_sum_defects:
            parts.append(
                "row sums off 1: "
                + ", ".join(f"row {i} sums to {s:.6g}" for i, s in self.row_sum_defects)
            )
        if self.range_violations:
            parts.append(
                "entries outside [0, 1]: "
                + ", ".join(f"({i},{j})={v:.6g}" for i, j, v in self.range_violations)
            )
        if self.no_absorption_states:
            parts.append(
                "states that never absorb: "
                + ", ".join(str(i) for i in self.no_absorption_states)
            )
        return "; ".join(parts)


def solve_linear(a: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a @ x = rhs by LU factorisation with partial pivoting.

    Raises:
        SingularMatrix: if any pivot magnitude falls below PIVOT_TOL.
        ValueError: on shape mismatch or non-finite input.

    The residual ||a @ x - rhs||_inf is bounded by 1e-10 * (1 + max|a|) for
    the well-conditioned systems produced in this package; tests enforce it.
    """
    a = np.asarray(a, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"coefficient matrix must be square, got shape {a.shape}")
    if rhs.shape[0] != a.shape[0]:
        raise ValueError(
            f"rhs length {rhs.shape[0]} does not match matrix order {a.shape[0]}"
        )
    if not (np.isfinite(a).all() and np.isfinite(rhs).all()):
        raise ValueError("inputs must be finite")
    with warnings.catch_warnings():
        # getrf warns on an exactly-zero pivot; the check below raises instead.
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a)
    pivots = np.abs(np.diag(lu))
    worst = int(np.argmin(pivots))
    if pivots[worst] < PIVOT_TOL:
        raise SingularMatrix(
            f"pivot {worst + 1} of {a.shape[0]} has magnitude "
            f"{pivots[worst]:.3e} < {PIVOT_TOL:.0e}"
        )
    return scipy.linalg.lu_solve((lu, piv), rhs)


def _check_start(chain: AbsorbingChain, start: int) -> None:
    if not 1 <= start <= chain.num_transient:
        raise ValueError(
            f"start state {start} out of range 1..{chain.num_transient} (transient states)"
        )


def absorption_probabilities(chain: AbsorbingChain, start: int = 1) -> np.ndarray:
    """Probability of ending in each absorbing state, starting from `start` (1-based).

    Computes one row of N @ R without forming N: solves (I - Q)^T y = e_start
    and returns y @ R.

    Raises:
        NonAbsorbingChain: if (I - Q) is numerically singular, i.e. some
            probability mass cycles forever.
    """
    _check_start(chain, start)
    t = chain.num_transient
    e = np.zeros(t)
    e[start - 1] = 1.0
    try:
        y = solve_linear((np.eye(t) - chain.q).T, e)
    except SingularMatrix as exc:
        raise NonAbsorbingChain(
            f"no absorption from state {chain.labels[start - 1]!r}: "
            f"(I - Q) is singular ({exc})"
        ) from exc
    return y @ chain.r


def expected_steps(chain: AbsorbingChain, start: int = 1) -> float:
    """Expected number of steps until absorption from `start` (1-based).

    Solves (I - Q) t = 1 and returns t[start]; always >= 1 since at least
    one step is needed to leave a transient state.
    """
    _check_start(chain, start)
    t = chain.num_transient
    try:
        total = solve_linear(np.eye(t) - chain.q, np.ones(t))
    except SingularMatrix as exc:
        raise NonAbsorbingChain(
            f"expected steps diverge from state {chain.labels[start - 1]!r}: "
            f"(I - Q) is singular ({exc})"
        ) from exc
    return float(total[start - 1])


def absorption_by_power_series(
    chain: AbsorbingChain, start: int = 1, terms: int = 256
) -> np.ndarray:
    """Truncated series sum_{k=0..terms} e_start @ Q^k @ R.

    Independent of the LU route: uses only vector-matrix products.  The
    result increases monotonically in `terms` and converges to
    :func:`absorption_probabilities` from below.
    """
    _check_start(chain, start)
    if terms < 0:
        raise ValueError(f"terms must be >= 0, got {terms}")
    v = np.zeros(chain.num_transient)
    v[start - 1] = 1.0
    acc = v @ chain.r
    for _ in range(terms):
        v = v @ chain.q
        acc = acc + v @ chain.r
    return acc


def power_series_terms(chain: AbsorbingChain, tol: float = 1e-10, max_terms: int = 1 << 22) -> int:
    """Smallest power-of-two K with max row sum of Q^K at most `tol`.

    The row-sum norm is submultiplicative, so doubling the candidate K until
    the norm drops below `tol` is sound.  Truncating the series at such a K
    leaves at most `tol` of unabsorbed mass.

    Raises:
        NonAbsorbingChain: if no K <= max_terms suffices (mass never drains).
    """
    k = 1
    p = np.array(chain.q)
    while True:
        if p.sum(axis=1).max() <= tol:
            return k
        if k >= max_terms:
            raise NonAbsorbingChain(
                f"residual transient mass {p.sum(axis=1).max():.3e} after {k} steps"
            )
        p = p @ p
        k *= 2


def validate_chain(chain: AbsorbingChain) -> ChainDiagnostics:
    """Structural health report; never raises.

    Checks row sums of [Q | R], entry ranges, and reachability of absorption
    from every transient state (graph search on nonzero entries).
    """
    q, r = chain.q, chain.r
    t = q.shape[0]

    row_sums = q.sum(axis=1) + r.sum(axis=1)
    defects = tuple(
        (i + 1, float(s))
        for i, s in enumerate(row_sums)
        if abs(s - 1.0) > ROW_SUM_TOL
    )

    violations: list[tuple[int, int, float]] = []
    full = np.hstack([q, r])
    bad = np.argwhere((full < 0.0) | (full > 1.0))
    for i, j in bad:
        violations.append((int(i) + 1, int(j) + 1, float(full[i, j])))

    # Fixpoint of "has an edge into the absorbing set or into a draining state".
    draining = (r > 0.0).any(axis=1)
    changed = True
    while changed:
        reach = draining | ((q > 0.0) & draining[np.newaxis, :]).any(axis=1)
        changed = bool((reach != draining).any())
        draining = reach
    dead = tuple(int(i) + 1 for i in np.flatnonzero(~draining))

    return ChainDiagnostics(
        row_sum_defects=defects,
        range_violations=tuple(violations),
        no_absorption_states=dead,
    )
