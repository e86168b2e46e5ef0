"""Kedlaya matrices and the prefix-mixing inequality for concave means.

For ``N = n!`` a Kedlaya matrix is an ``N x N`` array over ``{1..n}`` in which
row ``r`` (1-based) contains each value ``s <= c_r`` exactly ``N / c_r`` times
and nothing else, where ``c_r = ceil(r / (n-1)!)``; columns follow the same
profile.

Construction.  Rows and columns fall into ``n`` blocks of ``m = (n-1)!``
consecutive indices sharing a profile.  We look for block counts ``t[a, b, s]``
(how often ``s`` appears in each row and each column of sub-block ``(a, b)``)
with::

    sum_b t[a, b, s] = N / a   for s <= a, else 0      (row blocks)
    sum_a t[a, b, s] = N / b   for s <= b, else 0      (column blocks)
    sum_s t[a, b, s] = m

This is a tiny integer program (``n^3`` variables) solved with HiGHS.  Each
sub-block is then filled as a circulant, whose rows and columns all carry the
same value counts.  :func:`verify` checks the result by direct counting and
knows nothing about the construction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .errors import ConstructionError, DomainError
from .means import MeanExpr, WeightedSample, eval_mean


def alpha(n: int, p: int, s: int) -> int:
    """How many times value ``s`` appears in row (or column) ``p``; 1-based."""
    N = math.factorial(n)
    if not 1 <= p <= N:
        raise DomainError(f"row index {p} outside 1..{N}")
    if not 1 <= s <= n:
        raise DomainError(f"value {s} outside 1..{n}")
    c = -(-p // math.factorial(n - 1))
    return N // c if s <= c else 0


def profile(n: int) -> np.ndarray:
    """``(n!, n)`` array whose row ``p-1`` is ``[alpha(n, p, s) for s in 1..n]``."""
    N, m = math.factorial(n), math.factorial(n - 1)
    c = -(-np.arange(1, N + 1) // m)
    out = np.where(np.arange(1, n + 1)[None, :] <= c[:, None], N // c[:, None], 0)
    return out.astype(np.int64)


@dataclass(frozen=True, eq=False)
class KedlayaMatrix:
    n: int
    entries: np.ndarray

    def __post_init__(self):
        N = math.factorial(self.n)
        K = np.asarray(self.entries)
        if K.shape != (N, N):
            raise DomainError(f"expected a {N}x{N} matrix for n={self.n}, got {K.shape}")
        if K.size and (K.min() < 1 or K.max() > self.n):
            raise DomainError(f"entries must lie in 1..{self.n}")
        K = K.astype(np.uint8)
        K.setflags(write=False)
        object.__setattr__(self, "entries", K)


def block_counts(n: int) -> np.ndarray:
    """Integer ``t[a, b, s]`` (0-based indices) satisfying the block equations."""
    m = math.factorial(n - 1)
    N = n * m
    idx = np.arange(n**3).reshape(n, n, n)
    rows, rhs = [], []
    for a in range(n):
        for s in range(n):
            rows.append(idx[a, :, s])
            rhs.append(N // (a + 1) if s <= a else 0)
    for b in range(n):
        for s in range(n):
            rows.append(idx[:, b, s])
            rhs.append(N // (b + 1) if s <= b else 0)
    for a in range(n):
        for b in range(n):
            rows.append(idx[a, b, :])
            rhs.append(m)
    A = np.zeros((len(rows), n**3))
    for r, cols in enumerate(rows):
        A[r, cols] = 1.0
    rhs = np.array(rhs, dtype=float)
    res = milp(np.zeros(n**3), constraints=LinearConstraint(A, rhs, rhs),
               integrality=np.ones(n**3), bounds=Bounds(0, m))
    if res.x is None:
        raise ConstructionError(f"construction failed: block system infeasible for n={n} ({res.message})")
    return np.rint(res.x).astype(np.int64).reshape(n, n, n)


def build(n: int, max_n: int = 5) -> KedlayaMatrix:
    if not 1 <= n <= max_n:
        raise DomainError(f"n must satisfy 1 <= n <= {max_n}")
    m = math.factorial(n - 1)
    t = block_counts(n)
    K = np.empty((n * m, n * m), dtype=np.uint8)
    shift = (np.arange(m)[:, None] - np.arange(m)[None, :]) % m
    for a in range(n):
        for b in range(n):
            seq = np.repeat(np.arange(1, n + 1, dtype=np.uint8), t[a, b])
            K[a * m:(a + 1) * m, b * m:(b + 1) * m] = seq[shift]
    out = KedlayaMatrix(n, K)
    if verify(out):
        raise ConstructionError(f"construction failed: n={n} matrix does not verify")
    return out


@dataclass(frozen=True)
class Violation:
    axis: str        # "row" or "column"
    index: int       # 1-based
    value: int
    expected: int
    actual: int


def verify(K: KedlayaMatrix) -> list[Violation]:
    """All row and column profile mismatches; an empty list means valid."""
    n = K.n
    E = K.entries.astype(np.int64) - 1
    want = profile(n)
    out = []
    for axis, M in (("row", E), ("column", E.T)):
        counts = np.stack([(M == s).sum(axis=1) for s in range(n)], axis=1)
        for i, s in zip(*np.nonzero(counts != want)):
            out.append(Violation(axis, int(i) + 1, int(s) + 1, int(want[i, s]), int(counts[i, s])))
    return out


def write_csv(K: KedlayaMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"c{j}" for j in range(1, K.entries.shape[1] + 1)])
        for row in K.entries:
            w.writerow(row.tolist())


def read_csv(path, n: int) -> KedlayaMatrix:
    """Read a matrix written by :func:`write_csv`; the header row is optional."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows and not rows[0][0].strip().lstrip("-").isdigit():
        rows = rows[1:]
    try:
        rows = [[int(v) for v in r] for r in rows]
    except ValueError as exc:
        raise DomainError(f"matrix file holds a non-integer entry: {exc}") from None
    if len({len(r) for r in rows}) > 1:
        raise DomainError("matrix rows have unequal lengths")
    return KedlayaMatrix(n, np.array(rows, dtype=np.int64))


# ---------------------------------------------------------------------------
# mixing inequality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixingCheck:
    lhs: float
    rhs: float
    holds: bool
    harmonic_rhs: float
    harmonic_holds: bool


def _leq(a, b, rel=1e-12):
    return a <= b + rel * abs(b)


def check_mixing_inequality(e: MeanExpr, x, max_n: int = 5) -> MixingCheck:
    """Both sides of the prefix-mixing inequality for a symmetric concave mean.

    ``lhs = sum_i e(x_1..x_i, each repeated n!/i times)`` and
    ``rhs = n e(prefix averages, each repeated (n-1)! times)``.  The
    harmonic bound replaces the prefix averages by ``1/i`` and multiplies
    by ``sum x``.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if not 1 <= n <= max_n:
        raise DomainError(f"length must satisfy 1 <= n <= {max_n}")
    N, m = float(math.factorial(n)), float(math.factorial(n - 1))
    lhs = sum(eval_mean(e, WeightedSample(x[:i], np.full(i, N / i))) for i in range(1, n + 1))
    i = np.arange(1, n + 1, dtype=float)
    averages = np.cumsum(x) / i
    rhs = n * eval_mean(e, WeightedSample(averages, np.full(n, m)))
    cor = n * eval_mean(e, WeightedSample(1.0 / i, np.full(n, m))) * float(x.sum())
    return MixingCheck(float(lhs), float(rhs), bool(_leq(lhs, rhs)), float(cor), bool(_leq(lhs, cor)))


def matrix_sides(e: MeanExpr, x, K: KedlayaMatrix) -> tuple[float, float]:
    """Evaluate the concavity step on the matrix ``A[p, q] = x[K[p, q]]`` directly.

    Returns ``(mean over rows of e(row), e(column averages))``; for a
    symmetric mean these equal ``lhs / n`` and ``rhs / n`` of
    :func:`check_mixing_inequality`.
    """
    x = np.asarray(x, dtype=float)
    if x.size != K.n:
        raise DomainError("x must have length n")
    A = x[K.entries.astype(np.int64) - 1]
    rows = np.mean([eval_mean(e, r) for r in A])
    cols = eval_mean(e, A.mean(axis=0))
    return float(rows), float(cols)
