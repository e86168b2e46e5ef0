"""Power means and the two pairwise mixed-mean constructions.

A mean expression is a small tree::

    Power(p)                 p-th power mean, geometric mean at p == 0
    Circ(outer, inner)       outer mean of inner(x_i, x_j) over unordered pairs i < j
    Square(outer, inner)     outer mean of inner(x_i, x_j) over all ordered pairs (i, j)

Inputs are :class:`WeightedSample` objects: positive values with positive
multiplicities.  Multiplicities are real so that huge factorial repetition
counts can be carried in normalized form.  ``Circ`` is only defined for
integer multiplicities, because the number of same-value pairs among ``w``
copies is ``w (w - 1) / 2``.

Everything funnels into :func:`eval_batch`, which evaluates one expression on
a stack of equally sized samples at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, EvaluationError, UnaryCase


# ---------------------------------------------------------------------------
# expression tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Power:
    p: float

    def __post_init__(self):
        p = float(self.p)
        if not math.isfinite(p):
            raise DomainError(f"power mean exponent must be finite, got {self.p!r}")
        object.__setattr__(self, "p", p)

    def __str__(self):
        from .grammar import format_expr

        return format_expr(self)


@dataclass(frozen=True)
class Circ:
    outer: "MeanExpr"
    inner: "MeanExpr"

    def __str__(self):
        from .grammar import format_expr

        return format_expr(self)


@dataclass(frozen=True)
class Square:
    outer: "MeanExpr"
    inner: "MeanExpr"

    def __str__(self):
        from .grammar import format_expr

        return format_expr(self)


MeanExpr = Union[Power, Circ, Square]


def exponents(e: MeanExpr) -> list[float]:
    """All power-mean exponents appearing in ``e``, left to right."""
    if isinstance(e, Power):
        return [e.p]
    return exponents(e.outer) + exponents(e.inner)


def is_power_mix(e: MeanExpr) -> bool:
    """True for ``Circ(Power(p), Power(q))`` and ``Square(Power(p), Power(q))``."""
    return (
        isinstance(e, (Circ, Square))
        and isinstance(e.outer, Power)
        and isinstance(e.inner, Power)
    )


def _needs_integral_weights(e: MeanExpr) -> bool:
    # weights handed to e must stay integer counts iff a Circ consumes them
    if isinstance(e, Circ):
        return True
    if isinstance(e, Square):
        return _needs_integral_weights(e.outer)
    return False


# ---------------------------------------------------------------------------
# samples
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeightedSample:
    """Positive values with positive (possibly non-integer) multiplicities."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        w = np.array(self.weights, dtype=float).ravel()
        if v.size == 0:
            raise DomainError("sample must be nonempty")
        if v.shape != w.shape:
            raise DomainError("values and weights differ in length")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise DomainError("sample values must be positive and finite")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise DomainError("sample weights must be positive and finite")
        v.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    @classmethod
    def of(cls, values, weights=None) -> "WeightedSample":
        values = np.asarray(values, dtype=float)
        if weights is None:
            weights = np.ones_like(values)
        return cls(values, weights)

    @classmethod
    def from_pairs(cls, entries) -> "WeightedSample":
        """Build from ``[(value, weight), ...]``."""
        entries = list(entries)
        return cls([v for v, _ in entries], [w for _, w in entries])

    def __len__(self):
        return self.values.size

    def __iter__(self):
        return iter(zip(self.values.tolist(), self.weights.tolist()))

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def scaled(self, t: float) -> "WeightedSample":
        return WeightedSample(self.values * t, self.weights)

    def repeated(self, m: int) -> "WeightedSample":
        return WeightedSample(self.values, self.weights * m)

    def merged(self, tol: float = 0.0) -> "WeightedSample":
        """Merge entries whose values agree (relative gap <= ``tol``).

        A merged group takes the weighted arithmetic mean of its values and
        the sum of its weights.  With ``tol == 0`` only exact duplicates merge
        and every mean in this package is unchanged by the operation.
        """
        if tol < 0:
            raise DomainError("merge tolerance must be nonnegative")
        order = np.argsort(self.values, kind="stable")
        v = self.values[order]
        w = self.weights[order]
        gap = np.diff(v) > tol * v[1:]
        group = np.concatenate([[0], np.cumsum(gap)])
        wsum = np.bincount(group, weights=w)
        if tol == 0:
            vals = v[np.concatenate([[True], gap])]
        else:
            vals = np.bincount(group, weights=v * w) / wsum
        return WeightedSample(vals, wsum)


def as_sample(s) -> WeightedSample:
    if isinstance(s, WeightedSample):
        return s
    return WeightedSample.of(s)


@dataclass(frozen=True)
class EvalOptions:
    log_domain: bool = True
    merge_tolerance: float = 0.0

    def __post_init__(self):
        if not self.merge_tolerance >= 0:
            raise DomainError("merge_tolerance must be >= 0")


DEFAULT_OPTIONS = EvalOptions()


# ---------------------------------------------------------------------------
# batched evaluation
# ---------------------------------------------------------------------------


def _masked_minmax(X, W):
    live = W > 0
    lo = np.where(live, X, np.inf).min(axis=1)
    hi = np.where(live, X, -np.inf).max(axis=1)
    return lo, hi


def _power_batch(p, X, W, log_domain):
    total = W.sum(axis=1)
    Wn = W / total[:, None]
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if p == 0.0:
            out = np.exp(np.sum(Wn * np.log(X), axis=1))
        elif log_domain:
            # shifted-log accumulation of sum w x^p; logsumexp factors out the max term
            lse = logsumexp(p * np.log(X), b=Wn, axis=1)
            out = np.exp(lse / p)
        else:
            out = np.sum(Wn * X**p, axis=1) ** (1.0 / p)
    if not np.all(np.isfinite(out)) or np.any(out <= 0):
        raise EvaluationError(f"power mean with exponent {p!r} is not finite", exponent=p)
    lo, hi = _masked_minmax(X, W)
    return np.clip(out, lo, hi)


def _pair_arrays(kind, X, W, integral):
    """Pair arguments and pair weights for a batch.

    With ``integral`` the weights stay genuine counts (needed when an outer
    ``Circ`` consumes them).  Otherwise they are divided by the squared
    largest weight so factorial-sized counts never overflow.
    """
    B, k = X.shape
    if integral:
        Wn, inv = W, 1.0
    else:
        c = W.max(axis=1, keepdims=True)
        Wn, inv = W / c, 1.0 / c
    if kind is Square:
        first = np.repeat(X, k, axis=1)
        second = np.tile(X, (1, k))
        pw = (Wn[:, :, None] * Wn[:, None, :]).reshape(B, k * k)
        return first, second, pw
    if np.any(W != np.round(W)):
        raise DomainError("circ mixes require integer multiplicities")
    iu, ju = np.triu_indices(k, 1)
    first = np.concatenate([X[:, iu], X], axis=1)
    second = np.concatenate([X[:, ju], X], axis=1)
    diag = Wn * (Wn - inv) / 2.0
    pw = np.concatenate([Wn[:, iu] * Wn[:, ju], diag], axis=1)
    return first, second, pw


def _eval_pairs(e: MeanExpr, a: np.ndarray, b: np.ndarray, log_domain: bool) -> np.ndarray:
    """Evaluate ``e`` on the two-element samples ``(a[i], b[i])``."""
    a, b = np.broadcast_arrays(a, b)
    X = np.stack([a.ravel(), b.ravel()], axis=1)
    return _eval(e, X, np.ones_like(X), log_domain).reshape(a.shape)


def _eval(e, X, W, log_domain):
    if isinstance(e, Power):
        return _power_batch(e.p, X, W, log_domain)
    kind = type(e)
    if kind not in (Circ, Square):
        raise TypeError(f"not a mean expression: {e!r}")
    first, second, pw = _pair_arrays(kind, X, W, _needs_integral_weights(e.outer))
    inner = _eval_pairs(e.inner, first, second, log_domain)
    empty = pw.sum(axis=1) <= 0
    if np.any(empty):
        # unary circ: a single unit-weight entry maps to itself
        pw = pw.copy()
        pw[empty] = 1.0
    out = _eval(e.outer, inner, pw, log_domain)
    if np.any(empty):
        lo, _ = _masked_minmax(X, W)
        out = np.where(empty, lo, out)
    return out


def eval_batch(e: MeanExpr, X, W=None, opt: EvalOptions = DEFAULT_OPTIONS) -> np.ndarray:
    """Evaluate ``e`` row-wise on a ``(batch, k)`` array of values.

    ``W`` defaults to unit weights and may be broadcast from shape ``(k,)``.
    No merging is applied here.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if W is None:
        W = np.ones_like(X)
    else:
        W = np.broadcast_to(np.asarray(W, dtype=float), X.shape)
    if np.any(X <= 0) or not np.all(np.isfinite(X)):
        raise DomainError("values must be positive and finite")
    if np.any(W < 0) or np.any(W.sum(axis=1) <= 0):
        raise DomainError("weights must be nonnegative with a positive total")
    return _eval(e, X, W, opt.log_domain)


# ---------------------------------------------------------------------------
# scalar API
# ---------------------------------------------------------------------------


def eval_power(p: float, s, opt: EvalOptions = DEFAULT_OPTIONS) -> float:
    """Weighted p-th power mean; the geometric mean when ``p == 0`` exactly."""
    s = as_sample(s)
    p = Power(p).p
    return float(_power_batch(p, s.values[None, :], s.weights[None, :], opt.log_domain)[0])


@dataclass(frozen=True, eq=False)
class PairSample:
    """Pair arguments ``(first[i], second[i])`` with multiplicity ``weights[i]``."""

    first: np.ndarray
    second: np.ndarray
    weights: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        out: dict = {}
        for a, b, w in zip(self.first.tolist(), self.second.tolist(), self.weights.tolist()):
            out[(a, b)] = out.get((a, b), 0.0) + w
        return out


def expand_pairs(kind, s) -> PairSample:
    """Multiset of inner-mean arguments produced by a mix of type ``kind``.

    ``Square`` yields all ordered pairs with weight ``w_i w_j``.  ``Circ``
    yields unordered distinct-position pairs: ``w_i w_j`` for distinct
    entries and ``w_i (w_i - 1) / 2`` for two copies of the same entry.
    Weights are raw counts, not normalized.
    """
    if kind not in (Circ, Square):
        raise TypeError("kind must be Circ or Square")
    s = as_sample(s)
    if kind is Circ and len(s) == 1 and s.weights[0] == 1:
        raise UnaryCase("circ of a single entry has no pairs; the mean is the entry itself")
    first, second, pw = _pair_arrays(kind, s.values[None, :], s.weights[None, :], True)
    keep = pw[0] > 0
    return PairSample(first[0, keep], second[0, keep], pw[0, keep])


def eval_mean(e: MeanExpr, s, opt: EvalOptions = DEFAULT_OPTIONS) -> float:
    s = as_sample(s).merged(opt.merge_tolerance)
    return float(_eval(e, s.values[None, :], s.weights[None, :], opt.log_domain)[0])


def eval_repeated(e: MeanExpr, x: Sequence[float], m: int, opt: EvalOptions = DEFAULT_OPTIONS) -> float:
    """``e`` evaluated on ``x`` with every entry repeated ``m`` times."""
    if int(m) != m or m < 1:
        raise DomainError("repetition count must be a positive integer")
    return eval_mean(e, WeightedSample.of(x, np.full(len(x), float(m))), opt)


def homogenize_estimate(e: MeanExpr, x: Sequence[float], t_grid: Sequence[float],
                        opt: EvalOptions = DEFAULT_OPTIONS) -> tuple[float, float]:
    """Estimate the lower and upper homogenizations of ``e`` at ``x``.

    Evaluates ``e(t x) / t`` along a decreasing grid of ``t`` and returns the
    min and max over the second half of the grid (at least one point).
    """
    t = np.asarray(t_grid, dtype=float)
    x = np.asarray(x, dtype=float)
    if t.size == 0 or np.any(t <= 0):
        raise DomainError("t_grid must be a nonempty list of positive reals")
    if np.any(np.diff(t) >= 0):
        raise DomainError("t_grid must be strictly decreasing")
    if np.any(x <= 0) or np.any(x > 1):
        raise DomainError("values must lie in (0, 1]")
    tail = t[t.size // 2:]
    vals = eval_batch(e, tail[:, None] * x[None, :], opt=opt) / tail
    return float(vals.min()), float(vals.max())


# ---------------------------------------------------------------------------
# prefix means
# ---------------------------------------------------------------------------

_CHUNK_ENTRIES = 2_000_000


def _clip_prefix(out, x):
    return np.clip(out, np.minimum.accumulate(x), np.maximum.accumulate(x))


def _power_prefix(p, x):
    lx = np.log(x)
    i = np.arange(1, x.size + 1, dtype=float)
    if p == 0.0:
        out = np.exp(np.cumsum(lx) / i)
    else:
        out = np.exp((np.logaddexp.accumulate(p * lx) - np.log(i)) / p)
    return _clip_prefix(out, x)


def _log_inner(inner, la, lb, log_domain):
    # ln inner(a, b) from ln a, ln b; closed form for a power inner mean
    if isinstance(inner, Power):
        q = inner.p
        if q == 0.0:
            return 0.5 * (la + lb)
        return (np.logaddexp(q * la, q * lb) - math.log(2.0)) / q
    return np.log(_eval_pairs(inner, np.exp(la), np.exp(lb), log_domain))


def mix_prefix_parts(p, inner, x, log_domain=True):
    """Running pair sums behind the prefix means of a power-outer mix.

    Returns ``(off, diag)`` where, for the first ``i`` entries, ``off[i-1]``
    sums the outer terms over pairs ``b < a <= i`` and ``diag[i-1]`` over the
    pairs ``(x_a, x_a)``.  Outer terms are ``ln inner`` when ``p == 0`` and
    ``inner^p`` otherwise; in the latter case both sums are returned as logs.
    The lower triangle is processed in chunks so long inputs never
    materialize the full pair matrix.
    """
    lx = np.log(np.asarray(x, dtype=float))
    n = lx.size
    lower = np.empty(n)
    ld = _log_inner(inner, lx, lx, log_domain)
    lower[0] = -np.inf if p != 0.0 else 0.0
    a0 = 1
    while a0 < n:
        # rows * (a0 + rows) entries per chunk
        rows = max(1, min(n - a0, int((math.sqrt(a0 * a0 + 4 * _CHUNK_ENTRIES) - a0) / 2)))
        a1 = a0 + rows
        width = a1 - 1
        L = _log_inner(inner, lx[a0:a1, None], lx[None, :width], log_domain)
        mask = np.arange(width)[None, :] < np.arange(a0, a1)[:, None]
        if p == 0.0:
            lower[a0:a1] = np.where(mask, L, 0.0).sum(axis=1)
        else:
            lower[a0:a1] = logsumexp(np.where(mask, p * L, -np.inf), axis=1)
        a0 = a1
    if p == 0.0:
        return np.cumsum(lower), np.cumsum(ld)
    return np.logaddexp.accumulate(lower), np.logaddexp.accumulate(p * ld)


def combine_prefix_parts(kind, p, off, diag, x):
    """Prefix means of ``kind(P[p], inner)`` from :func:`mix_prefix_parts` output."""
    x = np.asarray(x, dtype=float)
    i = np.arange(1, x.size + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if p == 0.0:
            if kind is Square:
                out = np.exp((2.0 * off + diag) / i**2)
            else:
                out = np.exp(off / (i * (i - 1) / 2.0))
        else:
            if kind is Square:
                out = np.exp((np.logaddexp(math.log(2.0) + off, diag) - 2.0 * np.log(i)) / p)
            else:
                out = np.exp((off - np.log(i * (i - 1) / 2.0)) / p)
    if kind is Circ:
        out[0] = x[0]
    if not np.all(np.isfinite(out)):
        raise EvaluationError(f"mixed mean with outer exponent {p!r} is not finite", exponent=p)
    return _clip_prefix(out, x)


def prefix_means(e: MeanExpr, x: Sequence[float], opt: EvalOptions = DEFAULT_OPTIONS) -> np.ndarray:
    """``[e(x_1), e(x_1, x_2), ..., e(x_1, ..., x_n)]`` (unit weights).

    Power means and mixes with a power outer mean use running sums, so the
    whole prefix sequence costs about as much as the last term.  Other
    expressions fall back to evaluating each prefix.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0 or np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise DomainError("values must be positive and finite")
    if isinstance(e, Power):
        if not opt.log_domain:
            return np.array([eval_power(e.p, x[:i], opt) for i in range(1, x.size + 1)])
        return _power_prefix(e.p, x)
    if isinstance(e, (Circ, Square)) and isinstance(e.outer, Power) and opt.log_domain:
        off, diag = mix_prefix_parts(e.outer.p, e.inner, x, opt.log_domain)
        return combine_prefix_parts(type(e), e.outer.p, off, diag, x)
    return np.array([eval_mean(e, x[:i], opt) for i in range(1, x.size + 1)])
