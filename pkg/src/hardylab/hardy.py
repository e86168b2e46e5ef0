"""Lower and upper estimates of Hardy constants.

For a mean ``M`` the Hardy constant is the least ``C`` with
``sum_n M(x_1, ..., x_n) <= C sum_n x_n`` over summable positive sequences,
and the n-th Hardy number ``H_n`` is the same constant for n-term sequences.
``H_n`` increases to the Hardy constant.

Estimators here:

* :func:`harmonic_lower_bound` - liminf of ``n M(1, 1/2, ..., 1/n)``; a lower
  bound for the Hardy constant, equal to it for the power mixes.
* :func:`hardy_n_lower` - the best ratio found by a multi-start simplex
  search; every value it returns is attained, hence a lower bound for ``H_n``.
* :func:`superinvariant_upper_bound` - ``n M(1, 1/2, ..., 1/n)`` with every
  entry repeated ``(n-1)!`` times, an upper bound for ``H_n`` when ``M`` is
  symmetric, concave and repetition superinvariant.
* :func:`kaluza_szego_bound`, :func:`hlp_bound` - classical bounds for power
  means.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import softmax

from .errors import DomainError, EvaluationError
from .means import (
    Circ,
    MeanExpr,
    Power,
    Square,
    WeightedSample,
    combine_prefix_parts,
    eval_mean,
    exponents,
    is_power_mix,
    mix_prefix_parts,
    prefix_means,
)


def gamma(p: float) -> float:
    """Sharp Hardy constant of the power mean ``P[p]`` (``inf`` for p >= 1)."""
    if p >= 1:
        return math.inf
    if p == 0:
        return math.e
    return (1.0 - p) ** (-1.0 / p)


def kaluza_szego_bound(p: float, n: int) -> float:
    """Kaluza-Szego: ``H_n(P[p]) <= gamma(p) / (n (e^(1/n) - 1))`` for 0 <= p < 1."""
    if not 0 <= p < 1:
        raise DomainError("kaluza_szego_bound needs 0 <= p < 1")
    if n < 1:
        raise DomainError("n must be >= 1")
    return gamma(p) / (n * math.expm1(1.0 / n))


def hlp_bound(n: int) -> float:
    """Hardy-Littlewood-Polya: ``H_n(P[0]) <= (1 + 1/n)^n``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return (1.0 + 1.0 / n) ** n


def superinvariant_hypotheses(e: MeanExpr) -> bool:
    """True when ``e`` is known to be symmetric, concave and superinvariant.

    Covers power means with ``p <= 1``, ``sq(P[p], P[q])`` with ``p, q <= 1``
    and ``circ(P[p], P[q])`` with ``q < p <= 1``.
    """
    if isinstance(e, Power):
        return e.p <= 1
    if not is_power_mix(e):
        return False
    p, q = e.outer.p, e.inner.p
    if isinstance(e, Square):
        return p <= 1 and q <= 1
    return q < p <= 1


def open_region(e: MeanExpr) -> bool:
    """``circ(P[p], P[q])`` with ``1 < p < 2`` and ``q <= 0``: Hardy property unknown."""
    return (
        isinstance(e, Circ) and is_power_mix(e)
        and 1 < e.outer.p < 2 and e.inner.p <= 0
    )


def _contains_circ(e: MeanExpr) -> bool:
    if isinstance(e, Power):
        return False
    return isinstance(e, Circ) or _contains_circ(e.outer) or _contains_circ(e.inner)


# ---------------------------------------------------------------------------
# harmonic sequences
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=16)
def _harmonic_parts(p, inner, n_max):
    # shared by circ and sq mixes with the same exponents
    parts = mix_prefix_parts(p, inner, 1.0 / np.arange(1, n_max + 1, dtype=float))
    for a in parts:
        a.setflags(write=False)
    return parts


def harmonic_sequence(e: MeanExpr, n_max: int) -> np.ndarray:
    """``a[n] = n e(1, 1/2, ..., 1/n)`` for ``n = 1..n_max`` (index 0 unused, NaN)."""
    x = 1.0 / np.arange(1, n_max + 1, dtype=float)
    if isinstance(e, (Circ, Square)) and isinstance(e.outer, Power):
        off, diag = _harmonic_parts(e.outer.p, e.inner, n_max)
        pm = combine_prefix_parts(type(e), e.outer.p, off, diag, x)
    else:
        pm = prefix_means(e, x)
    out = np.full(n_max + 1, np.nan)
    out[1:] = pm * np.arange(1, n_max + 1)
    return out


@dataclass(frozen=True)
class HarmonicEstimate:
    estimate: float
    raw: float
    accelerated: float
    converged: bool
    tail_n: np.ndarray = field(repr=False)
    tail_values: np.ndarray = field(repr=False)

    def __iter__(self):
        # allows ``estimate, tail = harmonic_lower_bound(...)``
        return iter((self.estimate, self.tail_values))


def aitken(x0: float, x1: float, x2: float) -> float:
    """Aitken delta-squared extrapolation of three consecutive terms."""
    d1, d0 = x2 - x1, x1 - x0
    denom = d1 - d0
    if denom == 0:
        return x2
    return x2 - d1 * d1 / denom


def harmonic_lower_bound(e: MeanExpr, n_max: int = 10_000, extrapolate: bool = False,
                         window: float = 0.1) -> HarmonicEstimate:
    """Estimate ``liminf n e(1, 1/2, ..., 1/n)``.

    The raw estimate is the minimum over the last ``window`` fraction of
    terms.  The accelerated one applies Aitken's process to the terms at
    ``n_max/4, n_max/2, n_max``, which removes the leading ``c n^-a`` part of
    the error.  The sequence is declared non-convergent when the differences
    over those doublings fail to shrink (ratio above 0.9), e.g. for ``P[1]``
    where the terms grow like ``ln n``.  In that case ``converged`` is False,
    ``accelerated`` is just the last term and ``estimate`` the raw minimum.
    """
    if n_max < 10:
        raise DomainError("n_max must be >= 10")
    a = harmonic_sequence(e, n_max)
    start = max(1, int(math.ceil((1.0 - window) * n_max)))
    tail_n = np.arange(start, n_max + 1)
    tail = a[start:]
    raw = float(tail.min())
    x0, x1, x2 = a[n_max // 4], a[n_max // 2], a[n_max]
    d0, d1 = x1 - x0, x2 - x1
    if abs(d1) <= 1e-14 * abs(x2):
        converged = True
    else:
        converged = d0 != 0 and 0 <= d1 / d0 < 0.9
    accelerated = aitken(x0, x1, x2) if converged else float(x2)
    estimate = accelerated if (extrapolate and converged) else raw
    return HarmonicEstimate(float(estimate), raw, float(accelerated), bool(converged), tail_n, tail)


# ---------------------------------------------------------------------------
# finite Hardy numbers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    iterations: int = 500
    simplex_scale: float = 1.0
    seed: int = 0
    dimension_cap: int = 12

    def __post_init__(self):
        for name in ("restarts", "iterations", "dimension_cap"):
            if int(getattr(self, name)) < 1:
                raise DomainError(f"{name} must be a positive integer")
        if not self.simplex_scale > 0:
            raise DomainError("simplex_scale must be positive")


@dataclass(frozen=True)
class HnResult:
    n: int
    value: float
    maximizer: np.ndarray
    discarded_restarts: int = 0
    boundary_suspected: bool = False


def hardy_ratio(e: MeanExpr, x) -> float:
    """``(e(x_1) + ... + e(x_1..x_n)) / (x_1 + ... + x_n)``."""
    x = np.asarray(x, dtype=float)
    return float(prefix_means(e, x).sum() / x.sum())


def _to_simplex(z):
    return softmax(np.append(z, 0.0))


def hardy_n_lower(e: MeanExpr, n: int, cfg: OptimizerConfig = OptimizerConfig(),
                  warm_start=None) -> HnResult:
    """Best attained value of the n-term Hardy ratio.

    Nelder-Mead in log coordinates ``x = softmax(z, 0)`` keeps the search in
    the open simplex.  Starts: the uniform vector, the harmonic vector, an
    optional ``warm_start`` point (an (n-1)-term maximizer is padded with a
    tiny last entry, which keeps estimates nondecreasing in ``n``) and
    ``cfg.restarts`` random points drawn from ``(cfg.seed, n, restart)``.
    """
    if n == 1:
        return HnResult(1, 1.0, np.ones(1))
    if not 2 <= n <= cfg.dimension_cap:
        raise DomainError(f"n must satisfy 2 <= n <= dimension_cap={cfg.dimension_cap}")

    def neg_ratio(z):
        x = _to_simplex(z)
        if np.any(x <= 0):
            return np.inf
        try:
            r = hardy_ratio(e, x)
        except (EvaluationError, DomainError):
            return np.inf
        return -r if math.isfinite(r) else np.inf

    starts = [np.zeros(n - 1), -np.log(np.arange(1, n))]
    if warm_start is not None:
        w = np.asarray(warm_start, dtype=float)
        w = w / w.sum()
        if w.size == n - 1:
            w = np.append(w, 1e-9)
        if w.size == n:
            w = np.maximum(w, 1e-300)
            starts.append(np.log(w[:-1]) - math.log(w[-1]))
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, n, r])
        starts.append(rng.normal(0.0, 2.0, n - 1))

    best_val, best_x, discarded = -np.inf, None, 0
    for z0 in starts:
        f0 = neg_ratio(z0)
        if not math.isfinite(f0):
            discarded += 1
            continue
        simplex = np.vstack([z0, z0 + cfg.simplex_scale * np.eye(n - 1)])
        res = minimize(neg_ratio, z0, method="Nelder-Mead",
                       options={"maxiter": cfg.iterations, "initial_simplex": simplex,
                                "xatol": 1e-10, "fatol": 1e-14})
        if not math.isfinite(res.fun):
            discarded += 1
            continue
        # re-evaluate: the reported value must be an attained ratio
        x = _to_simplex(res.x)
        val = hardy_ratio(e, x)
        if val > best_val:
            best_val, best_x = val, x
    if best_x is None:
        raise EvaluationError("every optimizer restart produced a non-finite ratio")
    return HnResult(n, float(best_val), best_x, discarded, bool(best_x.min() < 1e-6))


def hardy_sequence_lower(e: MeanExpr, n_max: int, cfg: OptimizerConfig = OptimizerConfig()) -> list[HnResult]:
    """``hardy_n_lower`` for ``n = 1..n_max``, each warm-started from the previous."""
    out = [hardy_n_lower(e, 1, cfg)]
    for n in range(2, n_max + 1):
        out.append(hardy_n_lower(e, n, cfg, warm_start=out[-1].maximizer))
    return out


def superinvariant_upper_bound(e: MeanExpr, n: int) -> float:
    """``n e(1, 1/2, ..., 1/n)`` with each entry repeated ``(n-1)!`` times.

    Valid as an upper bound of ``H_n`` only under the hypotheses checked by
    :func:`superinvariant_hypotheses`.  Repetition counts matter only for
    ``circ`` mixes, which limits those to ``n <= 171``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    x = 1.0 / np.arange(1, n + 1, dtype=float)
    if _contains_circ(e):
        if n > 171:
            raise DomainError("(n-1)! repetition counts exceed float range for n > 171")
        w = np.full(n, float(math.factorial(n - 1)))
    else:
        w = np.ones(n)
    return n * eval_mean(e, WeightedSample(x, w))


# ---------------------------------------------------------------------------
# truncated inequality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedCheck:
    margin: float
    constant: float
    prefix_means: np.ndarray = field(repr=False)
    mean_partial_sums: np.ndarray = field(repr=False)
    value_partial_sums: np.ndarray = field(repr=False)

    @property
    def holds(self) -> bool:
        return self.margin >= 0


def truncated_hardy_check(e: MeanExpr, x, C: float) -> TruncatedCheck:
    """``C sum x_n - sum e(x_1..x_n)`` for a finite positive sequence.

    A nonnegative margin is consistent with the Hardy inequality at ``C``;
    it proves nothing about the infinite sequence.
    """
    x = np.asarray(x, dtype=float)
    pm = prefix_means(e, x)
    ms = np.cumsum(pm)
    xs = np.cumsum(x)
    return TruncatedCheck(float(C * xs[-1] - ms[-1]), float(C), pm, ms, xs)


# ---------------------------------------------------------------------------
# full bracket
# ---------------------------------------------------------------------------


@dataclass
class HardyBracket:
    expr: MeanExpr
    lower_harmonic: HarmonicEstimate
    lower_hn: list[HnResult]
    upper_superinvariant: list[tuple[int, float]]
    gamma_reference: float | None = None
    rho_reference: float | None = None
    flags: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        from .grammar import format_expr

        return {
            "expr": format_expr(self.expr),
            "gamma_reference": _json_number(self.gamma_reference),
            "rho_reference": _json_number(self.rho_reference),
            "C_estimate": {
                "estimate": _json_number(self.lower_harmonic.estimate),
                "raw": _json_number(self.lower_harmonic.raw),
                "accelerated": _json_number(self.lower_harmonic.accelerated),
                "converged": self.lower_harmonic.converged,
            },
            "Hn": [
                {"n": r.n, "lower": r.value, "maximizer": [float(v) for v in r.maximizer],
                 "boundary_suspected": r.boundary_suspected, "discarded_restarts": r.discarded_restarts}
                for r in self.lower_hn
            ],
            "upper": [{"n": n, "bound": _json_number(b)} for n, b in self.upper_superinvariant],
            "flags": list(self.flags),
        }

    def csv_rows(self) -> list[dict]:
        upper = dict(self.upper_superinvariant)
        return [{"n": r.n, "lower": r.value, "upper": upper.get(r.n, ""),
                 "boundary_suspected": int(r.boundary_suspected)} for r in self.lower_hn]


def _json_number(v):
    if v is None:
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(v)


def hardy_bracket(e: MeanExpr, n_max: int = 8, cfg: OptimizerConfig = OptimizerConfig(),
                  n_harmonic: int = 10_000, extrapolate: bool = True) -> HardyBracket:
    from .rho import Finiteness, rho, rho_finiteness

    flags = []
    if n_max > cfg.dimension_cap:
        raise DomainError(f"n_max={n_max} exceeds dimension_cap={cfg.dimension_cap}")
    harmonic = harmonic_lower_bound(e, n_harmonic, extrapolate)
    if not harmonic.converged:
        flags.append("harmonic sequence not converging")
    hn = hardy_sequence_lower(e, n_max, cfg)
    if any(r.boundary_suspected for r in hn):
        flags.append("supremum suspected on boundary")
    upper = [(n, superinvariant_upper_bound(e, n)) for n in range(1, n_max + 1)]
    if not superinvariant_hypotheses(e):
        flags.append("upper bound hypotheses not established")
    if open_region(e):
        flags.append("open-region estimate")

    gamma_ref = gamma(e.p) if isinstance(e, Power) else None
    if gamma_ref is not None and math.isinf(gamma_ref):
        flags.append("divergent: not a Hardy mean")
    rho_ref = None
    if is_power_mix(e) and max(exponents(e)) <= 1:
        p, q = e.outer.p, e.inner.p
        if rho_finiteness(p, q) is Finiteness.INFINITE:
            rho_ref = math.inf
        else:
            rho_ref = rho(p, q, 1e-8).value
        if isinstance(e, Circ) and not p > q:
            flags.append("rho is the Hardy constant of circ only for p > q")
    return HardyBracket(e, harmonic, hn, upper, gamma_ref, rho_ref, flags)


def l1_samples(count: int, seed: int = 0, min_len: int = 20, max_len: int = 200) -> list[np.ndarray]:
    """Seeded positive sequences with summable decay ``u_k k^(-s)``, ``s`` in ``(1.1, 3)``.

    Sample ``j`` depends only on ``(seed, j)``.
    """
    out = []
    for j in range(count):
        rng = np.random.default_rng([seed, j])
        L = int(rng.integers(min_len, max_len + 1))
        s = rng.uniform(1.1, 3.0)
        out.append(rng.uniform(0.05, 1.0, L) * np.arange(1, L + 1, dtype=float) ** -s)
    return out
