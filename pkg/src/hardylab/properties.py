"""Seeded randomized audits of mean axioms.

Each audit draws ``trials`` random inputs, trial ``t`` from its own generator
``default_rng([seed, t])``, so a report can be replayed and does not depend on
evaluation order.  Values are log-uniform on ``[1e-3, 1e3]`` and vector
lengths uniform on ``2..6``.  Comparisons use a relative slack of ``1e-12``
of the larger side.

An audit passes when no trial violates the property.  Passing is evidence,
not proof; a counterexample is exact and carries the input that produced it.

Audits accept a :data:`~hardylab.means.MeanExpr` or any callable mapping a
1-D array of positive values to a float (handy for test doubles).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .means import Circ, MeanExpr, Power, Square, eval_batch

Mean = Union[MeanExpr, Callable[[np.ndarray], float]]

REL_TOL = 1e-12
LOG_RANGE = (-3.0, 3.0)
LENGTHS = (2, 6)


@dataclass
class AuditReport:
    property: str
    trials: int
    verdict: str                    # "pass", "counterexample" or "vacuous"
    seed: int
    expr: str = ""
    witness: dict | None = None
    worst: float = 0.0              # largest violation (or residual) seen
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        return {
            "property": self.property,
            "expr": self.expr,
            "trials": self.trials,
            "seed": self.seed,
            "verdict": self.verdict,
            "worst": self.worst,
            "witness": _jsonable(self.witness),
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _label(e: Mean) -> str:
    if isinstance(e, (Power, Circ, Square)):
        return str(e)
    return getattr(e, "__name__", repr(e))


def _batch_fn(e: Mean):
    """``f(X, W) -> values`` over rows of ``X`` with optional integer repetitions ``W``."""
    if isinstance(e, (Power, Circ, Square)):
        return lambda X, W=None: eval_batch(e, X, W)

    def f(X, W=None):
        if W is None:
            return np.array([float(e(row)) for row in X])
        return np.array([float(e(np.repeat(row, w.astype(int)))) for row, w in zip(X, W)])

    return f


def _rng(seed, trial):
    return np.random.default_rng([seed, trial])


def _values(rng, k):
    return 10.0 ** rng.uniform(*LOG_RANGE, k)


def _length(rng):
    return int(rng.integers(LENGTHS[0], LENGTHS[1] + 1))


def _grouped(samples, evaluate):
    """Evaluate ``evaluate(arrays...)`` per length group, keeping trial order.

    ``samples`` is a list of tuples of equal-length 1-D arrays.
    """
    out = [None] * len(samples)
    by_len: dict[int, list[int]] = {}
    for t, s in enumerate(samples):
        by_len.setdefault(s[0].size, []).append(t)
    for idx in by_len.values():
        stacked = [np.stack([samples[t][j] for t in idx]) for j in range(len(samples[idx[0]]))]
        res = evaluate(*stacked)
        for r, t in enumerate(idx):
            out[t] = tuple(col[r].item() if np.ndim(col[r]) == 0 else col[r] for col in res)
    return out


def _first_violation(results, violated):
    worst, first = 0.0, None
    for t, r in enumerate(results):
        amount = violated(*r)
        worst = max(worst, amount)
        if amount > 0 and first is None:
            first = t
    return first, worst


def _slack(a, b):
    return REL_TOL * np.maximum(np.abs(a), np.abs(b))


# ---------------------------------------------------------------------------
# audits
# ---------------------------------------------------------------------------


def audit_symmetry(e: Mean, trials: int = 1000, seed: int = 0) -> AuditReport:
    f = _batch_fn(e)
    samples = []
    for t in range(trials):
        rng = _rng(seed, t)
        x = _values(rng, _length(rng))
        samples.append((x, x[rng.permutation(x.size)]))
    res = _grouped(samples, lambda X, Y: (f(X), f(Y)))
    first, worst = _first_violation(res, lambda a, b: max(0.0, abs(a - b) - _slack(a, b)))
    rep = AuditReport("symmetry", trials, "pass", seed, _label(e), worst=worst)
    if first is not None:
        x, y = samples[first]
        rep.verdict = "counterexample"
        rep.witness = {"trial": first, "x": x, "permuted": y, "value": res[first][0],
                       "permuted_value": res[first][1]}
    return rep


def audit_midpoint_concavity(e: Mean, trials: int = 1000, seed: int = 0) -> AuditReport:
    f = _batch_fn(e)
    samples = []
    for t in range(trials):
        rng = _rng(seed, t)
        k = _length(rng)
        samples.append((_values(rng, k), _values(rng, k)))
    res = _grouped(samples, lambda X, Y: (f(0.5 * (X + Y)), 0.5 * (f(X) + f(Y))))
    first, worst = _first_violation(res, lambda mid, avg: max(0.0, avg - mid - _slack(mid, avg)))
    rep = AuditReport("concavity", trials, "pass", seed, _label(e), worst=worst)
    if first is not None:
        x, y = samples[first]
        rep.verdict = "counterexample"
        rep.witness = {"trial": first, "x": x, "y": y, "mean_of_midpoint": res[first][0],
                       "midpoint_of_means": res[first][1]}
    return rep


def audit_monotonicity(e: Mean, trials: int = 1000, seed: int = 0) -> AuditReport:
    f = _batch_fn(e)
    samples = []
    for t in range(trials):
        rng = _rng(seed, t)
        x = _values(rng, _length(rng))
        y = x.copy()
        i = int(rng.integers(x.size))
        y[i] *= 10.0 ** rng.uniform(0.0, 1.0)
        samples.append((x, y))
    res = _grouped(samples, lambda X, Y: (f(X), f(Y)))
    first, worst = _first_violation(res, lambda a, b: max(0.0, a - b - _slack(a, b)))
    rep = AuditReport("monotonicity", trials, "pass", seed, _label(e), worst=worst)
    if first is not None:
        x, y = samples[first]
        rep.verdict = "counterexample"
        rep.witness = {"trial": first, "x": x, "increased": y, "value": res[first][0],
                       "increased_value": res[first][1]}
    return rep


def audit_mean_value(e: Mean, trials: int = 1000, seed: int = 0) -> AuditReport:
    """``min x <= e(x) <= max x``."""
    f = _batch_fn(e)
    samples = []
    for t in range(trials):
        rng = _rng(seed, t)
        samples.append((_values(rng, _length(rng)),))
    res = _grouped(samples, lambda X: (f(X), X.min(axis=1), X.max(axis=1)))

    def viol(v, lo, hi):
        return max(0.0, lo - v - REL_TOL * lo, v - hi - REL_TOL * hi)

    first, worst = _first_violation(res, viol)
    rep = AuditReport("mean_value", trials, "pass", seed, _label(e), worst=worst)
    if first is not None:
        rep.verdict = "counterexample"
        rep.witness = {"trial": first, "x": samples[first][0], "value": res[first][0]}
    return rep


def audit_homogeneity(e: Mean, trials: int = 1000, seed: int = 0) -> AuditReport:
    """``e(t x) == t e(x)``."""
    f = _batch_fn(e)
    samples = []
    for t in range(trials):
        rng = _rng(seed, t)
        x = _values(rng, _length(rng))
        samples.append((x, np.full(x.size, 10.0 ** rng.uniform(-2.0, 2.0))))
    res = _grouped(samples, lambda X, T: (f(T * X) / T[:, 0], f(X)))
    first, worst = _first_violation(res, lambda a, b: max(0.0, abs(a - b) - 1e3 * _slack(a, b)))
    rep = AuditReport("homogeneity", trials, "pass", seed, _label(e), worst=worst)
    if first is not None:
        x, tt = samples[first]
        rep.verdict = "counterexample"
        rep.witness = {"trial": first, "x": x, "t": tt[0], "scaled_over_t": res[first][0],
                       "value": res[first][1]}
    return rep


def audit_repetition(e: Mean, mode: str = "invariant", trials: int = 1000, seed: int = 0,
                     m_max: int = 8, probes=()) -> AuditReport:
    """Compare ``e`` on ``x`` repeated ``m`` times with ``e(x)``.

    ``mode="invariant"`` requires equality, ``"superinvariant"`` requires the
    repeated value to be no smaller.  ``probes`` is a list of ``(x, m)``
    checked before the random trials.
    """
    if mode not in ("invariant", "superinvariant"):
        raise ValueError("mode must be 'invariant' or 'superinvariant'")
    if m_max < 2:
        raise ValueError("m_max must be >= 2")
    f = _batch_fn(e)
    samples = []
    for x, m in probes:
        x = np.asarray(x, dtype=float)
        samples.append((x, np.full(x.size, float(m))))
    for t in range(trials):
        rng = _rng(seed, t)
        x = _values(rng, _length(rng))
        samples.append((x, np.full(x.size, float(rng.integers(2, m_max + 1)))))
    res = _grouped(samples, lambda X, M: (f(X, M), f(X)))
    if mode == "invariant":
        viol = lambda rep, base: max(0.0, abs(rep - base) - _slack(rep, base))  # noqa: E731
    else:
        viol = lambda rep, base: max(0.0, base - rep - _slack(rep, base))  # noqa: E731
    first, worst = _first_violation(res, viol)
    rep = AuditReport(f"repetition_{mode}", len(samples), "pass", seed, _label(e), worst=worst,
                      details={"probes": len(probes), "m_max": m_max})
    if first is not None:
        x, M = samples[first]
        rep.verdict = "counterexample"
        rep.witness = {"trial": first - len(probes) if first >= len(probes) else None,
                       "probe": first if first < len(probes) else None,
                       "x": x, "m": int(M[0]), "repeated_value": res[first][0], "value": res[first][1]}
    return rep


def audit_concave_implies_monotone(e: Mean, trials: int = 10_000, seed: int = 0) -> AuditReport:
    """If no concavity violation is found, monotonicity must hold too."""
    conc = audit_midpoint_concavity(e, trials, seed)
    details = {"concavity": conc.verdict}
    if not conc.passed:
        return AuditReport("concave_implies_monotone", trials, "vacuous", seed, _label(e),
                           details=details)
    mono = audit_monotonicity(e, trials, seed)
    details["monotonicity"] = mono.verdict
    return AuditReport("concave_implies_monotone", trials, "pass" if mono.passed else "counterexample",
                       seed, _label(e), witness=mono.witness, details=details)


def mix_identity_residuals(p: float, q: float, V: np.ndarray) -> np.ndarray:
    """Relative residuals of the circ/sq/power identity on the rows of ``V``.

    For ``p != 0``: ``circ^p = n/(n-1) sq^p - 1/(n-1) P^p``, residual taken
    relative to the largest of the three terms.  For ``p == 0``:
    ``(n-1) ln circ = n ln sq - ln P``, residual is the absolute log
    difference of ``circ`` (a relative error).
    """
    n = V.shape[1]
    c = eval_batch(Circ(Power(p), Power(q)), V)
    s = eval_batch(Square(Power(p), Power(q)), V)
    m = eval_batch(Power(p), V)
    if p == 0:
        return np.abs(np.log(c) - (n * np.log(s) - np.log(m)) / (n - 1))
    a, b, d = c**p, n / (n - 1) * s**p, m**p / (n - 1)
    return np.abs(a - b + d) / np.maximum.reduce([a, b, d])


def audit_mix_identity(p: float, q: float, trials: int = 1000, seed: int = 0, tol: float = 1e-10) -> AuditReport:
    samples = []
    for t in range(trials):
        rng = _rng(seed, t)
        samples.append((_values(rng, _length(rng)),))
    res = _grouped(samples, lambda V: (mix_identity_residuals(p, q, V),))
    first, worst = _first_violation(res, lambda r: r if r > tol else 0.0)
    worst = max(r[0] for r in res)
    rep = AuditReport("mix_identity", trials, "pass", seed, f"p={p:g},q={q:g}", worst=float(worst),
                      details={"tol": tol})
    if first is not None:
        rep.verdict = "counterexample"
        rep.witness = {"trial": first, "v": samples[first][0], "residual": res[first][0]}
    return rep


def audit_superinvariance_limit(p: float, q: float, trials: int = 1000, seed: int = 0,
                                ms=(1, 2, 4, 8)) -> AuditReport:
    """``circ(P[p], P[q])`` on ``x`` repeated ``m`` times is nondecreasing in
    ``m`` and stays below ``sq(P[p], P[q])(x)`` (for ``p > q``)."""
    circ, sq = Circ(Power(p), Power(q)), Square(Power(p), Power(q))
    samples = []
    for t in range(trials):
        rng = _rng(seed, t)
        samples.append((_values(rng, _length(rng)),))

    def evaluate(V):
        cols = [eval_batch(circ, V, np.full(V.shape, float(m))) for m in ms]
        return (np.stack(cols, axis=1), eval_batch(sq, V))

    res = _grouped(samples, evaluate)

    def viol(seq, top):
        drop = np.max(np.maximum(seq[:-1] - seq[1:] - _slack(seq[:-1], seq[1:]), 0.0))
        over = max(0.0, seq[-1] - top - REL_TOL * top)
        return float(max(drop, over))

    first, worst = _first_violation(res, viol)
    rep = AuditReport("superinvariance_limit", trials, "pass", seed, str(circ), worst=worst,
                      details={"ms": list(ms)})
    if first is not None:
        rep.verdict = "counterexample"
        rep.witness = {"trial": first, "x": samples[first][0], "circ_by_m": res[first][0],
                       "sq": res[first][1]}
    return rep


def replay(report: AuditReport, e: Mean) -> bool:
    """Re-evaluate a counterexample witness; True if it still violates."""
    w = report.witness
    if w is None:
        return False
    prop = report.property
    if prop == "symmetry":
        f = _batch_fn(e)
        a, b = f(np.atleast_2d(w["x"]))[0], f(np.atleast_2d(w["permuted"]))[0]
        return abs(a - b) > _slack(a, b)
    if prop == "concavity":
        f = _batch_fn(e)
        x, y = np.atleast_2d(w["x"]), np.atleast_2d(w["y"])
        mid, avg = f(0.5 * (x + y))[0], 0.5 * (f(x)[0] + f(y)[0])
        return avg - mid > _slack(mid, avg)
    if prop in ("monotonicity", "concave_implies_monotone"):
        f = _batch_fn(e)
        a, b = f(np.atleast_2d(w["x"]))[0], f(np.atleast_2d(w["increased"]))[0]
        return a - b > _slack(a, b)
    if prop.startswith("repetition_"):
        f = _batch_fn(e)
        x = np.atleast_2d(w["x"])
        rep, base = f(x, np.full(x.shape, float(w["m"])))[0], f(x)[0]
        if prop.endswith("superinvariant"):
            return base - rep > _slack(rep, base)
        return abs(rep - base) > _slack(rep, base)
    raise ValueError(f"replay not supported for {prop!r}")


AUDITS = {
    "symmetry": audit_symmetry,
    "concavity": audit_midpoint_concavity,
    "monotonicity": audit_monotonicity,
    "mean_value": audit_mean_value,
    "homogeneity": audit_homogeneity,
    "repetition": lambda e, trials, seed: audit_repetition(e, "invariant", trials, seed),
    "superinvariance": lambda e, trials, seed: audit_repetition(e, "superinvariant", trials, seed),
    "concave_implies_monotone": audit_concave_implies_monotone,
}


def run_audits(e: Mean, props, trials: int = 1000, seed: int = 0) -> list[AuditReport]:
    unknown = [p for p in props if p not in AUDITS]
    if unknown:
        raise ValueError(f"unknown properties: {', '.join(unknown)}")
    return [AUDITS[p](e, trials, seed) for p in props]

