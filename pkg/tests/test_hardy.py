from __future__ import annotations

import math

import numpy as np
import pytest

import oracles
from hardylab.errors import DomainError
from hardylab.hardy import (OptimizerConfig, aitken, gamma, hardy_bracket, hardy_n_lower, hardy_ratio,
                            hardy_sequence_lower, harmonic_lower_bound, harmonic_sequence, hlp_bound,
                            kaluza_szego_bound, l1_samples, superinvariant_hypotheses,
                            superinvariant_upper_bound, truncated_hardy_check)
from hardylab.means import Circ, Power, Square

P = Power
FAST = OptimizerConfig(restarts=6, iterations=400)


@pytest.mark.parametrize("p, expected", [(0.0, math.e), (0.5, 4.0), (-1.0, 2.0), (1.0, math.inf), (3.0, math.inf)])
def test_gamma(p, expected):
    assert gamma(p) == pytest.approx(expected, rel=1e-15)


def test_classical_bounds():
    assert kaluza_szego_bound(0, 1) == pytest.approx(1.5819767068693265, rel=1e-14)
    # e / (2 (sqrt(e) - 1))
    assert kaluza_szego_bound(0, 2) == pytest.approx(2.095107676618463, rel=1e-14)
    assert kaluza_szego_bound(0, 10**7) == pytest.approx(math.e, rel=1e-6)
    assert hlp_bound(1) == 2.0
    assert hlp_bound(2) == 2.25
    assert hlp_bound(10**8) == pytest.approx(math.e, rel=1e-7)
    with pytest.raises(DomainError):
        kaluza_szego_bound(1.0, 3)


def test_aitken_recovers_geometric_limit():
    assert aitken(3.0 - 1.0, 3.0 - 0.5, 3.0 - 0.25) == pytest.approx(3.0, abs=1e-15)


def test_harmonic_sequence_matches_oracle():
    a = harmonic_sequence(Square(P(0), P(1)), 12)
    for n in (1, 5, 12):
        x = [1 / i for i in range(1, n + 1)]
        assert a[n] == pytest.approx(n * oracles.mean(Square(P(0), P(1)), x), rel=1e-12)


def test_harmonic_geometric_mean():
    est = harmonic_lower_bound(P(0), 10**4, extrapolate=True)
    assert est.converged
    assert abs(est.estimate - math.e) <= 6e-4
    # raw tail value is n / (n!)^(1/n) at the window start
    n0 = est.tail_n[0]
    assert est.raw == pytest.approx(n0 / math.exp(math.lgamma(n0 + 1) / n0), rel=1e-11)
    assert est.raw < math.e


def test_harmonic_arithmetic_mean_diverges():
    est = harmonic_lower_bound(P(1), 10**3)
    assert not est.converged
    assert est.raw == pytest.approx(sum(1 / i for i in range(1, 901)), rel=1e-12)


def test_square_of_geometric_is_geometric():
    np.testing.assert_allclose(harmonic_sequence(Square(P(0), P(0)), 500)[1:],
                               harmonic_sequence(P(0), 500)[1:], rtol=1e-12)


def test_harmonic_estimate_unpacks():
    est, tail = harmonic_lower_bound(P(0), 100)
    assert tail.size == 11 and est == tail.min()
    with pytest.raises(DomainError):
        harmonic_lower_bound(P(0), 9)


def test_h2_geometric_against_grid():
    t = np.linspace(1e-6, 1.0, 2_000_001)
    grid_max = np.max((1 + np.sqrt(t)) / (1 + t))
    r = hardy_n_lower(P(0), 2, FAST)
    assert r.value == pytest.approx((1 + math.sqrt(2)) / 2, abs=1e-9)
    assert r.value == pytest.approx(grid_max, abs=1e-9)
    assert r.maximizer[1] / r.maximizer[0] == pytest.approx(3 - 2 * math.sqrt(2), abs=1e-4)
    assert r.maximizer.sum() == pytest.approx(1.0)
    assert not r.boundary_suspected


def test_h2_arithmetic_supremum_on_boundary():
    r = hardy_n_lower(P(1), 2, FAST)
    assert 1.5 - 1e-6 < r.value <= 1.5
    assert r.boundary_suspected


def test_hn_trivial_and_bounds():
    assert hardy_n_lower(Square(P(0), P(1)), 1).value == 1.0
    with pytest.raises(DomainError):
        hardy_n_lower(P(0), 13)
    seq = hardy_sequence_lower(Circ(P(1), P(0)), 4, FAST)
    vals = [r.value for r in seq]
    assert all(b >= a - 1e-6 for a, b in zip(vals, vals[1:]))
    assert all(1.0 <= v <= r.n for v, r in zip(vals, seq))


def test_hn_reported_value_is_attained():
    r = hardy_n_lower(Square(P(0), P(-1)), 3, FAST)
    assert hardy_ratio(Square(P(0), P(-1)), r.maximizer) == r.value


def test_hn_deterministic():
    a = hardy_n_lower(Square(P(0.5), P(0)), 3, FAST)
    b = hardy_n_lower(Square(P(0.5), P(0)), 3, FAST)
    assert a.value == b.value and np.array_equal(a.maximizer, b.maximizer)


@pytest.mark.parametrize("n, expected", [(1, 1.0), (2, math.sqrt(2)), (3, 3 * 6 ** (-1 / 3))])
def test_superinvariant_bound_geometric(n, expected):
    assert superinvariant_upper_bound(P(0), n) == pytest.approx(expected, abs=1e-12)


def test_superinvariant_bound_circ_uses_factorial_multiplicities():
    e = Circ(P(1), P(0))
    x = [1.0, 1.0, 0.5, 0.5, 1 / 3, 1 / 3]  # each 1/i repeated (3-1)! = 2 times
    assert superinvariant_upper_bound(e, 3) == pytest.approx(3 * oracles.mean(e, x), rel=1e-12)


def test_superinvariant_bound_tends_to_gamma():
    assert superinvariant_upper_bound(P(0), 20000) == pytest.approx(math.e, abs=1e-3)
    assert superinvariant_upper_bound(P(-1), 20000) == pytest.approx(2.0, abs=1e-3)


def test_hypotheses():
    assert superinvariant_hypotheses(Square(P(0), P(1)))
    assert superinvariant_hypotheses(Circ(P(1), P(0)))
    assert not superinvariant_hypotheses(P(2))
    assert not superinvariant_hypotheses(Circ(P(0), P(1)))


def test_truncated_examples():
    x = 4.0 ** -np.arange(10)
    assert truncated_hardy_check(P(0), x, math.e).margin > 0
    for e in (P(0), Square(P(0), P(1)), Circ(P(1), P(0))):
        chk = truncated_hardy_check(e, [3.0], 1.0)
        assert chk.margin == 0.0 and chk.holds
    x = 1.0 / np.arange(1, 101) ** 2
    chk = truncated_hardy_check(Square(P(0), P(1)), x, 2 * math.sqrt(math.e))
    assert chk.margin > 0
    assert chk.mean_partial_sums[-1] == pytest.approx(chk.prefix_means.sum())


def test_truncated_detects_too_small_constant():
    x = 1.0 / np.arange(1, 200)
    assert not truncated_hardy_check(P(0), x, 1.0).holds


def test_l1_samples_deterministic():
    a, b = l1_samples(3, seed=5), l1_samples(3, seed=5)
    assert all(np.array_equal(u, v) for u, v in zip(a, b))
    assert all(np.all(u > 0) for u in a)


def test_bracket_power_reports_gamma():
    br = hardy_bracket(P(-1), 3, FAST, n_harmonic=2000)
    doc = br.to_json()
    assert doc["gamma_reference"] == pytest.approx(2.0)
    assert doc["rho_reference"] is None
    assert [h["n"] for h in doc["Hn"]] == [1, 2, 3]
    assert all(h["lower"] <= u["bound"] + 1e-6 for h, u in zip(doc["Hn"], doc["upper"]))
    assert br.csv_rows()[1]["n"] == 2


def test_bracket_flags():
    doc = hardy_bracket(P(1), 2, FAST, n_harmonic=1000).to_json()
    assert doc["gamma_reference"] == "inf"
    assert "divergent: not a Hardy mean" in doc["flags"]
    assert "harmonic sequence not converging" in doc["flags"]
    doc = hardy_bracket(Circ(P(1.5), P(-1)), 2, FAST, n_harmonic=1000).to_json()
    assert "open-region estimate" in doc["flags"]
    doc = hardy_bracket(Circ(P(0), P(1)), 2, FAST, n_harmonic=1000).to_json()
    assert "rho is the Hardy constant of circ only for p > q" in doc["flags"]
    assert doc["rho_reference"] == pytest.approx(2 * math.sqrt(math.e), abs=1e-7)


def test_bracket_rejects_large_n():
    with pytest.raises(DomainError):
        hardy_bracket(P(0), 13, FAST)
