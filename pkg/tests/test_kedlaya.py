from __future__ import annotations

import math

import numpy as np
import pytest

import oracles
from hardylab.errors import DomainError
from hardylab.kedlaya import (KedlayaMatrix, alpha, block_counts, build, check_mixing_inequality,
                              matrix_sides, profile, read_csv, verify, write_csv)
from hardylab.means import Power, Square

P = Power


@pytest.mark.parametrize("p, expected", [(1, [6, 0, 0]), (3, [3, 3, 0]), (6, [2, 2, 2])])
def test_alpha_examples(p, expected):
    assert [alpha(3, p, s) for s in (1, 2, 3)] == expected


def test_alpha_rows_sum_to_factorial():
    for n in range(1, 6):
        assert np.all(profile(n).sum(axis=1) == math.factorial(n))


def test_alpha_range():
    with pytest.raises(DomainError):
        alpha(3, 7, 1)
    with pytest.raises(DomainError):
        alpha(3, 1, 4)


def test_small_builds():
    assert build(1).entries.tolist() == [[1]]
    assert build(2).entries.tolist() == [[1, 1], [1, 2]]


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_build_verifies(n):
    K = build(n)
    assert K.entries.shape == (math.factorial(n),) * 2
    assert verify(K) == []


def test_build_order_six_needs_raised_cap():
    with pytest.raises(DomainError):
        build(6)
    assert verify(build(6, max_n=6)) == []


def test_block_counts_satisfy_equations():
    n = 4
    t = block_counts(n)
    m, N = math.factorial(n - 1), math.factorial(n)
    assert np.all(t.sum(axis=2) == m)
    for a in range(n):
        assert np.all(t[a].sum(axis=0) == [N // (a + 1) if s <= a else 0 for s in range(n)])


def test_verify_reports_violation():
    viol = verify(KedlayaMatrix(2, np.array([[1, 1], [2, 1]])))
    col1 = [v for v in viol if v.axis == "column" and v.index == 1 and v.value == 1]
    assert col1 and col1[0].expected == 2 and col1[0].actual == 1


def test_matrix_validation():
    with pytest.raises(DomainError):
        KedlayaMatrix(2, np.ones((3, 3)))
    with pytest.raises(DomainError):
        KedlayaMatrix(2, np.array([[1, 3], [1, 1]]))


def test_csv_round_trip(tmp_path):
    K = build(3)
    path = tmp_path / "k.csv"
    write_csv(K, path)
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.startswith(b"c1,c2")
    assert np.array_equal(read_csv(path, 3).entries, K.entries)


def test_mixing_examples():
    c = check_mixing_inequality(P(0), [1.0, 4.0])
    assert c.lhs == pytest.approx(3.0, rel=1e-15)
    assert c.rhs == pytest.approx(2 * math.sqrt(2.5), rel=1e-15)
    assert c.holds
    for n in (1, 2, 3, 4, 5):
        c = check_mixing_inequality(P(0), [1.0] * n)
        assert c.lhs == pytest.approx(n, rel=1e-14) and c.rhs == pytest.approx(n, rel=1e-14)


def test_mixing_lhs_matches_enumeration():
    e = Square(P(0.5), P(0))
    x = [0.5, 2.0, 1.5]
    lhs = sum(oracles.mean(e, [v for v in x[:i] for _ in range(6 // i)]) for i in (1, 2, 3))
    assert check_mixing_inequality(e, x).lhs == pytest.approx(lhs, rel=1e-12)


def test_matrix_route_agrees():
    K = build(3)
    for e in (P(0), Square(P(0), P(-1))):
        x = [0.7, 3.0, 1.9]
        c = check_mixing_inequality(e, x)
        rows, cols = matrix_sides(e, x, K)
        assert rows == pytest.approx(c.lhs / 3, rel=1e-12)
        assert cols == pytest.approx(c.rhs / 3, rel=1e-12)


def test_mixing_holds_for_concave_means_on_random_inputs():
    rng = np.random.default_rng(11)
    for e in (Square(P(0), P(-1)), Square(P(0.5), P(0))):
        for _ in range(20):
            assert check_mixing_inequality(e, rng.uniform(0.01, 10, 3)).holds


def test_harmonic_side():
    c = check_mixing_inequality(P(0), [1.0, 4.0])
    assert c.harmonic_rhs == pytest.approx(2 * math.sqrt(0.5) * 5)
    assert c.harmonic_holds


def test_length_cap():
    with pytest.raises(DomainError):
        check_mixing_inequality(P(0), [1.0] * 6)
