from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from hardylab.errors import DomainError, EvaluationError, UnaryCase
from hardylab.means import (Circ, EvalOptions, Power, Square, WeightedSample, eval_batch, eval_mean,
                            eval_power, eval_repeated, expand_pairs, homogenize_estimate, prefix_means)

P = Power
values = st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=6)
exps = st.sampled_from([-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0])


def mixes():
    leaf = exps.map(Power)
    return st.one_of(leaf, st.builds(Square, leaf, leaf), st.builds(Circ, leaf, leaf))


# -- power means -------------------------------------------------------------

@pytest.mark.parametrize("p, pairs, expected", [
    (0, [(1, 1), (4, 1)], 2.0),
    (1, [(2, 1), (4, 1)], 3.0),
    (0, [(8, 1), (1, 2)], 2.0),
    (-1, [(1, 1), (1 / 3, 1)], 0.5),
])
def test_power_mean_examples(p, pairs, expected):
    assert eval_power(p, WeightedSample.from_pairs(pairs)) == pytest.approx(expected, rel=1e-14)


def test_power_zero_is_exact_branch():
    s = WeightedSample.of([1.0, 4.0])
    assert eval_power(0.0, s) == pytest.approx(2.0, rel=1e-15)
    # a nearby exponent is evaluated directly, not snapped to the geometric mean
    assert eval_power(1e-6, s) > eval_power(0.0, s)


def test_large_exponents_do_not_overflow():
    s = WeightedSample.of([1e-300, 1e300])
    assert eval_power(500.0, s) == pytest.approx(1e300 * 0.5 ** (1 / 500), rel=1e-12)
    assert eval_power(-500.0, s) == pytest.approx(1e-300 * 2 ** (1 / 500), rel=1e-12)


def test_linear_domain_overflow_reports_exponent():
    with pytest.raises(EvaluationError) as info:
        eval_power(400.0, WeightedSample.of([1e300, 1.0]), EvalOptions(log_domain=False))
    assert info.value.exponent == 400.0


@pytest.mark.parametrize("bad", [[], [0.0], [-1.0], [math.inf], [math.nan]])
def test_sample_rejects_bad_values(bad):
    with pytest.raises(DomainError):
        WeightedSample.of(bad)


def test_sample_rejects_bad_weights():
    with pytest.raises(DomainError):
        WeightedSample.of([1.0, 2.0], [1.0, 0.0])
    with pytest.raises(DomainError):
        WeightedSample.of([1.0, 2.0], [1.0])


def test_sample_is_read_only():
    s = WeightedSample.of([1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0] = 5.0


# -- pair expansion ----------------------------------------------------------

def test_square_pairs():
    got = expand_pairs(Square, WeightedSample.from_pairs([(1, 1), (4, 1)])).as_dict()
    assert got == {(1.0, 1.0): 1.0, (1.0, 4.0): 1.0, (4.0, 1.0): 1.0, (4.0, 4.0): 1.0}


def test_circ_pairs_count_unordered_positions():
    got = expand_pairs(Circ, WeightedSample.from_pairs([(1, 2), (4, 2)])).as_dict()
    assert got == {(1.0, 1.0): 1.0, (1.0, 4.0): 4.0, (4.0, 4.0): 1.0}


def test_circ_unary_signal():
    with pytest.raises(UnaryCase):
        expand_pairs(Circ, WeightedSample.from_pairs([(5, 1)]))


def test_circ_rejects_fractional_weights():
    with pytest.raises(DomainError):
        eval_mean(Circ(P(1), P(0)), WeightedSample.of([1.0, 2.0], [1.5, 1.0]))


# -- mixed means -------------------------------------------------------------

@pytest.mark.parametrize("e, pairs, expected", [
    (Circ(P(1), P(0)), [(1, 1), (4, 1)], 2.0),
    (Circ(P(1), P(0)), [(1, 2), (4, 2)], 13 / 6),
    (Square(P(0), P(1)), [(1, 1), (4, 1)], math.sqrt(5)),
])
def test_mixed_mean_examples(e, pairs, expected):
    assert eval_mean(e, WeightedSample.from_pairs(pairs)) == pytest.approx(expected, rel=1e-14)


def test_unary_circ_is_the_entry():
    assert eval_mean(Circ(P(0), P(-1)), [3.5]) == 3.5


@pytest.mark.parametrize("e, x, m, expected", [
    (P(0), [1, 4], 7, 2.0),
    (Circ(P(1), P(0)), [1, 4], 2, 13 / 6),
    (Square(P(0), P(1)), [1, 4], 3, math.sqrt(5)),
])
def test_repeated_examples(e, x, m, expected):
    assert eval_repeated(e, x, m) == pytest.approx(expected, rel=1e-14)
    assert oracles.repeated(e, x, m) == pytest.approx(expected, rel=1e-12)


def test_nested_mix_matches_enumeration():
    e = Square(Circ(P(0.5), P(-1)), Square(P(0), P(2)))
    x = [0.3, 2.0, 7.0, 1.1]
    assert eval_mean(e, x) == pytest.approx(oracles.mean(e, x), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(mixes(), values)
def test_matches_enumeration(e, xs):
    assert eval_mean(e, xs) == pytest.approx(oracles.mean(e, xs), rel=1e-11)


@settings(max_examples=200, deadline=None)
@given(mixes(), values)
def test_mean_value_property(e, xs):
    v = eval_mean(e, xs)
    assert min(xs) * (1 - 1e-12) <= v <= max(xs) * (1 + 1e-12)


@settings(max_examples=150, deadline=None)
@given(mixes(), values, st.floats(0.01, 100.0), st.randoms(use_true_random=False))
def test_weight_scaling_permutation_and_merge_invariance(e, xs, k, rnd):
    w = [float(rnd.randint(1, 4)) for _ in xs]
    base = eval_mean(e, WeightedSample.of(xs, w))
    if not isinstance(e, Circ):
        assert eval_mean(e, WeightedSample.of(xs, [k * v for v in w])) == pytest.approx(base, rel=1e-11)
    order = list(range(len(xs)))
    rnd.shuffle(order)
    assert eval_mean(e, WeightedSample.of([xs[i] for i in order], [w[i] for i in order])) == pytest.approx(base, rel=1e-11)
    # splitting each entry into unit copies, then merging, must not change the value
    split = WeightedSample.of([v for v, c in zip(xs, w) for _ in range(int(c))])
    assert eval_mean(e, split) == pytest.approx(base, rel=1e-11)


@settings(max_examples=100, deadline=None)
@given(values, exps, exps)
def test_power_mean_monotone_in_exponent(xs, p, q):
    lo, hi = sorted((p, q))
    assert eval_power(lo, xs) <= eval_power(hi, xs) * (1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(1e-2, 1e2), min_size=2, max_size=5), exps, exps)
def test_square_repetition_invariant_and_circ_superinvariant(xs, p, q):
    sq = Square(P(p), P(q))
    assert eval_repeated(sq, xs, 3) == pytest.approx(eval_mean(sq, xs), rel=1e-11)
    if p > q:
        c = Circ(P(p), P(q))
        vals = [eval_repeated(c, xs, m) for m in (1, 2, 4, 8)]
        assert all(a <= b * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
        assert vals[-1] <= eval_mean(sq, xs) * (1 + 1e-12)


def test_merge_tolerance():
    s = WeightedSample.of([1.0, 1.0 + 1e-13, 4.0])
    assert len(s.merged(0.0)) == 3
    assert len(s.merged(1e-12)) == 2
    with pytest.raises(DomainError):
        EvalOptions(merge_tolerance=-1.0)


# -- batches and prefixes ----------------------------------------------------

def test_batch_matches_scalar():
    rng = np.random.default_rng(3)
    X = 10 ** rng.uniform(-3, 3, (40, 5))
    for e in (P(0.5), Square(P(0), P(-1)), Circ(P(1), P(0))):
        got = eval_batch(e, X)
        want = [eval_mean(e, row) for row in X]
        np.testing.assert_allclose(got, want, rtol=1e-13)


@pytest.mark.parametrize("e", [P(0), P(-1), P(0.5), Square(P(0), P(1)), Circ(P(0), P(-1)),
                               Square(P(0.5), P(0)), Circ(Square(P(0), P(1)), P(1))])
def test_prefix_means_match_direct(e):
    x = 1.0 / np.arange(1, 30)
    got = prefix_means(e, x)
    want = [eval_mean(e, x[:k]) for k in range(1, x.size + 1)]
    np.testing.assert_allclose(got, want, rtol=1e-12)


# -- homogenization ----------------------------------------------------------

@pytest.mark.parametrize("e, x, expected", [
    (P(0), [1.0, 0.25], 0.5),
    (Square(P(0), P(1)), [0.25, 1.0], math.sqrt(5) / 4),
    (Circ(P(1), P(0)), [0.3, 0.3, 0.3], 0.3),
])
def test_homogenize_homogeneous(e, x, expected):
    lo, hi = homogenize_estimate(e, x, [1.0, 0.5, 0.25, 0.125])
    assert lo == pytest.approx(expected, rel=1e-13)
    assert hi == pytest.approx(expected, rel=1e-13)


def test_homogenize_rejects_bad_grid():
    with pytest.raises(DomainError):
        homogenize_estimate(P(0), [0.5], [0.5, 1.0])
    with pytest.raises(DomainError):
        homogenize_estimate(P(0), [2.0], [1.0])
