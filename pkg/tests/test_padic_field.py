import cmath
import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from scswalk.padic_field import (
    PRECISION_EXHAUSTED,
    EnumerationBoundError,
    FieldError,
    LaurentSeries,
    PrecisionError,
    add,
    additive_character,
    averaging_expectation_exact,
    min_plus_law_distance,
    mul,
    neg,
    sample_haar_O,
    sample_unit,
)
from scswalk.rng import substream


def series(p, low, digits, exact=False):
    return LaurentSeries.from_digits(p, low, digits, exact)


def test_polynomial_product_mod_3():
    x = series(3, 0, [1, 2], exact=True)
    y = series(3, 0, [2, 1], exact=True)
    assert mul(x, y) == series(3, 0, [2, 2, 2], exact=True)


def test_precision_windows():
    x = series(3, -2, [1, 2, 0, 1])  # known below T^2
    y = series(3, 0, [2, 1, 1])  # known below T^3
    prod = x * y
    assert prod.low == -2 and prod.high == 1
    assert [prod.digit(k) for k in range(-2, 1)] == [2, 2, 0]
    s = add(x, y)
    assert s.low == -2 and s.high == 2
    with pytest.raises(PrecisionError):
        s.digit(2)
    shifted = mul(x, LaurentSeries.monomial(3, 4))
    assert (shifted.low, shifted.high) == (x.low + 4, x.high + 4)


def test_add_neg_gives_zero_window():
    x = series(5, -1, [3, 4, 1])
    z = add(x, neg(x))
    assert z.valuation() is PRECISION_EXHAUSTED
    assert z.high == x.high


def test_valuation():
    assert LaurentSeries.monomial(2, 2).valuation() == 2
    assert LaurentSeries.zero(3, 5).valuation() is PRECISION_EXHAUSTED
    assert series(3, -1, [0, 0, 2]).valuation() == 1


def test_mismatched_primes_and_bad_digits():
    with pytest.raises(FieldError):
        LaurentSeries.one(2) + LaurentSeries.one(3)
    with pytest.raises(FieldError):
        LaurentSeries(3, 0, (3,))
    with pytest.raises(PrecisionError):
        LaurentSeries(3, 0, ())


def test_additive_character():
    assert additive_character(series(3, 0, [1, 2])) == 1
    assert additive_character(LaurentSeries.monomial(3, -1)) == pytest.approx(cmath.exp(2j * math.pi / 3))
    with pytest.raises(PrecisionError):
        additive_character(LaurentSeries.zero(3, -1) + LaurentSeries.monomial(3, -3))


def test_inverse():
    u = series(3, 0, [2, 1, 0, 2, 1])
    prod = u * u.inverse()
    assert prod.agrees_with(LaurentSeries.one(3))
    assert prod.high == 5
    x = series(5, -2, [3, 1, 4])
    assert (x * x.inverse()).agrees_with(LaurentSeries.one(5))


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("v", [-3, -2, -1, 0, 1])
def test_averaging_lemma(p, v):
    x = series(p, v, [1] + [0] * 3)
    want = 1.0 if v >= 0 else 0.0
    assert abs(averaging_expectation_exact(x) - want) < 1e-12


def test_averaging_examples_and_bound():
    assert averaging_expectation_exact(LaurentSeries.one(3)) == 1
    assert abs(averaging_expectation_exact(LaurentSeries.monomial(2, -2))) < 1e-12
    with pytest.raises(EnumerationBoundError):
        averaging_expectation_exact(LaurentSeries.monomial(3, -5), bound=100)


def test_min_plus_examples():
    assert min_plus_law_distance(0, 0, 2, 3) == 0
    assert min_plus_law_distance(1, 0, 3, 3) == 0
    with pytest.raises(EnumerationBoundError):
        min_plus_law_distance(0, 0, 3, 6, bound=1000)


def test_min_plus_detects_a_broken_law():
    """The same enumeration reports a positive distance when the laws differ."""
    # T^1 U alone is not uniform on the window starting at 0.
    assert min_plus_law_distance(1, 1, 2, 3) == 0
    p, high = 2, 3
    counts = Counter()
    for d in itertools.product(range(p), repeat=high - 1):
        counts[(0, *d)] += 1
    tv = sum(abs(Fraction(counts.get(k, 0), p ** (high - 1)) - Fraction(1, p**high))
             for k in itertools.product(range(p), repeat=high)) / 2
    assert tv == Fraction(1, 2)


def test_haar_valuation_law():
    rng = substream(11, 0)
    p, n = 3, 100_000
    digits = rng.integers(0, p, size=(n, 6))
    vals = np.where(digits.any(axis=1), np.argmax(digits != 0, axis=1), 6)
    # reference sampler draws the same digits
    u = sample_haar_O(p, 6, substream(11, 1))
    assert u.low == 0 and u.high == 6
    for k in range(5):
        prob = (1 - 1 / p) * p ** (-k)
        freq = np.mean(vals == k)
        assert abs(freq - prob) <= 4 * math.sqrt(prob * (1 - prob) / n)


def test_haar_sampler_digits_uniform_and_independent():
    rng = substream(12, 0)
    p = 3
    xs = [sample_haar_O(p, 2, rng) for _ in range(20_000)]
    first = np.array([x.digit(0) for x in xs])
    second = np.array([x.digit(1) for x in xs])
    assert stats.chisquare(np.bincount(first, minlength=p)).pvalue > 0.001
    table = np.zeros((p, p))
    np.add.at(table, (first, second), 1)
    assert stats.chi2_contingency(table)[1] > 0.001
    again = [sample_haar_O(p, 2, substream(12, 0)).digits for _ in range(1)]
    assert again[0] == xs[0].digits


def test_units():
    rng = substream(13, 0)
    for _ in range(100):
        u = sample_unit(5, 4, rng)
        assert u.valuation() == 0
    assert sample_unit(2, 3, rng).digit(0) == 1


def test_haar_translation_invariance_exact():
    """Digit law of U + y equals that of U for fixed y in O (enumeration)."""
    p, high = 3, 3
    y = series(p, 0, [2, 0, 1])
    counts = Counter()
    for d in itertools.product(range(p), repeat=high):
        counts[(series(p, 0, d) + y).digits] += 1
    assert set(counts.values()) == {1}
    assert len(counts) == p**high


def laurent(p):
    return st.builds(
        lambda low, digits: LaurentSeries.from_digits(p, low, digits),
        st.integers(-3, 3),
        st.lists(st.integers(0, p - 1), min_size=1, max_size=6),
    )


@settings(max_examples=100, deadline=None)
@given(laurent(3), laurent(3), laurent(3))
def test_ring_axioms(x, y, z):
    assert (x + y).agrees_with(y + x)
    assert (x * y).agrees_with(y * x)
    assert ((x + y) + z).agrees_with(x + (y + z))
    assert ((x * y) * z).agrees_with(x * (y * z))
    assert (x * (y + z)).agrees_with(x * y + x * z)


@settings(max_examples=100, deadline=None)
@given(laurent(5), laurent(5))
def test_valuations(x, y):
    vx, vy = x.valuation(), y.valuation()
    if vx is PRECISION_EXHAUSTED or vy is PRECISION_EXHAUSTED:
        return
    s = x + y
    vs = s.valuation()
    if vs is not PRECISION_EXHAUSTED:
        assert vs >= min(vx, vy)
        if vx != vy:
            assert vs == min(vx, vy)
    elif vx != vy:
        # the sum must still be known at min(vx, vy) to have hidden it
        assert s.high <= min(vx, vy)
    prod = x * y
    vp = prod.valuation()
    if vp is not PRECISION_EXHAUSTED:
        assert vp == vx + vy


@settings(max_examples=100, deadline=None)
@given(laurent(3), laurent(3))
def test_character_is_a_homomorphism(x, y):
    try:
        lhs = additive_character(x + y)
        rhs = additive_character(x) * additive_character(y)
    except PrecisionError:
        return
    assert abs(lhs - rhs) < 1e-12
    assert abs(abs(lhs) - 1) < 1e-12
    assert abs(additive_character(x) * additive_character(-x) - 1) < 1e-12
