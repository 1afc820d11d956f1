from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hciz.errors import DomainError
from hciz.exact_algebra import (
    GradedPolynomial,
    RatN,
    TruncatedSeries,
    format_rational,
    monomial_key_text,
    parse_monomial_key,
    parse_rational,
    series_exp,
    series_log,
    shift_moments,
)

small = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def ratn(draw):
    num = draw(st.lists(small, min_size=0, max_size=3))
    roots = draw(st.lists(st.integers(-3, 3), max_size=2))
    den = RatN.from_factors(roots, [])
    return RatN(tuple(num) or (0,)) / den


@st.composite
def polys(draw):
    terms = draw(st.dictionaries(
        st.tuples(st.tuples(st.integers(0, 2), st.integers(0, 2)), st.tuples(st.integers(0, 2))),
        small, max_size=4))
    return GradedPolynomial(terms)


def test_parse_and_format_rational():
    assert parse_rational("3/6") == Fraction(1, 2)
    assert parse_rational(" -4 ") == -4
    assert format_rational(Fraction(-2, 4)) == "-1/2"
    assert format_rational(7) == "7"
    for bad in ("0.5", "1e3", "", "1/0", "x"):
        with pytest.raises(DomainError):
            parse_rational(bad)


def test_ratn_reduces_common_factors():
    N = RatN.N()
    f = (N * N - 1) / (N - 1)
    assert f == N + 1
    assert f.den == (1,)
    assert ((N + 2) / (2 * N + 4)) == Fraction(1, 2)


def test_ratn_laurent_expansion():
    N = RatN.N()
    f = N ** 4 / (2 * (N * N - 1))
    # N^4 / (2(N^2-1)) = N^2/2 + 1/2 + N^-2/2 + ...
    assert f.laurent_at_infinity(5) == {2: Fraction(1, 2), 1: 0, 0: Fraction(1, 2), -1: 0, -2: Fraction(1, 2)}
    assert f.coefficient_at_infinity(2) == Fraction(1, 2)
    assert f.coefficient_at_infinity(3) == 0
    assert f.degree() == 2
    assert f(3) == Fraction(81, 16)
    assert f.reflect() == f


def test_ratn_pole_and_zero_division():
    N = RatN.N()
    with pytest.raises(ZeroDivisionError):
        (1 / (N - 2))(2)
    with pytest.raises(ZeroDivisionError):
        RatN().inverse()


@given(ratn(), ratn(), ratn())
@settings(max_examples=60, deadline=None)
def test_ratn_field_laws(a, b, c):
    assert a + b == b + a
    assert a * (b + c) == a * b + a * c
    assert (a - a) == 0
    if b:
        assert (a / b) * b == a


@given(ratn(), st.integers(-4, 4))
@settings(max_examples=40, deadline=None)
def test_ratn_evaluation_is_a_homomorphism(a, x):
    b = a * a + 1
    try:
        assert b(x) == a(x) ** 2 + 1
    except ZeroDivisionError:
        pass


def test_graded_polynomial_basics():
    t1, t2 = GradedPolynomial.theta(1), GradedPolynomial.theta(2)
    b1 = GradedPolynomial.thetabar(1)
    p = (t2 - t1 * t1) * b1 * b1
    assert p.coefficient((0, 1), (2,)) == 1
    assert p.coefficient((2,), (2,)) == -1
    assert p.is_graded(2)
    assert not (t1 * b1 * b1).is_graded()
    assert p.derivative(1) == -2 * t1 * b1 * b1
    assert p.derivative(1, bar=True) == 2 * (t2 - t1 * t1) * b1
    assert p.swap().coefficient((2,), (0, 1)) == 1
    assert p.evaluate({1: 2, 2: 3}, {1: Fraction(1, 2)}) == Fraction(-1, 4)
    assert p.substitute({2: t1 * t1}) == GradedPolynomial.zero()


def test_graded_polynomial_drops_zero_terms():
    t1 = GradedPolynomial.theta(1)
    assert not (t1 - t1)
    assert len(GradedPolynomial({((1, 0, 0), ()): Fraction(0)})) == 0
    assert GradedPolynomial({((1, 0), ()): 2}).terms == {((1,), ()): 2}


def test_monomial_key_text_round_trip():
    key = ((0, 1, 2), (1,))
    text = monomial_key_text(key)
    assert text == "t2^1*t3^2|tb1^1"
    assert parse_monomial_key(text) == key
    assert parse_monomial_key("|") == ((), ())
    for bad in ("t1^1", "t0^1|", "t1^0|", "x1^1|", "t1^1*t1^2|", "|t1^1"):
        with pytest.raises(DomainError):
            parse_monomial_key(bad)


@given(polys(), polys(), polys())
@settings(max_examples=60, deadline=None)
def test_polynomial_ring_laws(p, q, r):
    assert p * (q + r) == p * q + p * r
    assert (p * q) * r == p * (q * r)
    assert p - p == GradedPolynomial.zero()
    assert (p * q).swap() == p.swap() * q.swap()


@given(polys())
@settings(max_examples=60, deadline=None)
def test_polynomial_text_round_trip(p):
    assert GradedPolynomial.from_text_terms(p.to_text_terms()) == p


def test_truncated_series_arithmetic():
    x = TruncatedSeries([0, 1], 4)
    one_minus = 1 - x
    inv = TruncatedSeries([1, 1, 1, 1, 1], 4)
    assert (one_minus * inv) == TruncatedSeries([1], 4)
    assert x.shift(2).coeffs == (0, 0, 0, 1, 0)
    assert x.shift(2).shift(-2) == TruncatedSeries([0, 1], 2)
    with pytest.raises(DomainError):
        x.shift(-2)
    assert (x ** 3).valuation() == 3
    with pytest.raises(DomainError):
        TruncatedSeries([1], 2, "a") + TruncatedSeries([1], 2, "b")


def test_series_exp_log():
    x = TruncatedSeries([0, 1], 6)
    e = series_exp(x)
    assert e.coeffs == tuple(Fraction(1, f) for f in (1, 1, 2, 6, 24, 120, 720))
    assert series_log(e) == x
    with pytest.raises(DomainError):
        series_log(TruncatedSeries([2, 1], 3))
    with pytest.raises(DomainError):
        series_exp(TruncatedSeries([1, 1], 3))


@given(st.lists(small, min_size=1, max_size=6))
@settings(max_examples=60, deadline=None)
def test_log_exp_inverse(coeffs):
    x = TruncatedSeries([Fraction(0)] + coeffs, len(coeffs))
    assert series_log(series_exp(x)) == x


def test_shift_moments_constant_and_traceless():
    t1, t2 = GradedPolynomial.theta(1), GradedPolynomial.theta(2)
    # moments of A - c: theta_1 - c, theta_2 - 2c theta_1 + c^2
    shifted = shift_moments(t2, shift=3)
    assert shifted == t2 - 6 * t1 + 9
    traceless = shift_moments(t1)
    assert traceless == GradedPolynomial.zero()
    assert shift_moments(t2) == t2 - t1 * t1
