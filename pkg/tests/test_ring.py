import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from genopt.ring import (
    QQ, RR, ZZ, DomainMismatch, InvalidElement, Ordering, common_ring, format_scalar, normalize, parse_scalar,
    ring_of, sign,
)

from .strategies import exact_elems


def test_add_examples():
    assert ZZ.add(2, 3) == 5
    assert QQ.add(Fraction(1, 3), Fraction(1, 6)) == Fraction(1, 2)


def test_mul_examples():
    assert ZZ.mul(4, -3) == -12
    assert ZZ.mul(-5, -5) == 25
    assert ZZ.cmp(ZZ.mul(-5, -5), 0) is Ordering.GREATER


def test_cmp_examples():
    assert QQ.cmp(Fraction(1, 2), Fraction(2, 3)) is Ordering.LESS
    assert ZZ.cmp(-7, 0) is Ordering.LESS
    assert QQ.cmp(Fraction(3, 7), Fraction(6, 14)) is Ordering.EQUAL


def test_nan_is_rejected():
    with pytest.raises(InvalidElement):
        RR.cmp(math.nan, 0.0)


def test_kind_mismatch():
    with pytest.raises(DomainMismatch):
        ZZ.add(Fraction(1, 2), 1)
    with pytest.raises(DomainMismatch):
        QQ.add(0.5, Fraction(1, 2))
    with pytest.raises(DomainMismatch):
        common_ring(1, 0.5)


def test_ints_embed_in_rationals():
    assert QQ.add(1, Fraction(1, 2)) == Fraction(3, 2)
    assert common_ring(1, Fraction(1, 2)) is QQ
    assert ring_of(3) is ZZ


def test_bool_is_not_an_element():
    with pytest.raises(InvalidElement):
        ZZ.add(True, 1)


@pytest.mark.parametrize(
    "text, value",
    [("−3", -3), ("7/2", Fraction(7, 2)), ("1.5e-3", Fraction(3, 2000)), ("4/2", 2), (" -12 ", -12)],
)
def test_parse(text, value):
    assert parse_scalar(text) == value
    assert type(parse_scalar(text)) is type(value)


def test_parse_float_mode():
    assert parse_scalar("1.5e−3", exact=False) == 1.5e-3
    with pytest.raises(InvalidElement):
        parse_scalar("banana")
    with pytest.raises(InvalidElement):
        parse_scalar("inf")


def test_format():
    assert format_scalar(Fraction(-7, 2)) == "-7/2"
    assert format_scalar(Fraction(4, 2)) == "2"
    assert format_scalar(0.1) == "0.10000000000000001"


@given(exact_elems())
def test_format_parse_roundtrip(a):
    assert parse_scalar(format_scalar(a)) == a


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_roundtrip(x):
    assert parse_scalar(format_scalar(x), exact=False) == x


@given(exact_elems(), exact_elems(), exact_elems())
def test_ring_axioms(a, b, c):
    R = common_ring(a, b, c)
    assert R.add(R.add(a, b), c) == R.add(a, R.add(b, c))
    assert R.add(a, b) == R.add(b, a)
    assert R.mul(R.mul(a, b), c) == R.mul(a, R.mul(b, c))
    assert R.mul(a, R.add(b, c)) == R.add(R.mul(a, b), R.mul(a, c))
    assert R.sub(R.add(a, b), b) == a
    assert R.add(a, R.zero) == a and R.mul(a, R.one) == a


@given(exact_elems(), exact_elems(), exact_elems())
def test_order_respects_operations(a, b, c):
    R = common_ring(a, b, c)
    if R.cmp(a, b) <= Ordering.EQUAL:
        assert R.cmp(R.add(a, c), R.add(b, c)) <= Ordering.EQUAL
    if a >= 0 and b >= 0:
        assert R.mul(a, b) >= 0
    assert R.cmp(R.mul(a, a), R.zero) >= Ordering.EQUAL


@given(exact_elems())
def test_rationals_reduced(a):
    q = Fraction(a)
    assert q.denominator > 0 and math.gcd(q.numerator, q.denominator) == 1
    assert type(normalize(q)) is (int if q.denominator == 1 else Fraction)


def test_sign():
    assert [sign(-3), sign(0), sign(Fraction(1, 9)), sign(-0.5)] == [-1, 0, 1, -1]
