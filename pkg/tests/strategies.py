"""Hypothesis strategies shared by the test modules."""

from fractions import Fraction

from hypothesis import strategies as st

from genopt.poly import MultiPoly, PolyMap

ints = st.integers(min_value=-10**6, max_value=10**6)
rats = st.fractions(max_denominator=50).filter(lambda q: abs(q) < 10**4)
small = st.integers(min_value=-5, max_value=5)


def exact_elems():
    return st.one_of(ints, rats).map(lambda q: q.numerator if isinstance(q, Fraction) and q.denominator == 1 else q)


@st.composite
def polys(draw, nvars=None, degree=3, coeffs=small):
    n = draw(st.integers(1, 3)) if nvars is None else nvars
    exps = st.tuples(*[st.integers(0, degree)] * n).filter(lambda e: sum(e) <= degree)
    terms = draw(st.dictionaries(exps, coeffs, max_size=5))
    return MultiPoly(n, terms)


@st.composite
def polymaps(draw, dom=None, cod=None, degree=3):
    n = draw(st.integers(1, 3)) if dom is None else dom
    m = draw(st.integers(1, 3)) if cod is None else cod
    return PolyMap(n, [draw(polys(n, degree)) for _ in range(m)])


@st.composite
def matrices(draw, rows=None, cols=None, entries=small):
    r = draw(st.integers(1, 3)) if rows is None else rows
    c = draw(st.integers(1, 3)) if cols is None else cols
    return [[draw(entries) for _ in range(c)] for _ in range(r)]
