"""Scalar rings used by the two optimization domains.

Exact elements are plain Python ``int`` (the integers) and
``fractions.Fraction`` (the rationals); the standard domain uses ``float``.
A :class:`Ring` bundles the kind checks, ordering and text conversion for
one of these.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

RingElem = Union[int, Fraction, float]


class DomainMismatch(TypeError):
    pass


class InvalidElement(ValueError):
    pass


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def kind_of(x) -> str:
    # bool is an int subclass but never a ring element here
    if isinstance(x, bool):
        raise InvalidElement(f"not a ring element: {x!r}")
    if isinstance(x, int):
        return "int"
    if isinstance(x, Fraction):
        return "rat"
    if isinstance(x, float):
        return "float"
    raise InvalidElement(f"not a ring element: {x!r}")


@dataclass(frozen=True)
class Ring:
    """An ordered commutative ring of one element kind."""

    name: str
    kind: str  # "int" | "rat" | "float"

    @property
    def zero(self) -> RingElem:
        return self.coerce(0)

    @property
    def one(self) -> RingElem:
        return self.coerce(1)

    @property
    def exact(self) -> bool:
        return self.kind != "float"

    def coerce(self, x) -> RingElem:
        if isinstance(x, str):
            return self.parse(x)
        if self.kind == "int":
            if isinstance(x, Fraction) and x.denominator == 1:
                return int(x.numerator)
            if isinstance(x, int) and not isinstance(x, bool):
                return x
            raise DomainMismatch(f"{x!r} is not an integer")
        if self.kind == "rat":
            if isinstance(x, float):
                raise DomainMismatch(f"refusing to coerce float {x!r} to a rational")
            return Fraction(x)
        return float(x)

    def check(self, x) -> RingElem:
        k = kind_of(x)
        if k == self.kind:
            return x
        # integers embed in the rationals
        if self.kind == "rat" and k == "int":
            return Fraction(x)
        raise DomainMismatch(f"{x!r} ({k}) is not an element of {self.name}")

    def add(self, a, b) -> RingElem:
        return self.check(a) + self.check(b)

    def neg(self, a) -> RingElem:
        return -self.check(a)

    def sub(self, a, b) -> RingElem:
        return self.check(a) - self.check(b)

    def mul(self, a, b) -> RingElem:
        return self.check(a) * self.check(b)

    def cmp(self, a, b) -> Ordering:
        a, b = self.check(a), self.check(b)
        if self.kind == "float" and (math.isnan(a) or math.isnan(b)):
            raise InvalidElement("NaN has no place in a total order")
        if a < b:
            return Ordering.LESS
        if a > b:
            return Ordering.GREATER
        return Ordering.EQUAL

    def parse(self, text: str) -> RingElem:
        return self.coerce(parse_scalar(text, exact=self.exact))

    def format(self, x) -> str:
        return format_scalar(self.check(x))


ZZ = Ring("ZZ", "int")
QQ = Ring("QQ", "rat")
RR = Ring("RR", "float")

RINGS = {"int": ZZ, "rat": QQ, "float": RR}


def ring_of(x) -> Ring:
    return RINGS[kind_of(x)]


def common_ring(*xs) -> Ring:
    """Smallest ring holding all of ``xs``; ints embed in rationals only."""
    kinds = {kind_of(x) for x in xs}
    if not kinds or kinds == {"int"}:
        return ZZ
    if kinds <= {"int", "rat"}:
        return QQ
    if kinds == {"float"}:
        return RR
    raise DomainMismatch(f"cannot mix exact and float elements: {sorted(kinds)}")


_FRACTION = re.compile(r"^\s*([+-]?\d+)\s*/\s*(\d+)\s*$")
_INTEGER = re.compile(r"^\s*[+-]?\d+\s*$")


def parse_scalar(text: str, exact: bool = True) -> RingElem:
    """Parse ``"-3"``, ``"7/2"`` or ``"1.5e-3"``.

    Unicode minus signs are accepted. With ``exact`` a decimal literal
    becomes the equal ``Fraction``; otherwise a float.
    """
    s = text.replace("−", "-").strip()
    if _INTEGER.match(s):
        return int(s)
    m = _FRACTION.match(s)
    if m:
        q = Fraction(int(m.group(1)), int(m.group(2)))
        return q.numerator if q.denominator == 1 else q
    try:
        f = float(s)
    except ValueError:
        raise InvalidElement(f"cannot parse scalar {text!r}") from None
    if exact:
        if not math.isfinite(f):
            raise InvalidElement(f"non-finite value {text!r} in an exact ring")
        q = Fraction(s)
        return q.numerator if q.denominator == 1 else q
    return f


def format_scalar(x) -> str:
    """Exact text for ints/rationals, 17 significant digits for floats."""
    if isinstance(x, float):
        return repr(x) if not math.isfinite(x) else f"{x:.17g}"
    if isinstance(x, Rational):
        x = Fraction(x)
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    raise InvalidElement(f"not a ring element: {x!r}")


def normalize(x) -> RingElem:
    """Collapse integral Fractions to int so hashing and printing agree."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x.numerator)
    return x


def sign(x) -> int:
    return (x > 0) - (x < 0)
