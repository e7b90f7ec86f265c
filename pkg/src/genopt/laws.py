"""Randomized checks of the reverse-derivative, differential and
left-additive axioms on the polynomial and smooth instances.

Each axiom is assembled from the generic combinators in :mod:`category`
exactly as written, then both sides are compared: structurally for
polynomials, at 20 quasi-random points for smooth maps.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import smooth
from .category import (
    forward_derivative as D,
    interchange,
    iota0,
    iota1,
    pair,
    product,
)
from .poly import MultiPoly, PolyMap

RD_LAWS = tuple(f"RD.{i}" for i in range(1, 8))
CDC_LAWS = tuple(f"CDC.{i}" for i in range(1, 8))
LEFT_ADDITIVE = "CLA"
ALL_LAWS = RD_LAWS + CDC_LAWS + (LEFT_ADDITIVE,)

# laws whose cost grows with a triple (or deeper) reverse
HEAVY = {"RD.6": 50, "RD.7": 50}


@dataclass
class Instance:
    """A reverse-derivative category plus a random morphism generator."""

    name: str
    cls: type
    random_map: Callable  # (rng, dom, cod, depth) -> morphism
    max_obj: int = 3

    def equal(self, f, g) -> bool:
        if self.cls is PolyMap:
            return f == g
        return smooth.numerically_equal(f, g, count=20, tol=1e-9)

    def obj(self, rng, lo: int = 1) -> int:
        return int(rng.integers(lo, self.max_obj + 1))


def random_poly(rng, nvars: int, degree: int = 3, coeff=None, max_terms: int = 4) -> MultiPoly:
    """Sparse random polynomial: a few monomials of total degree <= ``degree``."""
    coeff = coeff or (lambda r: int(r.integers(-5, 6)))
    terms: dict = {}
    for _ in range(int(rng.integers(0, max_terms + 1))):
        d = int(rng.integers(0, degree + 1))
        e = [0] * nvars
        if nvars:
            for i in rng.integers(0, nvars, size=d):
                e[int(i)] += 1
        key = tuple(e)
        terms[key] = terms.get(key, 0) + coeff(rng)
    return MultiPoly(nvars, terms)


def _rat(rng):
    return Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 6)))


def random_polymap(rng, dom: int, cod: int, depth: int = 3, coeff=None) -> PolyMap:
    return PolyMap(dom, [random_poly(rng, dom, depth, coeff) for _ in range(cod)])


INSTANCES = {
    "poly-int": Instance("poly-int", PolyMap, random_polymap),
    "poly-rat": Instance(
        "poly-rat", PolyMap, lambda rng, n, m, d=3: random_polymap(rng, n, m, d, coeff=_rat)
    ),
    "smooth": Instance("smooth", smooth.ExprMap, lambda rng, n, m, d=3: smooth.random_map(rng, n, m, d)),
}


@dataclass
class LawReport:
    law: str
    instance: str
    cases: int
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    @classmethod
    def from_json(cls, data) -> LawReport:
        if isinstance(data, str):
            data = json.loads(data)
        return cls(data["law"], data["instance"], data["cases"], list(data["failures"]))


# each builder returns [(label, lhs, rhs, morphisms-for-the-record)]

def _rd1(I, rng):
    n, m = I.obj(rng), I.obj(rng)
    f, g = I.random_map(rng, n, m), I.random_map(rng, n, m)
    zero = I.cls.zero(n, m)
    return [
        ("R[f+g] = R[f]+R[g]", (f + g).reverse(), f.reverse() + g.reverse(), (f, g)),
        ("R[0] = 0", zero.reverse(), I.cls.zero(n + m, n), ()),
    ]


def _rd2(I, rng):
    n, m, k = I.obj(rng), I.obj(rng), I.obj(rng)
    f = I.random_map(rng, n, m)
    a = I.random_map(rng, k, n, 2)
    b, c = I.random_map(rng, k, m, 2), I.random_map(rng, k, m, 2)
    Rf = f.reverse()
    return [
        ("R[f]<a,b+c> = R[f]<a,b> + R[f]<a,c>", Rf @ pair(a, b + c), Rf @ pair(a, b) + Rf @ pair(a, c), (f, a, b, c)),
        ("R[f]<a,0> = 0", Rf @ pair(a, I.cls.zero(k, m)), I.cls.zero(k, n), (f, a)),
    ]


def _rd3(I, rng):
    C = I.cls
    n, a, b = I.obj(rng), I.obj(rng, 0), I.obj(rng, 0)
    return [
        ("R[1] = pi1", C.identity(n).reverse(), C.proj1(n, n), ()),
        ("R[pi0] = iota0 pi1", C.proj0(a, b).reverse(), iota0(C, a, b) @ C.proj1(a + b, a), ()),
        ("R[pi1] = iota1 pi1", C.proj1(a, b).reverse(), iota1(C, a, b) @ C.proj1(a + b, b), ()),
    ]


def _rd4(I, rng):
    C = I.cls
    n, m1, m2 = I.obj(rng), I.obj(rng), I.obj(rng)
    f, g = I.random_map(rng, n, m1), I.random_map(rng, n, m2)
    rhs = f.reverse() @ product(C.identity(n), C.proj0(m1, m2)) + g.reverse() @ product(
        C.identity(n), C.proj1(m1, m2)
    )
    return [
        ("R[<f,g>] = R[f](1 x pi0) + R[g](1 x pi1)", pair(f, g).reverse(), rhs, (f, g)),
        ("R[!] = 0", C.zero(n, 0).reverse(), C.zero(n, n), ()),
    ]


def _rd5(I, rng):
    C = I.cls
    n, m, p = I.obj(rng), I.obj(rng), I.obj(rng)
    f, g = I.random_map(rng, n, m), I.random_map(rng, m, p)
    shuffle = pair(C.proj0(n, p), pair(f @ C.proj0(n, p), C.proj1(n, p)))
    rhs = f.reverse() @ product(C.identity(n), g.reverse()) @ shuffle
    return [("R[g f] = R[f](1 x R[g])<pi0, <f pi0, pi1>>", (g @ f).reverse(), rhs, (f, g))]


def _rd6(I, rng):
    C = I.cls
    a, b = I.obj(rng), I.obj(rng)
    f = I.random_map(rng, a, b)
    rrr = f.reverse().reverse().reverse()
    spread = pair(product(C.identity(a), C.proj0(b, b)), product(C.zero(a, a), C.proj1(b, b)))
    lhs = C.proj1(a + b, a) @ rrr @ product(iota0(C, a + b, a), C.identity(a + b)) @ spread
    rhs = f.reverse() @ product(C.identity(a), C.proj1(b, b))
    return [("pi1 R[R[R[f]]](iota0 x 1)<1 x pi0, 0 x pi1> = R[f](1 x pi1)", lhs, rhs, (f,))]


def _rd7(I, rng):
    C = I.cls
    a, b = I.obj(rng), I.obj(rng)
    f = I.random_map(rng, a, b)
    inner = C.proj1(a, b) @ f.reverse().reverse() @ product(iota0(C, a, b), C.identity(a))
    side = C.proj1(2 * a, b) @ inner.reverse().reverse() @ product(iota0(C, 2 * a, b), C.identity(2 * a))
    # the interchange map acts on the input pair of pairs
    return [("symmetry of the doubled reverse under interchange", side, side @ interchange(C, a, a, a, a), (f,))]


def _cdc1(I, rng):
    n, m = I.obj(rng), I.obj(rng)
    f, g = I.random_map(rng, n, m), I.random_map(rng, n, m)
    return [
        ("D[f+g] = D[f]+D[g]", D(f + g), D(f) + D(g), (f, g)),
        ("D[0] = 0", D(I.cls.zero(n, m)), I.cls.zero(2 * n, m), ()),
    ]


def _cdc2(I, rng):
    n, m, k = I.obj(rng), I.obj(rng), I.obj(rng)
    f = I.random_map(rng, n, m)
    a, b, c = (I.random_map(rng, k, n, 2) for _ in range(3))
    Df = D(f)
    return [
        ("D[f]<a,b+c> = D[f]<a,b> + D[f]<a,c>", Df @ pair(a, b + c), Df @ pair(a, b) + Df @ pair(a, c), (f, a, b, c)),
        ("D[f]<a,0> = 0", Df @ pair(a, I.cls.zero(k, n)), I.cls.zero(k, m), (f, a)),
    ]


def _cdc3(I, rng):
    C = I.cls
    n, a, b = I.obj(rng), I.obj(rng, 0), I.obj(rng, 0)
    return [
        ("D[1] = pi1", D(C.identity(n)), C.proj1(n, n), ()),
        ("D[pi0] = pi0 pi1", D(C.proj0(a, b)), C.proj0(a, b) @ C.proj1(a + b, a + b), ()),
        ("D[pi1] = pi1 pi1", D(C.proj1(a, b)), C.proj1(a, b) @ C.proj1(a + b, a + b), ()),
    ]


def _cdc4(I, rng):
    n, m1, m2 = I.obj(rng), I.obj(rng), I.obj(rng)
    f, g = I.random_map(rng, n, m1), I.random_map(rng, n, m2)
    return [("D[<f,g>] = <D[f], D[g]>", D(pair(f, g)), pair(D(f), D(g)), (f, g))]


def _cdc5(I, rng):
    C = I.cls
    n, m, p = I.obj(rng), I.obj(rng), I.obj(rng)
    f, g = I.random_map(rng, n, m), I.random_map(rng, m, p)
    return [("D[g f] = D[g]<f pi0, D[f]>", D(g @ f), D(g) @ pair(f @ C.proj0(n, n), D(f)), (f, g))]


def _cdc6(I, rng):
    n, m, k = I.obj(rng), I.obj(rng), I.obj(rng)
    f = I.random_map(rng, n, m)
    a, b, c = (I.random_map(rng, k, n, 2) for _ in range(3))
    DDf = D(D(f))
    lhs = DDf @ pair(pair(a, b), pair(I.cls.zero(k, n), c))
    return [("D[D[f]]<<a,b>,<0,c>> = D[f]<a,c>", lhs, D(f) @ pair(a, c), (f, a, b, c))]


def _cdc7(I, rng):
    n, m, k = I.obj(rng), I.obj(rng), I.obj(rng)
    f = I.random_map(rng, n, m)
    a, b, c, d = (I.random_map(rng, k, n, 2) for _ in range(4))
    DDf = D(D(f))
    return [
        (
            "D[D[f]]<<a,b>,<c,d>> = D[D[f]]<<a,c>,<b,d>>",
            DDf @ pair(pair(a, b), pair(c, d)),
            DDf @ pair(pair(a, c), pair(b, d)),
            (f, a, b, c, d),
        )
    ]


def _left_additive(I, rng):
    C = I.cls
    a, b, c0, c1 = I.obj(rng), I.obj(rng), I.obj(rng), I.obj(rng)
    c = c0 + c1
    f, g = I.random_map(rng, b, c), I.random_map(rng, b, c)
    h = I.random_map(rng, a, b)
    p0, p1 = C.proj0(c0, c1), C.proj1(c0, c1)
    return [
        ("(f+g)h = fh + gh", (f + g) @ h, f @ h + g @ h, (f, g, h)),
        ("0 h = 0", C.zero(b, c) @ h, C.zero(a, c), (h,)),
        ("pi0(f+g) = pi0 f + pi0 g", p0 @ (f + g), p0 @ f + p0 @ g, (f, g)),
        ("pi1(f+g) = pi1 f + pi1 g", p1 @ (f + g), p1 @ f + p1 @ g, (f, g)),
        ("pi0 0 = 0", p0 @ C.zero(b, c), C.zero(b, c0), ()),
    ]


BUILDERS = {
    "RD.1": _rd1, "RD.2": _rd2, "RD.3": _rd3, "RD.4": _rd4, "RD.5": _rd5, "RD.6": _rd6, "RD.7": _rd7,
    "CDC.1": _cdc1, "CDC.2": _cdc2, "CDC.3": _cdc3, "CDC.4": _cdc4, "CDC.5": _cdc5, "CDC.6": _cdc6,
    "CDC.7": _cdc7, LEFT_ADDITIVE: _left_additive,
}


def _describe(morphisms) -> list[str]:
    out = []
    for m in morphisms:
        if isinstance(m, PolyMap):
            out.append(f"{m.dom}->{m.cod}: {m}")
        else:
            out.append(json.dumps(m.to_json()))
    return out


def check_law(law: str, instance: str | Instance = "poly-int", cases: int = 100, seed: int = 0) -> LawReport:
    """Run ``cases`` random instances of one law; deterministic in ``seed``.

    Case i draws from its own generator seeded by (seed, i), so the report
    does not depend on the order cases are run in.
    """
    if law not in BUILDERS:
        raise KeyError(f"unknown law {law!r}; expected one of {', '.join(ALL_LAWS)}")
    if cases < 1:
        raise ValueError("cases must be >= 1")
    I = INSTANCES[instance] if isinstance(instance, str) else instance
    cases = min(cases, HEAVY.get(law, cases))
    failures = []
    for i in range(cases):
        rng = np.random.default_rng([seed, i])
        for label, lhs, rhs, used in BUILDERS[law](I, rng):
            if not I.equal(lhs, rhs):
                failures.append({"case": i, "equation": label, "morphisms": _describe(used)})
    return LawReport(law, I.name, cases, failures)


def check_rd_axiom(law: str, instance="poly-int", cases: int = 100, seed: int = 0) -> LawReport:
    if law not in RD_LAWS:
        raise KeyError(f"{law!r} is not one of {RD_LAWS}")
    return check_law(law, instance, cases, seed)


def check_cdc_axiom(law: str, instance="poly-int", cases: int = 100, seed: int = 0) -> LawReport:
    if law not in CDC_LAWS:
        raise KeyError(f"{law!r} is not one of {CDC_LAWS}")
    return check_law(law, instance, cases, seed)


def check_left_additive(instance="poly-int", cases: int = 100, seed: int = 0) -> LawReport:
    return check_law(LEFT_ADDITIVE, instance, cases, seed)


def check_all(instance="poly-int", cases: int = 100, seed: int = 0) -> list[LawReport]:
    return [check_law(law, instance, cases, seed) for law in ALL_LAWS]
