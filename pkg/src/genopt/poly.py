"""Multivariate polynomials over an ordered ring and the category Poly_R.

Objects are natural numbers; a morphism n -> m is a tuple of m polynomials
in n variables. Coefficients are ints or Fractions and every operation keeps
terms in canonical form (no zero coefficients), so morphism equality is
plain structural equality.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping, Sequence

from . import category
from .ring import format_scalar, normalize, parse_scalar

Exponent = tuple


class ArityError(ValueError):
    pass


class NotLinear(ValueError):
    pass


def _canon(terms: Mapping) -> dict:
    out = {}
    for e, c in terms.items():
        if c:
            out[tuple(e)] = normalize(c)
    return out


class MultiPoly:
    """Polynomial in ``nvars`` variables stored as exponent-tuple -> coeff."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping | None = None, *, _trusted=False):
        self.nvars = nvars
        if _trusted:
            self.terms = terms
        else:
            self.terms = _canon(terms or {})
            for e in self.terms:
                if len(e) != nvars or min(e, default=0) < 0:
                    raise ValueError(f"bad exponent {e} for {nvars} variables")
        self._hash = None

    # constructors
    @classmethod
    def const(cls, nvars: int, c) -> MultiPoly:
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int, coeff=1) -> MultiPoly:
        if not 0 <= i < nvars:
            raise ArityError(f"variable index {i} out of range for {nvars} variables")
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): coeff})

    @classmethod
    def zero(cls, nvars: int) -> MultiPoly:
        return cls(nvars, {}, _trusted=True)

    # structure
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, 0)

    def coefficients(self):
        return list(self.terms.values())

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"MultiPoly({self.nvars}, {format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)

    # arithmetic
    def _check(self, other):
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars:
                raise ArityError(f"{self.nvars} vs {other.nvars} variables")
            return other
        return MultiPoly.const(self.nvars, other)

    def __add__(self, other):
        other = self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = normalize(v)
            else:
                out.pop(e, None)
        return MultiPoly(self.nvars, out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def scale(self, c) -> MultiPoly:
        if not c:
            return MultiPoly.zero(self.nvars)
        return MultiPoly(self.nvars, {e: normalize(v * c) for e, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        other = self._check(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly(self.nvars, _canon(out), _trusted=True)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = MultiPoly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __call__(self, point: Sequence):
        if len(point) != self.nvars:
            raise ArityError(f"expected {self.nvars} values, got {len(point)}")
        total = 0
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v = v * x**k
            total = total + v
        return normalize(total) if not isinstance(total, float) else total

    def partial(self, j: int) -> MultiPoly:
        """Formal derivative in variable ``j`` (0-based)."""
        if not 0 <= j < self.nvars:
            raise ArityError(f"variable index {j} out of range for {self.nvars} variables")
        out = {}
        for e, c in self.terms.items():
            k = e[j]
            if k:
                out[e[:j] + (k - 1,) + e[j + 1 :]] = normalize(c * k)
        return MultiPoly(self.nvars, out, _trusted=True)

    def extend(self, total: int, offset: int = 0) -> MultiPoly:
        """Re-home the variables into a ``total``-variable ring starting at ``offset``."""
        pre = (0,) * offset
        post = (0,) * (total - offset - self.nvars)
        return MultiPoly(total, {pre + e + post: c for e, c in self.terms.items()}, _trusted=True)

    def substitute(self, args: Sequence[MultiPoly], nvars: int | None = None) -> MultiPoly:
        """Plug ``args[i]`` in for variable i; all args share one variable count."""
        if len(args) != self.nvars:
            raise ArityError(f"need {self.nvars} arguments, got {len(args)}")
        k = nvars if nvars is not None else (args[0].nvars if args else 0)
        if args:
            if any(a.nvars != k for a in args):
                raise ArityError("substituted polynomials disagree on variable count")
        if not self.terms:
            return MultiPoly.zero(k)
        monomial = _monomial_args(args, k)
        if monomial is not None:
            return self._substitute_monomials(monomial, k)
        powers: list[dict] = [{0: MultiPoly.const(k, 1), 1: a} for a in args]

        def pw(i, e):
            cache = powers[i]
            if e not in cache:
                cache[e] = pw(i, e - 1) * args[i]
            return cache[e]

        out: dict = {}
        for e, c in self.terms.items():
            prod = None
            for i, ei in enumerate(e):
                if ei:
                    p = pw(i, ei)
                    prod = p if prod is None else prod * p
            if prod is None:
                key = (0,) * k
                out[key] = out.get(key, 0) + c
                continue
            for pe, pc in prod.terms.items():
                out[pe] = out.get(pe, 0) + c * pc
        return MultiPoly(k, _canon(out), _trusted=True)

    def _substitute_monomials(self, monomial, k):
        out: dict = {}
        for e, c in self.terms.items():
            new = [0] * k
            coeff = c
            for i, ei in enumerate(e):
                if not ei:
                    continue
                mi = monomial[i]
                if mi is None:
                    coeff = 0
                    break
                me, mc = mi
                if mc != 1:
                    coeff = coeff * mc**ei
                for j, v in enumerate(me):
                    if v:
                        new[j] += v * ei
            if coeff:
                key = tuple(new)
                out[key] = out.get(key, 0) + coeff
        return MultiPoly(k, _canon(out), _trusted=True)


def _monomial_args(args, k):
    """If every arg is zero or a single monomial, return (exp, coeff)/None per arg."""
    result = []
    for a in args:
        if not a.terms:
            result.append(None)
        elif len(a.terms) == 1:
            ((e, c),) = a.terms.items()
            result.append((e, c))
        else:
            return None
    return result


class PolyMap:
    """A morphism n -> m of Poly_R: a tuple of m polynomials in n variables."""

    __slots__ = ("dom", "cod", "comps")

    def __init__(self, dom: int, comps: Iterable[MultiPoly]):
        comps = tuple(comps)
        for p in comps:
            if p.nvars != dom:
                raise ArityError(f"component has {p.nvars} variables, map domain is {dom}")
        self.dom = dom
        self.cod = len(comps)
        self.comps = comps

    # constructors
    @classmethod
    def identity(cls, n: int) -> PolyMap:
        return cls(n, [MultiPoly.var(n, i) for i in range(n)])

    @classmethod
    def proj0(cls, a: int, b: int) -> PolyMap:
        return cls(a + b, [MultiPoly.var(a + b, i) for i in range(a)])

    @classmethod
    def proj1(cls, a: int, b: int) -> PolyMap:
        return cls(a + b, [MultiPoly.var(a + b, a + i) for i in range(b)])

    @classmethod
    def zero(cls, n: int, m: int) -> PolyMap:
        return cls(n, [MultiPoly.zero(n)] * m)

    @classmethod
    def constant(cls, n: int, values: Sequence) -> PolyMap:
        return cls(n, [MultiPoly.const(n, v) for v in values])

    @classmethod
    def linear(cls, matrix: Sequence[Sequence], ncols: int | None = None) -> PolyMap:
        """x -> M x for an m x n matrix (given as rows)."""
        rows = [list(r) for r in matrix]
        n = ncols if ncols is not None else (len(rows[0]) if rows else 0)
        comps = []
        for r in rows:
            if len(r) != n:
                raise ArityError("ragged matrix")
            terms = {}
            for j, v in enumerate(r):
                e = [0] * n
                e[j] = 1
                terms[tuple(e)] = v
            comps.append(MultiPoly(n, terms))
        return cls(n, comps)

    @classmethod
    def parse(cls, text: str, nvars: int | None = None) -> PolyMap:
        parts = [s for s in text.split(";")]
        polys = [parse_poly(s) for s in parts]
        n = max([p.nvars for p in polys] + [nvars or 0])
        if nvars is not None and n > nvars:
            raise ArityError(f"text uses {n} variables, more than {nvars}")
        return cls(n, [p.extend(n) for p in polys])

    # morphism structure
    def __matmul__(self, other: PolyMap) -> PolyMap:
        if not isinstance(other, PolyMap):
            return NotImplemented
        if other.cod != self.dom:
            raise ArityError(f"cannot compose {self.dom}->{self.cod} after {other.dom}->{other.cod}")
        return PolyMap(other.dom, [p.substitute(other.comps, other.dom) for p in self.comps])

    def pair(self, other: PolyMap) -> PolyMap:
        if other.dom != self.dom:
            raise ArityError(f"pairing maps out of {self.dom} and {other.dom}")
        return PolyMap(self.dom, self.comps + other.comps)

    def _same_type(self, other):
        if not isinstance(other, PolyMap) or (other.dom, other.cod) != (self.dom, self.cod):
            raise ArityError("hom-set mismatch")

    def __add__(self, other):
        self._same_type(other)
        return PolyMap(self.dom, [p + q for p, q in zip(self.comps, other.comps)])

    def __sub__(self, other):
        self._same_type(other)
        return PolyMap(self.dom, [p - q for p, q in zip(self.comps, other.comps)])

    def __neg__(self):
        return PolyMap(self.dom, [-p for p in self.comps])

    def scale(self, c) -> PolyMap:
        return PolyMap(self.dom, [p.scale(c) for p in self.comps])

    def __mul__(self, other):
        """Pointwise product (the ring structure on hom-sets)."""
        if isinstance(other, PolyMap):
            self._same_type(other)
            return PolyMap(self.dom, [p * q for p, q in zip(self.comps, other.comps)])
        return self.scale(other)

    __rmul__ = scale

    def __eq__(self, other):
        if not isinstance(other, PolyMap):
            return NotImplemented
        return self.dom == other.dom and self.comps == other.comps

    def __hash__(self):
        return hash((self.dom, self.comps))

    def __call__(self, point: Sequence) -> list:
        if len(point) != self.dom:
            raise ArityError(f"expected {self.dom} values, got {len(point)}")
        return [p(point) for p in self.comps]

    def __getitem__(self, i) -> MultiPoly:
        return self.comps[i]

    def __repr__(self):
        return f"PolyMap({self.dom}->{self.cod}: {format_map(self)!r})"

    def __str__(self):
        return format_map(self)

    def degree(self) -> int:
        return max((p.degree() for p in self.comps), default=-1)

    def reverse(self) -> PolyMap:
        """R[P](x, x') = (sum_i dp_i/dx_j (x) x'_i)_j : n + m -> n."""
        n, m = self.dom, self.cod
        total = n + m
        out = [dict() for _ in range(n)]
        for i, p in enumerate(self.comps):
            for e, c in p.terms.items():
                for j in range(n):
                    k = e[j]
                    if not k:
                        continue
                    key = e[:j] + (k - 1,) + e[j + 1 :] + (0,) * i + (1,) + (0,) * (m - i - 1)
                    acc = out[j]
                    acc[key] = acc.get(key, 0) + c * k
        return PolyMap(total, [MultiPoly(total, _canon(t), _trusted=True) for t in out])

    def is_linear(self) -> bool:
        return all(sum(e) == 1 for p in self.comps for e in p.terms)

    def matrix(self) -> list[list]:
        """Coefficient matrix of a linear map; raises NotLinear otherwise."""
        if not self.is_linear():
            raise NotLinear("map has non-linear terms or a constant offset")
        rows = []
        for p in self.comps:
            row = [0] * self.dom
            for e, c in p.terms.items():
                row[e.index(1)] = c
            rows.append(row)
        return rows


def formal_partial(p: MultiPoly, j: int) -> MultiPoly:
    return p.partial(j)


def compose(g: PolyMap, f: PolyMap) -> PolyMap:
    return g @ f


def reverse_derivative(P: PolyMap) -> PolyMap:
    return P.reverse()


def forward_derivative(P: PolyMap) -> PolyMap:
    return category.forward_derivative(P)


def generalized_gradient(l: PolyMap) -> PolyMap:
    return category.generalized_gradient(l)


def generalized_n_derivative(f: PolyMap, n: int) -> PolyMap:
    if f.dom != 1 or f.cod != 1:
        raise ArityError(f"n-derivative is defined here for 1 -> 1 maps, got {f.dom}->{f.cod}")
    return category.generalized_n_derivative(f, n)


def jvp(P: PolyMap) -> PolyMap:
    """Directly computed sum_j dp_i/dx_j(x) v_j : n + n -> m (oracle for D)."""
    n = P.dom
    xs = [MultiPoly.var(2 * n, j) for j in range(n)]
    vs = [MultiPoly.var(2 * n, n + j) for j in range(n)]
    comps = []
    for p in P.comps:
        acc = MultiPoly.zero(2 * n)
        for j in range(n):
            acc = acc + p.partial(j).substitute(xs) * vs[j]
        comps.append(acc)
    return PolyMap(2 * n, comps)


def dagger(f: PolyMap) -> PolyMap:
    """Transpose of a linear map."""
    rows = f.matrix()
    return PolyMap.linear([[rows[i][j] for i in range(f.cod)] for j in range(f.dom)], ncols=f.cod)


def inverse_matrix(rows: Sequence[Sequence]) -> list[list]:
    """Exact inverse over the rationals by Gauss-Jordan elimination."""
    n = len(rows)
    a = [[Fraction(v) for v in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [[normalize(v) for v in row[n:]] for row in a]


def inverse_linear(f: PolyMap) -> PolyMap:
    if f.dom != f.cod:
        raise NotLinear("only square linear maps are invertible")
    return PolyMap.linear(inverse_matrix(f.matrix()))


def taylor_coefficients(f: PolyMap, t1) -> list:
    """c'_k with f(t) = sum_k c'_k (t - t1)^k, from the binomial expansion."""
    if f.dom != 1 or f.cod != 1:
        raise ArityError("univariate map expected")
    p = f.comps[0]
    shifted = p.substitute([MultiPoly.var(1, 0) + t1])
    deg = max(p.degree(), 0)
    return [shifted.terms.get((k,), 0) for k in range(deg + 1)]


def is_n_smooth_witness(f: PolyMap, n: int, t1, t2, samples: Sequence) -> dict:
    """Sampled check of the n-smoothness implication on [t1, t2].

    Returns a report with ``status`` in {"pass", "fail", "not applicable"}.
    "not applicable" means some sampled D_k[f](t) was negative, so the
    implication is vacuous there. The binomial coefficients c'_k and the
    identity c'_k * k! == D_k[f](t1) are always included.
    """
    if t1 > t2:
        raise ValueError("t1 must not exceed t2")
    if f.dom != 1 or f.cod != 1:
        raise ArityError("univariate map expected")
    derivs = [generalized_n_derivative(f, k) for k in range(1, n + 1)]
    points = [t for t in samples if t1 <= t <= t2]
    negative = [
        {"k": k, "t": t, "value": d([t])[0]}
        for k, d in enumerate(derivs, start=1)
        for t in points
        if d([t])[0] < 0
    ]
    coeffs = taylor_coefficients(f, t1)
    binomial_ok = all(
        coeffs[k] * factorial(k) == (derivs[k - 1]([t1])[0] if k <= n else None)
        for k in range(1, min(len(coeffs), n + 1))
    )
    lo, hi = f([t1])[0], f([t2])[0]
    report = {
        "n": n,
        "t1": t1,
        "t2": t2,
        "samples": points,
        "coefficients": coeffs,
        "binomial_identity": binomial_ok,
        "certificate": f.degree() <= n and all(d([t1])[0] >= 0 for d in derivs),
        "f_t1": lo,
        "f_t2": hi,
        "violations": negative,
    }
    if negative:
        report["status"] = "not applicable"
    else:
        report["status"] = "pass" if lo <= hi else "fail"
    return report


# text grammar ---------------------------------------------------------------

_TERM_SPLIT = re.compile(r"\s*(?<!\d[eE])([+-])\s*")
_FACTOR = re.compile(r"^x(\d+)(?:\^(\d+))?$")


def parse_poly(text: str, nvars: int | None = None) -> MultiPoly:
    """Parse ``3*x1^2*x2 - 4*x3 + 7`` (variables are 1-based)."""
    s = text.replace("−", "-").replace("**", "^").strip()
    if not s:
        raise ValueError("empty polynomial text")
    if s[0] not in "+-":
        s = "+" + s
    pieces = _TERM_SPLIT.split(s)[1:]
    if len(pieces) % 2:
        raise ValueError(f"cannot parse polynomial {text!r}")
    raw = []
    top = 0
    for sgn, body in zip(pieces[::2], pieces[1::2]):
        body = body.replace(" ", "")
        if not body:
            raise ValueError(f"dangling sign in {text!r}")
        coeff = 1
        powers: dict[int, int] = {}
        for factor in body.split("*"):
            m = _FACTOR.match(factor)
            if m:
                idx = int(m.group(1))
                if idx < 1:
                    raise ValueError("variables are numbered from x1")
                powers[idx - 1] = powers.get(idx - 1, 0) + int(m.group(2) or 1)
                top = max(top, idx)
            else:
                coeff = coeff * parse_scalar(factor, exact=True)
        raw.append((-coeff if sgn == "-" else coeff, powers))
    n = top if nvars is None else nvars
    if top > n:
        raise ArityError(f"text uses x{top} but only {n} variables allowed")
    out: dict = {}
    for c, powers in raw:
        e = [0] * n
        for i, k in powers.items():
            e[i] = k
        key = tuple(e)
        out[key] = out.get(key, 0) + c
    return MultiPoly(n, out)


def _term_order(item):
    e, _ = item
    return (-sum(e), tuple(-k for k in e))


def format_poly(p: MultiPoly) -> str:
    if not p.terms:
        return "0"
    chunks = []
    for e, c in sorted(p.terms.items(), key=_term_order):
        neg = c < 0
        mag = -c if neg else c
        factors = [f"x{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k]
        if not factors:
            body = format_scalar(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = format_scalar(mag) + "*" + "*".join(factors)
        if not chunks:
            chunks.append(("-" if neg else "") + body)
        else:
            chunks.append(("- " if neg else "+ ") + body)
    return " ".join(chunks)


def format_map(P: PolyMap) -> str:
    return "; ".join(format_poly(p) for p in P.comps)
