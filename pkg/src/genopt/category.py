"""Combinators shared by every reverse-derivative instance.

A morphism class (``PolyMap`` or ``ExprMap``) supplies ``dom``/``cod``,
``@`` for composition (``g @ f`` is g after f), ``+``/``-``, ``pair`` and
``reverse``, plus the class constructors ``identity``, ``proj0``, ``proj1``,
``zero`` and ``constant``. Everything below is written only in terms of
those, so the derived structure is built the same way in both instances.
"""

from __future__ import annotations


def pair(f, g):
    return f.pair(g)


def product(f, g):
    """f x g : f.dom + g.dom -> f.cod + g.cod."""
    cls = type(f)
    return pair(f @ cls.proj0(f.dom, g.dom), g @ cls.proj1(f.dom, g.dom))


def iota0(cls, a: int, b: int):
    """<id, 0> : a -> a + b."""
    return pair(cls.identity(a), cls.zero(a, b))


def iota1(cls, a: int, b: int):
    """<0, id> : b -> a + b."""
    return pair(cls.zero(b, a), cls.identity(b))


def bang(cls, a: int):
    return cls.zero(a, 0)


def unit(cls, a: int, b: int):
    """The constant map 1_{ab} = 1_b . !_a."""
    return cls.constant(a, [1] * b)


def interchange(cls, a: int, b: int, c: int, d: int):
    """<pi0 x pi0, pi1 x pi1> : (a+b)+(c+d) -> (a+c)+(b+d)."""
    left = product(cls.proj0(a, b), cls.proj0(c, d))
    right = product(cls.proj1(a, b), cls.proj1(c, d))
    return pair(left, right)


def reverse_derivative(f):
    return f.reverse()


def forward_derivative(f):
    """D[f] = pi1 . R[R[f]] . (<id, 0> x id) : dom + dom -> cod."""
    cls = type(f)
    a, b = f.dom, f.cod
    rr = f.reverse().reverse()
    return cls.proj1(a, b) @ rr @ product(iota0(cls, a, b), cls.identity(a))


def generalized_gradient(l):
    """R[l]_1 = R[l] . <id, 1> : dom -> dom, for an objective into 1."""
    if l.cod != 1:
        raise ValueError(f"generalized gradient needs codomain 1, got {l.cod}")
    cls = type(l)
    return l.reverse() @ pair(cls.identity(l.dom), unit(cls, l.dom, 1))


def generalized_n_derivative(f, n: int):
    """D_n[f] for f : 1 -> a, by iterating D[.] . <id, 1>."""
    if f.dom != 1:
        raise ValueError(f"n-derivative needs domain 1, got {f.dom}")
    if n < 1:
        raise ValueError("n must be at least 1")
    cls = type(f)
    at_one = pair(cls.identity(1), unit(cls, 1, 1))
    g = f
    for _ in range(n):
        g = forward_derivative(g) @ at_one
    return g


def block(cls, k: int, n: int, i: int):
    """Projection of the i-th n-sized block out of a k-fold product."""
    left = i * n
    right = (k - i - 1) * n
    p = cls.proj1(left, n + right) if left else cls.identity(k * n)
    return cls.proj0(n, right) @ p if right else p


def power(f, k: int):
    """f^k = f x f x ... x f."""
    g = f
    for _ in range(k - 1):
        g = product(g, f)
    return g
