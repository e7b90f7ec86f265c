"""Symbolic smooth maps R^a -> R^b as shared expression DAGs.

The reverse derivative is a source transformation: backpropagation over
the DAG emits new nodes, so ``R[f]`` is again an :class:`ExprMap` and can be
differentiated again. Nodes are hash-consed and the smart constructors fold
constants and the obvious 0/1 identities, which is what keeps R[R[R[f]]]
from blowing up.
"""

from __future__ import annotations

import itertools
import json
import threading
import weakref
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import qmc

from . import category
from .poly import MultiPoly, PolyMap

OPS = ("const", "var", "add", "mul", "neg", "pow", "sqrt", "div")


class ArityError(ValueError):
    pass


class NonFiniteError(ArithmeticError):
    pass


class NotLinear(ValueError):
    pass


class Node:
    __slots__ = ("op", "args", "value", "uid", "__weakref__")

    def __init__(self, op, args, value, uid):
        self.op = op
        self.args = args
        self.value = value
        self.uid = uid

    def __repr__(self):
        if self.op == "const":
            return f"{self.value!r}"
        if self.op == "var":
            return f"x{self.value + 1}"
        if self.op == "pow":
            return f"({self.args[0]!r})^{self.value}"
        return f"{self.op}({', '.join(map(repr, self.args))})"


_intern: "weakref.WeakValueDictionary[tuple, Node]" = weakref.WeakValueDictionary()
_uids = itertools.count()
_lock = threading.Lock()


def _node(op: str, args: tuple = (), value=None) -> Node:
    key = (op, value, tuple(a.uid for a in args))
    with _lock:
        n = _intern.get(key)
        if n is None:
            n = Node(op, args, value, next(_uids))
            _intern[key] = n
        return n


def const(v) -> Node:
    v = float(v)
    if v == 0.0:
        v = 0.0  # fold -0.0
    return _node("const", (), v)


def var(i: int) -> Node:
    return _node("var", (), int(i))


def _is_const(n: Node, v=None) -> bool:
    return n.op == "const" and (v is None or n.value == v)


def add(a: Node, b: Node) -> Node:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return const(a.value + b.value)
    if a.uid > b.uid:
        a, b = b, a
    return _node("add", (a, b))


def neg(a: Node) -> Node:
    if _is_const(a):
        return const(-a.value)
    if a.op == "neg":
        return a.args[0]
    return _node("neg", (a,))


def sub(a: Node, b: Node) -> Node:
    return add(a, neg(b))


def mul(a: Node, b: Node) -> Node:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return const(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return neg(b)
    if _is_const(b, -1.0):
        return neg(a)
    if _is_const(a) and _is_const(b):
        return const(a.value * b.value)
    if a.uid > b.uid:
        a, b = b, a
    return _node("mul", (a, b))


def power(a: Node, k: int) -> Node:
    if k < 1:
        raise ValueError("exponent must be a natural number >= 1")
    if k == 1:
        return a
    if _is_const(a):
        return const(a.value**k)
    return _node("pow", (a,), int(k))


def sqrt(a: Node) -> Node:
    if _is_const(a):
        return const(np.sqrt(a.value))
    return _node("sqrt", (a,))


def div(a: Node, b: Node) -> Node:
    if _is_const(a, 0.0):
        return const(0.0)
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b):
        return const(a.value / b.value)
    return _node("div", (a, b))


def topo_order(roots: Iterable[Node]) -> list[Node]:
    """Children-before-parents order of every node reachable from ``roots``."""
    seen: set[int] = set()
    order: list[Node] = []
    for root in roots:
        if root.uid in seen:
            continue
        stack = [(root, False)]
        while stack:
            n, done = stack.pop()
            if done:
                order.append(n)
                continue
            if n.uid in seen:
                continue
            seen.add(n.uid)
            stack.append((n, True))
            for c in n.args:
                if c.uid not in seen:
                    stack.append((c, False))
    return order


def _rebuild(n: Node, args: list[Node]) -> Node:
    op = n.op
    if op == "add":
        return add(*args)
    if op == "mul":
        return mul(*args)
    if op == "neg":
        return neg(args[0])
    if op == "pow":
        return power(args[0], n.value)
    if op == "sqrt":
        return sqrt(args[0])
    if op == "div":
        return div(*args)
    return n


class ExprMap:
    """A morphism dom -> cod of the smooth instance."""

    __slots__ = ("dom", "cod", "outputs")

    def __init__(self, dom: int, outputs: Iterable[Node]):
        self.dom = dom
        self.outputs = tuple(outputs)
        self.cod = len(self.outputs)
        for n in topo_order(self.outputs):
            if n.op == "var" and not 0 <= n.value < dom:
                raise ArityError(f"variable x{n.value + 1} outside domain of arity {dom}")

    # constructors
    @classmethod
    def identity(cls, n: int) -> ExprMap:
        return cls(n, [var(i) for i in range(n)])

    @classmethod
    def proj0(cls, a: int, b: int) -> ExprMap:
        return cls(a + b, [var(i) for i in range(a)])

    @classmethod
    def proj1(cls, a: int, b: int) -> ExprMap:
        return cls(a + b, [var(a + i) for i in range(b)])

    @classmethod
    def zero(cls, n: int, m: int) -> ExprMap:
        return cls(n, [const(0.0)] * m)

    @classmethod
    def constant(cls, n: int, values: Sequence) -> ExprMap:
        return cls(n, [const(v) for v in values])

    @classmethod
    def linear(cls, matrix, ncols: int | None = None) -> ExprMap:
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2:
            m = m.reshape(0, ncols or 0)
        outs = []
        for row in m:
            acc = const(0.0)
            for j, v in enumerate(row):
                acc = add(acc, mul(const(v), var(j)))
            outs.append(acc)
        return cls(m.shape[1], outs)

    @classmethod
    def from_poly(cls, P: PolyMap) -> ExprMap:
        return cls(P.dom, [poly_expr(p) for p in P.comps])

    @classmethod
    def parse(cls, text: str, nvars: int | None = None) -> ExprMap:
        return cls.from_poly(PolyMap.parse(text, nvars))

    # morphism structure
    def __matmul__(self, other: ExprMap) -> ExprMap:
        if not isinstance(other, ExprMap):
            return NotImplemented
        if other.cod != self.dom:
            raise ArityError(f"cannot compose {self.dom}->{self.cod} after {other.dom}->{other.cod}")
        memo: dict[int, Node] = {}
        for n in topo_order(self.outputs):
            if n.op == "var":
                memo[n.uid] = other.outputs[n.value]
            elif n.op == "const":
                memo[n.uid] = n
            else:
                memo[n.uid] = _rebuild(n, [memo[c.uid] for c in n.args])
        return ExprMap(other.dom, [memo[o.uid] for o in self.outputs])

    def pair(self, other: ExprMap) -> ExprMap:
        if other.dom != self.dom:
            raise ArityError(f"pairing maps out of {self.dom} and {other.dom}")
        return ExprMap(self.dom, self.outputs + other.outputs)

    def _same_type(self, other):
        if not isinstance(other, ExprMap) or (other.dom, other.cod) != (self.dom, self.cod):
            raise ArityError("hom-set mismatch")

    def __add__(self, other):
        self._same_type(other)
        return ExprMap(self.dom, [add(a, b) for a, b in zip(self.outputs, other.outputs)])

    def __sub__(self, other):
        self._same_type(other)
        return ExprMap(self.dom, [sub(a, b) for a, b in zip(self.outputs, other.outputs)])

    def __neg__(self):
        return ExprMap(self.dom, [neg(a) for a in self.outputs])

    def scale(self, c) -> ExprMap:
        k = const(c)
        return ExprMap(self.dom, [mul(k, a) for a in self.outputs])

    def __mul__(self, other):
        if isinstance(other, ExprMap):
            self._same_type(other)
            return ExprMap(self.dom, [mul(a, b) for a, b in zip(self.outputs, other.outputs)])
        return self.scale(other)

    __rmul__ = scale

    def __repr__(self):
        return f"ExprMap({self.dom}->{self.cod}, size={self.size()})"

    def size(self) -> int:
        return len(topo_order(self.outputs))

    def reverse(self) -> ExprMap:
        """R[f](x, x') = J_f(x)^T x' by backpropagation over the DAG."""
        a, b = self.dom, self.cod
        order = topo_order(self.outputs)
        adj: dict[int, Node] = {}

        def bump(n: Node, g: Node):
            prev = adj.get(n.uid)
            adj[n.uid] = g if prev is None else add(prev, g)

        for j, o in enumerate(self.outputs):
            bump(o, var(a + j))
        for n in reversed(order):
            g = adj.get(n.uid)
            if g is None or _is_const(g, 0.0):
                continue
            op = n.op
            if op == "add":
                bump(n.args[0], g)
                bump(n.args[1], g)
            elif op == "mul":
                u, v = n.args
                bump(u, mul(g, v))
                bump(v, mul(g, u))
            elif op == "neg":
                bump(n.args[0], neg(g))
            elif op == "pow":
                u = n.args[0]
                bump(u, mul(g, mul(const(n.value), power(u, n.value - 1))))
            elif op == "sqrt":
                bump(n.args[0], div(g, mul(const(2.0), n)))
            elif op == "div":
                u, v = n.args
                bump(u, div(g, v))
                bump(v, neg(div(mul(g, n), v)))
        return ExprMap(a + b, [adj.get(var(i).uid, const(0.0)) for i in range(a)])

    # evaluation
    def evaluate_batch(self, points) -> np.ndarray:
        """Evaluate at each row of ``points`` (shape (k, dom)) -> (k, cod)."""
        X = np.asarray(points, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.dom:
            raise ArityError(f"expected points of width {self.dom}, got shape {X.shape}")
        k = X.shape[0]
        vals: dict[int, np.ndarray] = {}
        with np.errstate(all="ignore"):
            for n in topo_order(self.outputs):
                op = n.op
                if op == "const":
                    v = np.full(k, n.value)
                elif op == "var":
                    v = X[:, n.value]
                else:
                    xs = [vals[c.uid] for c in n.args]
                    if op == "add":
                        v = xs[0] + xs[1]
                    elif op == "mul":
                        v = xs[0] * xs[1]
                    elif op == "neg":
                        v = -xs[0]
                    elif op == "pow":
                        v = xs[0] ** n.value
                    elif op == "sqrt":
                        v = np.sqrt(xs[0])
                    else:
                        v = xs[0] / xs[1]
                vals[n.uid] = v
        if not self.outputs:
            return np.zeros((k, 0))
        return np.stack([vals[o.uid] for o in self.outputs], axis=1)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.dom:
            raise ArityError(f"expected {self.dom} values, got {x.shape[0]}")
        out = self.evaluate_batch(x[None, :])[0]
        if not np.all(np.isfinite(out)):
            raise NonFiniteError(f"non-finite result {out} at {x}")
        return out

    # serialization
    def to_json(self) -> dict:
        order = topo_order(self.outputs)
        ids = {n.uid: i for i, n in enumerate(order)}
        nodes = []
        for n in order:
            entry = {"id": ids[n.uid], "op": n.op, "args": [ids[c.uid] for c in n.args]}
            if n.value is not None:
                entry["value"] = n.value
            nodes.append(entry)
        return {"dom": self.dom, "nodes": nodes, "outputs": [ids[o.uid] for o in self.outputs]}

    @classmethod
    def from_json(cls, data) -> ExprMap:
        if isinstance(data, str):
            data = json.loads(data)
        built: dict[int, Node] = {}
        for entry in data["nodes"]:
            op = entry["op"]
            args = [built[i] for i in entry["args"]]
            if op == "const":
                n = const(entry["value"])
            elif op == "var":
                n = var(entry["value"])
            elif op == "pow":
                n = power(args[0], entry["value"])
            elif op in OPS:
                n = _rebuild(Node(op, (), entry.get("value"), -1), args)
            else:
                raise ValueError(f"unknown op {op!r}")
            built[entry["id"]] = n
        return cls(data["dom"], [built[i] for i in data["outputs"]])


def poly_expr(p: MultiPoly) -> Node:
    acc = const(0.0)
    for e, c in sorted(p.terms.items()):
        term = const(float(c))
        for i, k in enumerate(e):
            if k:
                term = mul(term, power(var(i), k))
        acc = add(acc, term)
    return acc


def evaluate(f: ExprMap, x) -> np.ndarray:
    return f(x)


def reverse_derivative(f: ExprMap) -> ExprMap:
    return f.reverse()


def forward_derivative(f: ExprMap) -> ExprMap:
    return category.forward_derivative(f)


def generalized_gradient(l: ExprMap) -> ExprMap:
    return category.generalized_gradient(l)


def generalized_n_derivative(f: ExprMap, n: int) -> ExprMap:
    if f.dom != 1 or f.cod != 1:
        raise ArityError(f"n-derivative is defined here for 1 -> 1 maps, got {f.dom}->{f.cod}")
    return category.generalized_n_derivative(f, n)


# numeric comparison ------------------------------------------------------------

def sample_points(dim: int, count: int = 20, seed: int = 0, lo: float = -2.0, hi: float = 2.0) -> np.ndarray:
    """Scrambled Halton points in [lo, hi]^dim."""
    if dim == 0:
        return np.zeros((1, 0))
    pts = qmc.Halton(d=dim, scramble=True, seed=seed).random(count)
    return lo + (hi - lo) * pts


def rel_close(x, y, tol: float) -> bool:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    scale = np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))
    return bool(np.all(np.abs(x - y) <= tol * scale))


def max_rel_error(x, y) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size == 0:
        return 0.0
    scale = np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))
    return float(np.max(np.abs(x - y) / scale))


def numerically_equal(f: ExprMap, g: ExprMap, count: int = 20, tol: float = 1e-9, seed: int = 0) -> bool:
    if (f.dom, f.cod) != (g.dom, g.cod):
        return False
    pts = sample_points(f.dom, count, seed)
    return rel_close(f.evaluate_batch(pts), g.evaluate_batch(pts), tol)


def matrix_of(f: ExprMap) -> np.ndarray:
    """Matrix of a linear map, read off from the images of basis vectors."""
    if f.dom == 0:
        return np.zeros((f.cod, 0))
    cols = f.evaluate_batch(np.eye(f.dom))  # row j = f(e_j)
    return cols.T


def is_linear(f: ExprMap, tol: float = 1e-9, seed: int = 0) -> bool:
    M = matrix_of(f)
    pts = sample_points(f.dom, 20, seed)
    return rel_close(f.evaluate_batch(pts), pts @ M.T, tol)


def dagger(f: ExprMap) -> ExprMap:
    if not is_linear(f):
        raise NotLinear("dagger needs a linear map")
    return ExprMap.linear(matrix_of(f).T, ncols=f.cod)


def parse_expr_map(text: str, nvars: int | None = None) -> ExprMap:
    return ExprMap.parse(text, nvars)


def random_node(rng: np.random.Generator, dom: int, depth: int, pool: list[Node] | None = None) -> Node:
    """Random polynomial-generated DAG of the given depth over ``dom`` inputs."""
    leaves = [var(i) for i in range(dom)] + [const(round(float(rng.uniform(-1, 1)), 3))]
    pool = pool if pool is not None else []
    if depth <= 0:
        if pool and rng.random() < 0.3:
            return pool[int(rng.integers(len(pool)))]
        return leaves[int(rng.integers(len(leaves)))]
    op = rng.choice(["add", "mul", "neg", "pow", "add", "mul"])
    if op == "neg":
        n = neg(random_node(rng, dom, depth - 1, pool))
    elif op == "pow":
        n = power(random_node(rng, dom, depth - 1, pool), 2)
    else:
        a = random_node(rng, dom, depth - 1, pool)
        b = random_node(rng, dom, int(rng.integers(0, depth)), pool)
        n = add(a, b) if op == "add" else mul(a, b)
    pool.append(n)
    return n


def random_map(rng: np.random.Generator, dom: int, cod: int, depth: int = 3) -> ExprMap:
    pool: list[Node] = []
    return ExprMap(dom, [random_node(rng, dom, depth, pool) for _ in range(cod)])
