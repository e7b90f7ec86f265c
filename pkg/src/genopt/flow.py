"""Optimization flows: a state map s : 1 -> A^k whose derivative is the
optimizer, checked at a finite list of sample times.

Exact flows (``PolyMap`` state maps) are checked with symbolic derivatives
and exact equality. Standard-domain flows may use an ``ExprMap`` or any
Python callable ``t -> state``; callables are differentiated by central
differences.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import smooth
from .category import block, generalized_n_derivative, pair
from .optim import GenOptimizer, Objective, as_objective, dagger, is_exact
from .poly import PolyMap
from .ring import format_scalar, normalize
from .smooth import ExprMap

FD_STEP = 1e-5
EXACT_TOL = 1e-9
FD_TOL = 1e-6


class NotAGradientFlow(ValueError):
    pass


@dataclass
class Flow:
    objective: Objective
    optimizer: object  # endomorphism A^k -> A^k
    state_map: object  # morphism 1 -> A^k, or a callable for numeric flows
    tau: list
    dimension: int = 1

    def __post_init__(self):
        self.objective = as_objective(self.objective)
        if isinstance(self.optimizer, GenOptimizer):
            self.dimension = self.optimizer.dimension
            self.optimizer = self.optimizer.endo
        n = self.objective.arity
        if self.optimizer.dom != n * self.dimension or self.optimizer.cod != n * self.dimension:
            raise ValueError("optimizer does not act on the k-fold state space")
        if not callable(getattr(self.state_map, "reverse", None)) and not callable(self.state_map):
            raise TypeError("state map must be a morphism or a callable")
        if hasattr(self.state_map, "dom") and (self.state_map.dom, self.state_map.cod) != (1, n * self.dimension):
            raise ValueError(f"state map must be 1 -> {n * self.dimension}")

    @property
    def exact(self) -> bool:
        return isinstance(self.state_map, PolyMap)

    @property
    def symbolic(self) -> bool:
        return isinstance(self.state_map, (PolyMap, ExprMap))

    def state(self, t):
        if self.exact:
            return self.state_map([t])
        if self.symbolic:
            return self.state_map([float(t)])
        return np.asarray(self.state_map(float(t)), dtype=float).reshape(-1)

    def first_block(self):
        """pi0 . s : 1 -> A as a morphism (symbolic state maps only)."""
        cls = type(self.state_map)
        return block(cls, self.dimension, self.objective.arity, 0) @ self.state_map

    def loss_map(self):
        """l . pi0 . s : 1 -> 1."""
        return self.objective.map @ self.first_block()

    def loss(self, t):
        n = self.objective.arity
        return self.objective(list(self.state(t))[:n])

    def losses(self) -> list:
        return [self.loss(t) for t in self.tau]


def gradient_flow(l, state_map, tau: Sequence) -> Flow:
    l = as_objective(l)
    return Flow(l, -l.gradient, state_map, list(tau))


@dataclass
class CheckReport:
    check: str
    passed: bool
    points: list = field(default_factory=list)
    note: str = ""

    def to_json(self) -> dict:
        return _jsonable(asdict(self))


@dataclass
class ConvergenceReport:
    converged: bool
    index: int | None
    t: object
    delta: object
    losses: list

    def to_json(self) -> dict:
        return _jsonable(asdict(self))


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (bool, str, type(None))):
        return x
    if isinstance(x, (int, float)):
        return x
    return format_scalar(normalize(x))


def _equal(a, b, exact, tol):
    if exact:
        return list(a) == list(b)
    return smooth.rel_close(a, b, tol)


def _fd(fn: Callable, t: float, h: float = FD_STEP):
    return (np.asarray(fn(t + h), dtype=float) - np.asarray(fn(t - h), dtype=float)) / (2 * h)


def verify_flow(flow: Flow) -> CheckReport:
    """d(s(t)) == D_1[s](t) at every t in tau."""
    tol = EXACT_TOL if flow.symbolic else FD_TOL
    if flow.symbolic:
        d1 = generalized_n_derivative(flow.state_map, 1)
        deriv = (lambda t: d1([t])) if flow.exact else (lambda t: d1([float(t)]))
    else:
        deriv = lambda t: _fd(flow.state, float(t))  # noqa: E731
    points = []
    ok_all = True
    for t in flow.tau:
        st = flow.state(t)
        lhs = flow.optimizer(list(st) if flow.exact else st)
        rhs = deriv(t)
        ok = _equal(lhs, rhs, flow.exact, tol)
        ok_all &= ok
        if flow.exact:
            residual = [normalize(x - y) for x, y in zip(lhs, rhs)]
        else:
            residual = (np.asarray(lhs) - np.asarray(rhs)).tolist()
        points.append({"t": t, "optimizer": list(lhs), "derivative": list(rhs), "residual": residual, "ok": ok})
    return CheckReport("flow", ok_all, points)


def check_descending(flow: Flow, n: int = 1) -> CheckReport:
    """D_k[l . pi0 . s](t) <= 0 for all t in tau and k <= n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    points = []
    ok_all = True
    if flow.symbolic:
        comp = flow.loss_map()
        derivs = [generalized_n_derivative(comp, k) for k in range(1, n + 1)]
        for t in flow.tau:
            arg = [t] if flow.exact else [float(t)]
            vals = [normalize(d(arg)[0]) if flow.exact else float(d(arg)[0]) for d in derivs]
            ok = all(v <= 0 for v in vals)
            ok_all &= ok
            points.append({"t": t, "derivatives": vals, "ok": ok})
    else:
        if n > 1:
            raise ValueError("numeric state maps support only first derivatives")
        for t in flow.tau:
            v = float(_fd(flow.loss, float(t)))
            ok = v <= FD_TOL
            ok_all &= ok
            points.append({"t": t, "derivatives": [v], "ok": ok})
    return CheckReport(f"{n}-descending", ok_all, points)


def _is_gradient_flow(flow: Flow) -> bool:
    if flow.dimension != 1:
        return False
    neg_grad = -flow.objective.gradient
    if type(neg_grad) is not type(flow.optimizer):
        return False
    if is_exact(neg_grad):
        return neg_grad == flow.optimizer
    return smooth.numerically_equal(neg_grad, flow.optimizer)


def inner_product_identity(flow: Flow) -> CheckReport:
    """D_1[l . pi0 . s](t) == -R[l]_{s_t}^dagger . R[l]_{s_t} . 1 == -sum_i (dl/dx_i(s_t))^2."""
    if not _is_gradient_flow(flow):
        raise NotAGradientFlow("optimizer is not -R[l]_1 (or the flow has dimension > 1)")
    l = flow.objective
    cls = type(l.map)
    n = l.arity
    tol = EXACT_TOL if flow.symbolic else FD_TOL
    if flow.symbolic:
        d1 = generalized_n_derivative(flow.loss_map(), 1)
    points = []
    ok_all = True
    for t in flow.tau:
        st = list(flow.state(t))[:n]
        if flow.symbolic:
            lhs = d1([t] if flow.exact else [float(t)])[0]
        else:
            lhs = float(_fd(flow.loss, float(t)))
        # R[l]_{s_t} = R[l] . <s_t . !, id> : 1 -> A, linear in its argument
        at_state = l.map.reverse() @ pair(cls.constant(1, st), cls.identity(1))
        one = cls.constant(0, [1])
        literal = (-(dagger(at_state) @ at_state @ one))([])[0]
        g = l.gradient(st)
        squares = -sum(gi * gi for gi in g)
        if flow.exact:
            lhs, literal, squares = normalize(lhs), normalize(literal), normalize(squares)
            ok = lhs == literal == squares
        else:
            lhs, literal, squares = float(lhs), float(literal), float(squares)
            ok = smooth.rel_close(lhs, squares, tol) and smooth.rel_close(literal, squares, EXACT_TOL)
        ok = ok and squares <= 0
        ok_all &= ok
        points.append({"t": t, "lhs": lhs, "dagger_form": literal, "sum_of_squares": squares, "ok": ok})
    return CheckReport("inner-product identity", ok_all, points)


def check_convergence(flow: Flow, delta) -> ConvergenceReport:
    """Earliest t in tau after which every later loss stays within delta.

    Over a finite tau the last time point satisfies this vacuously, so a
    witness must have at least one later sample to compare against.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    losses = flow.losses()
    return _scan(losses, flow.tau, delta)


def _scan(losses, tau, delta) -> ConvergenceReport:
    for i, li in enumerate(losses[:-1]):
        if all(-delta <= lj - li <= delta for lj in losses[i:]):
            return ConvergenceReport(True, i, tau[i], delta, list(losses))
    return ConvergenceReport(False, None, None, delta, list(losses))


def converged_index(losses: Sequence, delta) -> int | None:
    """Convergence scan over a bare loss sequence (tau = its indices)."""
    return _scan(list(losses), list(range(len(losses))), delta).index
