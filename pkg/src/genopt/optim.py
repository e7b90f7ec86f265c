"""Generalized optimizers, the optimization functors and their invariance.

An optimizer is an endomorphism ``d : A^k -> A^k`` in either instance
(``PolyMap`` for exact rings, ``ExprMap`` for the standard domain). The
discrete system is ``x <- x + alpha * d(x)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import category, smooth
from .category import pair, power
from .poly import PolyMap, inverse_linear, inverse_matrix
from .ring import format_scalar, normalize, parse_scalar, sign
from .smooth import ExprMap

DIVERGENCE_BOUND = 1e12


class UnsupportedDomain(TypeError):
    pass


class NotAnObjective(ValueError):
    pass


class NotInvertible(ValueError):
    pass


class Diverged(ArithmeticError):
    def __init__(self, message: str, trajectory: "Trajectory"):
        super().__init__(message)
        self.trajectory = trajectory


def is_exact(m) -> bool:
    return isinstance(m, PolyMap)


@dataclass
class Objective:
    """An objective l : A -> 1, optionally with an inverse of its gradient."""

    map: object
    grad_inverse: object | None = None
    _gradient: object | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.map.cod != 1:
            raise NotAnObjective(f"objective must map into 1, got codomain {self.map.cod}")
        if self.grad_inverse is not None and (self.grad_inverse.dom, self.grad_inverse.cod) != (self.arity,) * 2:
            raise NotAnObjective("gradient inverse must be an endomorphism of the state space")

    @property
    def arity(self) -> int:
        return self.map.dom

    @property
    def gradient(self):
        if self._gradient is None:
            self._gradient = category.generalized_gradient(self.map)
        return self._gradient

    def __call__(self, x):
        v = self.map(x)[0]
        return float(v) if not is_exact(self.map) else v

    def grad_inverse_ok(self) -> bool:
        """Both composites with the gradient are the identity."""
        if self.grad_inverse is None:
            return False
        ident = type(self.map).identity(self.arity)
        g, h = self.gradient, self.grad_inverse
        if is_exact(self.map):
            return h @ g == ident and g @ h == ident
        return smooth.numerically_equal(h @ g, ident) and smooth.numerically_equal(g @ h, ident)

    def compose(self, f) -> Objective:
        """l . f, carrying the gradient inverse along when f is invertible linear."""
        ginv = None
        if self.grad_inverse is not None:
            f_inv = linear_inverse(f)
            ginv = f_inv @ self.grad_inverse @ dagger(f_inv)
        return Objective(self.map @ f, ginv)


@dataclass
class GenOptimizer:
    state_arity: int
    dimension: int
    endo: object
    objective: Objective | None = None
    method: str = ""

    def __post_init__(self):
        size = self.state_arity * self.dimension
        if (self.endo.dom, self.endo.cod) != (size, size):
            raise ValueError(f"endomorphism must be {size} -> {size}, got {self.endo.dom} -> {self.endo.cod}")

    def __call__(self, state):
        return self.endo(state)


def as_objective(l) -> Objective:
    return l if isinstance(l, Objective) else Objective(l)


def gd_functor(l) -> GenOptimizer:
    l = as_objective(l)
    return GenOptimizer(l.arity, 1, -l.gradient, l, "gd")


def momentum_functor(l) -> GenOptimizer:
    l = as_objective(l)
    C, n = type(l.map), l.arity
    p0, p1 = C.proj0(n, n), C.proj1(n, n)
    endo = pair(p1, -p1 - l.gradient @ p0)
    return GenOptimizer(n, 2, endo, l, "momentum")


def adagrad_optimizer(l) -> GenOptimizer:
    """d(x, y) = (-g(x) / sqrt(y), g(x)^2), standard domain only."""
    l = as_objective(l)
    if not isinstance(l.map, ExprMap):
        raise UnsupportedDomain("adagrad needs square roots and division; use the standard domain")
    n = l.arity
    g = (l.gradient @ ExprMap.proj0(n, n)).outputs
    step = [smooth.neg(smooth.div(g[i], smooth.sqrt(smooth.var(n + i)))) for i in range(n)]
    accum = [smooth.power(g[i], 2) for i in range(n)]
    return GenOptimizer(n, 2, ExprMap(2 * n, step + accum), l, "adagrad")


def newton_functor(l) -> GenOptimizer:
    """-R[R[l]_1^-1] . <R[l]_1, R[l]_1>."""
    l = as_objective(l)
    if l.grad_inverse is None:
        raise NotAnObjective("Newton's method needs an inverse of the gradient")
    g = l.gradient
    endo = -(l.grad_inverse.reverse() @ pair(g, g))
    return GenOptimizer(l.arity, 1, endo, l, "newton")


def with_affine_inverse(l) -> Objective:
    """Attach the gradient inverse of a quadratic objective (affine gradient)."""
    l = as_objective(l)
    g = l.gradient
    n = l.arity
    if is_exact(g):
        if g.degree() > 1:
            raise NotAnObjective("gradient is not affine; supply its inverse explicitly")
        offset = [p.constant_term() for p in g.comps]
        H = (g - PolyMap.constant(n, offset)).matrix()
        try:
            Hinv = inverse_matrix(H)
        except ZeroDivisionError:
            raise NotAnObjective("gradient is not invertible") from None
        shift = PolyMap.identity(n) - PolyMap.constant(n, offset)
        ginv = PolyMap.linear(Hinv, ncols=n) @ shift
    else:
        c = g(np.zeros(n))
        H = smooth.matrix_of(g - ExprMap.constant(n, c))
        pts = smooth.sample_points(n, 20)
        if not smooth.rel_close(g.evaluate_batch(pts), pts @ H.T + c, 1e-9):
            raise NotAnObjective("gradient is not affine; supply its inverse explicitly")
        try:
            Hinv = np.linalg.inv(H)
        except np.linalg.LinAlgError:
            raise NotAnObjective("gradient is not invertible") from None
        ginv = ExprMap.linear(Hinv, ncols=n) @ (ExprMap.identity(n) - ExprMap.constant(n, c))
    return Objective(l.map, ginv)


FUNCTORS: dict[str, Callable] = {
    "gd": gd_functor,
    "momentum": momentum_functor,
    "adagrad": adagrad_optimizer,
    "newton": newton_functor,
}


# linear maps -------------------------------------------------------------------

def linear_inverse(f):
    if is_exact(f):
        try:
            return inverse_linear(f)
        except ZeroDivisionError:
            raise NotInvertible("linear map is singular") from None
    M = smooth.matrix_of(f)
    if M.shape[0] != M.shape[1] or abs(np.linalg.det(M)) < 1e-12:
        raise NotInvertible("linear map is singular")
    return ExprMap.linear(np.linalg.inv(M), ncols=M.shape[0])


def dagger(f):
    from . import poly

    return poly.dagger(f) if is_exact(f) else smooth.dagger(f)


def is_orthogonal(f) -> bool:
    ft = dagger(f)
    ident = type(f).identity(f.dom)
    if is_exact(f):
        return ft @ f == ident
    return smooth.numerically_equal(ft @ f, ident)


# iteration ---------------------------------------------------------------------

@dataclass
class Trajectory:
    states: list
    losses: list
    step_size: object
    method: str = ""

    def __len__(self):
        return len(self.states)

    def to_csv(self, header_lines: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        width = len(self.states[0]) if self.states else 0
        w.writerow(["t"] + [f"x{i + 1}" for i in range(width)] + ["loss"])
        for t, (s, l) in enumerate(zip(self.states, self.losses)):
            w.writerow([t] + [format_scalar(_scalar(v)) for v in s] + [format_scalar(_scalar(l))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, exact: bool = True, step_size=None, method: str = "") -> Trajectory:
        rows = [r for r in csv.reader(line for line in text.splitlines() if line and not line.startswith("#"))]
        states, losses = [], []
        for r in rows[1:]:
            vals = [parse_scalar(v, exact=exact) for v in r[1:]]
            states.append(vals[:-1])
            losses.append(vals[-1])
        return cls(states, losses, step_size, method)


def _scalar(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    return normalize(v)


def _step(state, direction, alpha, exact):
    if exact:
        return [normalize(x + alpha * d) for x, d in zip(state, direction)]
    return np.asarray(state, dtype=float) + float(alpha) * np.asarray(direction, dtype=float)


def _coerce_state(x, exact):
    if exact:
        return [normalize(Fraction(v) if not isinstance(v, (int, Fraction)) else v) for v in x]
    return np.asarray(x, dtype=float)


def iterate(opt: GenOptimizer, x0, alpha, steps: int, objective: Objective | None = None) -> Trajectory:
    """Run ``steps`` Euler steps of the optimizer from ``x0``."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    exact = is_exact(opt.endo)
    size = opt.state_arity * opt.dimension
    if len(x0) != size:
        raise ValueError(f"start state must have {size} entries, got {len(x0)}")
    objective = objective or opt.objective
    n = opt.state_arity
    x = _coerce_state(x0, exact)
    if exact:
        alpha = normalize(Fraction(alpha) if not isinstance(alpha, int) else alpha)
    else:
        alpha = float(alpha)

    def loss(s):
        return objective(list(s[:n])) if objective is not None else None

    traj = Trajectory([x], [loss(x)], alpha, opt.method)
    for _ in range(steps):
        try:
            x = _step(x, opt(x), alpha, exact)
        except smooth.NonFiniteError as e:
            raise Diverged(str(e), traj) from None
        if not exact and (not np.all(np.isfinite(x)) or np.max(np.abs(x), initial=0.0) > DIVERGENCE_BOUND):
            raise Diverged(f"state left the bound {DIVERGENCE_BOUND:g}: {x}", traj)
        traj.states.append(x)
        traj.losses.append(loss(x))
    return traj


def integer_gd_step(l, x: Sequence[int]) -> list[int]:
    """x - sign(grad l(x)) componentwise."""
    g = as_objective(l).gradient
    return [xi - sign(gi) for xi, gi in zip(x, g(list(x)))]


# invariance --------------------------------------------------------------------

@dataclass
class ConjugacyReport:
    method: str
    steps: int
    holds: bool
    first_failure: int | None
    max_residual: float
    orthogonal: bool
    x_trajectory: Trajectory = field(repr=False)
    y_trajectory: Trajectory = field(repr=False)


def _states_equal(a, b, exact, tol):
    if exact:
        return list(a) == list(b), 0.0
    err = smooth.max_rel_error(a, b)
    return err <= tol, err


def check_invariance(functor, l, f, x0, alpha, steps: int, tol: float = 1e-9) -> ConjugacyReport:
    """Compare the y-system for l.f, started at f_k^-1 x0, with f_k^-1 x_t."""
    if isinstance(functor, str):
        functor = FUNCTORS[functor]
    l = as_objective(l)
    if f.cod != l.arity or f.dom != f.cod:
        raise ValueError("reparametrization must be a square linear map into the state space")
    f_inv = linear_inverse(f)
    ux = functor(l)
    uy = functor(l.compose(f))
    k = ux.dimension
    fk_inv = power(f_inv, k)
    exact = is_exact(ux.endo)
    xs = iterate(ux, x0, alpha, steps)
    y0 = fk_inv(list(x0) if exact else np.asarray(x0, dtype=float))
    ys = iterate(uy, y0, alpha, steps)
    first, worst = None, 0.0
    for t, (xt, yt) in enumerate(zip(xs.states, ys.states)):
        ok, err = _states_equal(yt, fk_inv(xt), exact, tol)
        worst = max(worst, err)
        if not ok and first is None:
            first = t
    return ConjugacyReport(
        getattr(ux, "method", ""), steps, first is None, first, worst, is_orthogonal(f), xs, ys
    )
