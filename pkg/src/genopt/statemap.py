"""Integer polynomial state maps for quadratic objectives.

For l(x) = a x^2 + b x + c and the gradient-descent step u(x) = -(2 a x + b)
we look for an integer polynomial s(t) = p_0 + p_1 t + ... + p_D t^D that
both interpolates the discrete system and has u as its derivative at
t = 1..m:

    s(t + 1) = s(t) + u(s(t))        (step match)
    s'(t)    = u(s(t))               (derivative match)

plus the anchor s(1) = x0. That is 2m + 1 linear equations in the
D + 1 = 2m + 3 unknown coefficients, solved exactly over the integers.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from math import gcd

from .poly import MultiPoly, PolyMap, format_poly, parse_poly
from .ring import parse_scalar


class Infeasible(ValueError):
    """The system has no integer solution; ``row`` is the obstructing row."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


@dataclass
class DioSystem:
    matrix: list[list[int]]
    rhs: list[int]
    a: int = 0
    b: int = 0
    c: int = 0
    m: int = 0
    x0: int = 0

    @property
    def rows(self) -> int:
        return len(self.matrix)

    @property
    def cols(self) -> int:
        return len(self.matrix[0]) if self.matrix else 0

    @property
    def labels(self) -> list[str]:
        return [f"p{i}" for i in range(self.cols)]

    def residuals(self, p) -> list[int]:
        return [sum(r * x for r, x in zip(row, p)) - b for row, b in zip(self.matrix, self.rhs)]

    def satisfied_by(self, p) -> bool:
        return not any(self.residuals(p))


@dataclass
class StateMapSolution:
    system: DioSystem
    particular: list[int]
    nullspace_basis: list[list[int]]
    trajectory: list = field(default_factory=list)

    def coefficients(self, combo=()) -> list[int]:
        """Particular solution plus an integer combination of the null-space basis."""
        p = list(self.particular)
        for k, v in zip(combo, self.nullspace_basis):
            p = [x + k * y for x, y in zip(p, v)]
        return p

    def state_map(self, combo=()) -> PolyMap:
        return state_polynomial(self.coefficients(combo))

    def objective(self) -> PolyMap:
        return quadratic(self.system.a, self.system.b, self.system.c)


def quadratic(a: int, b: int, c: int) -> PolyMap:
    return PolyMap(1, [MultiPoly(1, {(2,): a, (1,): b, (0,): c})])


def state_polynomial(coeffs) -> PolyMap:
    return PolyMap(1, [MultiPoly(1, {(i,): p for i, p in enumerate(coeffs)})])


def build_system(a: int, b: int, c: int, m: int, x0: int) -> DioSystem:
    """The 2m + 1 equations for a degree 2m + 2 integer state map."""
    if m < 1:
        raise ValueError("m must be at least 1")
    D = 2 * m + 2
    matrix, rhs = [], []
    for t in range(1, m + 1):
        # 2a s(t) + s'(t) = -b
        matrix.append([2 * a * t**i + (i * t ** (i - 1) if i else 0) for i in range(D + 1)])
        rhs.append(-b)
        # s(t+1) + (2a - 1) s(t) = -b
        matrix.append([(t + 1) ** i + (2 * a - 1) * t**i for i in range(D + 1)])
        rhs.append(-b)
    matrix.append([1] * (D + 1))
    rhs.append(x0)
    return DioSystem(matrix, rhs, a, b, c, m, x0)


def _xgcd(a: int, b: int):
    """(g, s, t) with s a + t b = g >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def hermite_columns(matrix: list[list[int]]):
    """Column Hermite reduction: unimodular U with A U = H lower echelon.

    Returns (H, U, pivots) where pivots[i] is the pivot column of row i or
    None when row i is a combination of earlier pivot columns.
    """
    rows = len(matrix)
    cols = len(matrix[0]) if matrix else 0
    H = [list(r) for r in matrix]
    U = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def colop(j, k, s, t, u, v):
        # (col_j, col_k) <- (s col_j + t col_k, u col_j + v col_k)
        for M in (H, U):
            for r in M:
                x, y = r[j], r[k]
                r[j], r[k] = s * x + t * y, u * x + v * y

    pivots: list[int | None] = []
    rank = 0
    for i in range(rows):
        if rank == cols:
            pivots.append(None)
            continue
        for k in range(rank + 1, cols):
            x, y = H[i][rank], H[i][k]
            if y == 0:
                continue
            g, s, t = _xgcd(x, y)
            colop(rank, k, s, t, -y // g, x // g)
        if H[i][rank] == 0:
            pivots.append(None)
            continue
        if H[i][rank] < 0:
            for M in (H, U):
                for r in M:
                    r[rank] = -r[rank]
        piv = H[i][rank]
        # reduce earlier columns in this row modulo the pivot
        for j in range(rank):
            q = H[i][j] // piv
            if q:
                for M in (H, U):
                    for r in M:
                        r[j] -= q * r[rank]
        pivots.append(rank)
        rank += 1
    return H, U, pivots


def solve(sys: DioSystem) -> StateMapSolution:
    """Integer particular solution plus null-space lattice basis.

    Raises :class:`Infeasible` when no integer vector satisfies the system.
    """
    particular, basis = solve_lattice(sys)
    sol = StateMapSolution(sys, particular, basis)
    sol.trajectory = trajectory(sol, range(1, sys.m + 2))
    return sol


def solve_lattice(sys: DioSystem) -> tuple[list[int], list[list[int]]]:
    cols = sys.cols
    H, U, pivots = hermite_columns(sys.matrix)
    rank = sum(p is not None for p in pivots)
    y = [0] * cols
    for i, (row, target) in enumerate(zip(H, sys.rhs)):
        piv = pivots[i]
        known = sum(row[j] * y[j] for j in range(rank) if piv is None or j < piv)
        if piv is None:
            if known != target:
                raise Infeasible(f"row {i} is inconsistent with the earlier rows", i)
            continue
        q, r = divmod(target - known, row[piv])
        if r:
            raise Infeasible(f"row {i} needs a non-integer coefficient", i)
        y[piv] = q
    particular = [sum(U[r][j] * y[j] for j in range(cols)) for r in range(cols)]
    basis = [[U[r][j] for r in range(cols)] for j in range(rank, cols)]
    return particular, basis


def feasible_anchors(a: int, b: int, m: int) -> tuple[int, int]:
    """Anchors x0 admitting an integer state map form the class r + d Z.

    Returns ``(r, d)`` with 0 <= r < d (or ``(r, 0)`` if only x0 = r works).
    Raises :class:`Infeasible` when even the unanchored system has no
    integer solution.
    """
    full = build_system(a, b, 0, m, 0)
    free = DioSystem(full.matrix[:-1], full.rhs[:-1], a, b, 0, m, 0)
    sol = solve_lattice(free)
    base = sum(sol[0])
    d = 0
    for v in sol[1]:
        d = gcd(d, sum(v))
    return (base % d, d) if d else (base, 0)


def smallest_anchor(a: int, b: int, m: int) -> int:
    """Smallest positive feasible anchor."""
    r, d = feasible_anchors(a, b, m)
    if not d:
        return r
    return r if r > 0 else d


def trajectory(sol: StateMapSolution, t_range, combo=()) -> list[tuple]:
    """(t, s(t), l(s(t))) with exact integers."""
    s = sol.state_map(combo)
    l = sol.objective()
    out = []
    for t in t_range:
        st = s([t])[0]
        out.append((t, st, l([st])[0]))
    return out


def to_csv(sol: StateMapSolution, rows=None) -> str:
    sys = sol.system
    buf = io.StringIO()
    buf.write(f"# objective: {format_poly(sol.objective()[0])}\n")
    buf.write(f"# state_map: {format_poly(sol.state_map()[0])}\n")
    buf.write(f"# tau: 1..{sys.m}\n")
    buf.write(f"# config: a={sys.a} b={sys.b} c={sys.c} m={sys.m} x0={sys.x0}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "s_t", "loss"])
    for t, st, loss in rows if rows is not None else sol.trajectory:
        w.writerow([t, st, loss])
    return buf.getvalue()


def read_csv(text: str) -> dict:
    """Parse :func:`to_csv` output back into its objective, state map and rows."""
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        elif line:
            body.append(line)
    rows = [tuple(parse_scalar(v) for v in r) for r in list(csv.reader(body))[1:]]
    lo, _, hi = meta["tau"].partition("..")
    return {
        "objective": PolyMap(1, [parse_poly(meta["objective"], 1)]),
        "state_map": PolyMap(1, [parse_poly(meta["state_map"], 1)]),
        "tau": list(range(int(lo), int(hi) + 1)),
        "rows": rows,
        "config": meta.get("config", ""),
    }
