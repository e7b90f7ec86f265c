import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genopt import statemap
from genopt.flow import gradient_flow, inner_product_identity, verify_flow
from genopt.statemap import DioSystem, Infeasible, build_system, hermite_columns, solve


def fig1(a=1, b=0, c=0, m=6):
    return solve(build_system(a, b, c, m, statemap.smallest_anchor(a, b, m)))


def test_shape():
    sys = build_system(1, 0, 0, 1, 10)
    assert (sys.rows, sys.cols) == (3, 5)
    sys = build_system(1, 0, 0, 6, 10)
    assert (sys.rows, sys.cols) == (13, 15)
    assert sys.labels[0] == "p0" and sys.labels[-1] == "p14"
    with pytest.raises(ValueError):
        build_system(1, 0, 0, 0, 1)


def test_degenerate_objective_gives_flat_trajectory():
    sol = solve(build_system(0, 0, 4, 3, 7))
    assert [s for _, s, _ in sol.trajectory] == [7, 7, 7, 7]
    assert all(loss == 4 for *_, loss in sol.trajectory)


def test_zero_system():
    sys = DioSystem([[0, 0, 0]], [0])
    particular, basis = statemap.solve_lattice(sys)
    assert particular == [0, 0, 0]
    assert len(basis) == 3 and abs(round(np.linalg.det(np.array(basis, dtype=float)))) == 1


def test_parity_obstruction():
    with pytest.raises(Infeasible) as info:
        statemap.solve_lattice(DioSystem([[2]], [1]))
    assert info.value.row == 0


def test_inconsistent_rows():
    with pytest.raises(Infeasible):
        statemap.solve_lattice(DioSystem([[1, 1], [2, 2]], [1, 3]))


def test_figure1_left_panel():
    sol = fig1()
    assert sol.system.satisfied_by(sol.particular)
    s = [v for _, v, _ in sol.trajectory]
    assert len(s) == 7
    assert all(s[i + 1] == -s[i] for i in range(6))


def test_figure1_right_panel():
    sol = fig1(a=2, c=-1)
    s = [v for _, v, _ in sol.trajectory]
    assert s[0] != 0 and all(s[i + 1] == -3 * s[i] for i in range(6))


def test_infeasible_anchor():
    with pytest.raises(Infeasible):
        solve(build_system(1, 0, 0, 6, 10))
    r, d = statemap.feasible_anchors(1, 0, 6)
    assert r == 0 and d > 10  # so x0 = 10 is not in the feasible class
    solve(build_system(1, 0, 0, 6, r + 3 * d))


def test_shifted_minimizer():
    # b = 2 a h moves the minimizer to -h; anchors shift with it
    r, d = statemap.feasible_anchors(3, 24, 2)
    sol = solve(build_system(3, 24, 5, 2, r + d))
    assert sol.system.satisfied_by(sol.particular)


def test_nullspace(rng=np.random.default_rng(0)):
    sol = fig1(m=3)
    for v in sol.nullspace_basis:
        assert not any(sum(r * x for r, x in zip(row, v)) for row in sol.system.matrix)
    for _ in range(10):
        combo = rng.integers(-3, 4, size=len(sol.nullspace_basis)).tolist()
        assert sol.system.satisfied_by(sol.coefficients(combo))


def test_induced_flow():
    sol = fig1()
    f = gradient_flow(sol.objective(), sol.state_map(), range(1, 7))
    assert verify_flow(f).passed and inner_product_identity(f).passed


@given(st.lists(st.lists(st.integers(-6, 6), min_size=4, max_size=4), min_size=1, max_size=4))
@settings(max_examples=60)
def test_hermite_reduction(rows):
    H, U, pivots = hermite_columns(rows)
    A = np.array(rows, dtype=object)
    assert (A.dot(np.array(U, dtype=object)) == np.array(H, dtype=object)).all()
    assert abs(round(np.linalg.det(np.array(U, dtype=float)))) == 1
    # lower echelon: row i has nothing right of its pivot column
    rank = 0
    for i, piv in enumerate(pivots):
        assert all(H[i][j] == 0 for j in range(rank + (piv is not None), len(H[i])))
        rank += piv is not None


@given(st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=1, max_size=3),
       st.lists(st.integers(-5, 5), min_size=3, max_size=3))
@settings(max_examples=60)
def test_solver_finds_planted_solution(rows, x):
    rhs = [sum(r * v for r, v in zip(row, x)) for row in rows]
    particular, basis = statemap.solve_lattice(DioSystem(rows, rhs))
    assert DioSystem(rows, rhs).satisfied_by(particular)


def test_csv_roundtrip():
    sol = fig1(a=2, c=-1)
    text = statemap.to_csv(sol)
    assert "t,s_t,loss" in text
    back = statemap.read_csv(text)
    assert back["state_map"] == sol.state_map()
    assert back["objective"] == sol.objective()
    assert back["tau"] == list(range(1, 7))
    assert back["rows"] == [tuple(r) for r in sol.trajectory]
