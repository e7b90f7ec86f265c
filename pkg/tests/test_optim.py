from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genopt import optim, smooth
from genopt.optim import (
    Diverged, NotAnObjective, NotInvertible, Objective, Trajectory, UnsupportedDomain, adagrad_optimizer,
    check_invariance, gd_functor, integer_gd_step, iterate, momentum_functor, newton_functor, with_affine_inverse,
)
from genopt.poly import PolyMap
from genopt.smooth import ExprMap

F = Fraction


def P(text, n=None):
    return PolyMap.parse(text, n)


def spd(rng, n):
    A = rng.normal(size=(n, n))
    return A @ A.T + n * np.eye(n)


def quadratic_expr(A, b):
    """l(x) = 1/2 x^T A x - b^T x as an ExprMap."""
    n = len(b)
    x = ExprMap.identity(n)
    Ax = ExprMap.linear(A)
    quad = ExprMap(n, [smooth.const(0.0)])
    for i in range(n):
        quad = quad + ExprMap(n, [smooth.mul(x.outputs[i], Ax.outputs[i])])
    return quad.scale(0.5) - ExprMap.linear([b])


def test_gd_examples():
    assert gd_functor(P("x1^2")).endo == P("-2*x1")
    assert gd_functor(P("x1^2 + x2^2")).endo == P("-2*x1; -2*x2")
    rng = np.random.default_rng(0)
    opt = gd_functor(ExprMap.parse("x1^2 + x2^2 + x3^2"))
    for x in rng.normal(size=(5, 3)):
        assert np.allclose(opt(x), -2 * x)


def test_momentum_examples():
    opt = momentum_functor(P("x1^2"))
    assert opt.dimension == 2
    assert opt([1, 0]) == [0, -2]
    assert opt([0, 7]) == [7, -7]
    assert opt.endo == P("x2; -x2 - 2*x1", 2)


def test_adagrad_examples():
    l = ExprMap.parse("x1^2")
    opt = adagrad_optimizer(l)
    assert opt([3.0, 4.0]).tolist() == [-3.0, 36.0]
    assert opt([2.0, 1.0]).tolist() == [-4.0, 16.0]
    with pytest.raises(UnsupportedDomain):
        adagrad_optimizer(P("x1^2"))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20)
def test_adagrad_accumulator_stays_nonnegative(seed):
    rng = np.random.default_rng(seed)
    A, b = spd(rng, 2), rng.normal(size=2)
    opt = adagrad_optimizer(quadratic_expr(A, b))
    traj = iterate(opt, np.r_[rng.normal(size=2), 1.0, 1.0], 0.1, 100)
    assert all(np.all(s[2:] >= 0) for s in traj.states)


def test_newton_examples():
    l = Objective(P("1/2*x1^2"), PolyMap.identity(1))
    assert newton_functor(l).endo == P("-x1")
    # l = 1/2 x^T diag(2, 4) x
    l = with_affine_inverse(P("x1^2 + 2*x2^2"))
    assert l.grad_inverse_ok()
    assert newton_functor(l).endo == P("-x1; -x2", 2)
    with pytest.raises(NotAnObjective):
        newton_functor(P("x1^2"))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_newton_matches_linear_solve(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    A, b = spd(rng, n), rng.normal(size=n)
    opt = newton_functor(with_affine_inverse(quadratic_expr(A, b)))
    x = rng.normal(size=n)
    assert smooth.rel_close(opt(x), -np.linalg.solve(A, A @ x - b), 1e-9)
    traj = iterate(opt, x, 1.0, 1)
    assert smooth.rel_close(traj.states[1], np.linalg.solve(A, b), 1e-9)


def test_gradient_inverse_must_invert():
    with pytest.raises(NotAnObjective):
        with_affine_inverse(P("x1^4"))
    with pytest.raises(NotAnObjective):
        with_affine_inverse(P("x1^2 + 2*x1*x2 + x2^2"))
    assert not Objective(P("x1^2"), PolyMap.identity(1)).grad_inverse_ok()
    with pytest.raises(NotAnObjective):
        Objective(P("x1; x1", 1))


def test_iterate_examples():
    traj = iterate(gd_functor(P("x1^2")), [4], F(1, 4), 3)
    assert [s[0] for s in traj.states] == [4, 2, 1, F(1, 2)]
    assert traj.losses == [16, 4, 1, F(1, 4)]
    assert len(iterate(gd_functor(P("x1^2")), [4], 0, 5)) == 6
    assert all(s == [4] for s in iterate(gd_functor(P("x1^2")), [4], 0, 5).states)
    with pytest.raises(ValueError):
        iterate(gd_functor(P("x1^2")), [4, 1], 1, 1)


def test_divergence_keeps_partial_trajectory():
    with pytest.raises(Diverged) as info:
        iterate(gd_functor(ExprMap.parse("x1^2")), [1.0], 5.0, 100)
    traj = info.value.trajectory
    assert 5 < len(traj) < 100
    assert max(abs(s[0]) for s in traj.states) <= optim.DIVERGENCE_BOUND


def test_integer_gd_step_examples():
    assert integer_gd_step(P("x1^2"), [4]) == [3]
    assert integer_gd_step(P("x1^2"), [0]) == [0]
    assert integer_gd_step(P("x1^2 - 6*x1 + x2^2 + 2*x2 + 10"), [0, 0]) == [1, -1]


def test_trajectory_csv_roundtrip():
    traj = iterate(gd_functor(P("x1^2 + x2^2")), [3, F(-1, 2)], F(1, 3), 4)
    text = traj.to_csv(["objective: x1^2 + x2^2"])
    assert text.splitlines()[1] == "t,x1,x2,loss"
    back = Trajectory.from_csv(text)
    assert back.states == traj.states and back.losses == traj.losses
    ftraj = iterate(gd_functor(ExprMap.parse("x1^2")), [0.3], 0.1, 3)
    fback = Trajectory.from_csv(ftraj.to_csv(), exact=False)
    assert [s[0] for s in fback.states] == [float(s[0]) for s in ftraj.states]


# invariance -------------------------------------------------------------------

ROT90 = PolyMap.linear([[0, -1], [1, 0]])
PYTH = PolyMap.linear([[F(3, 5), F(-4, 5)], [F(4, 5), F(3, 5)]])


def test_gd_invariant_under_rotation():
    r = check_invariance("gd", P("x1^2 + x2^2"), ROT90, [3, -2], F(1, 10), 20)
    assert r.holds and r.orthogonal


def test_gd_not_invariant_under_stretch():
    stretch = PolyMap.linear([[2, 0], [0, 1]])
    r = check_invariance("gd", P("x1^2 + x2^2"), stretch, [3, -2], F(1, 10), 20)
    assert not r.holds and r.first_failure == 1 and not r.orthogonal


def test_momentum_invariant_under_rotation():
    l = P("x1^2 + 3*x2^2 + x1*x2 - x1")
    assert check_invariance("momentum", l, PYTH, [1, 2, 0, 0], F(1, 8), 15).holds


def test_newton_invariant_under_shear():
    l = with_affine_inverse(P("x1^2 + 2*x2^2 - x1 + x2"))
    shear = PolyMap.linear([[2, 1], [0, 1]])
    r = check_invariance("newton", l, shear, [5, -3], F(1, 2), 10)
    assert r.holds and not r.orthogonal


def test_newton_invariance_in_float():
    rng = np.random.default_rng(5)
    A, b = spd(rng, 3), rng.normal(size=3)
    l = with_affine_inverse(quadratic_expr(A, b))
    f = ExprMap.linear(rng.normal(size=(3, 3)) + 3 * np.eye(3))
    r = check_invariance("newton", l, f, rng.normal(size=3), 0.5, 10)
    assert r.holds and r.max_residual <= 1e-9


def test_invariance_composes():
    l = P("x1^2 + x2^2 + x1")
    f, g = ROT90, PolyMap.linear([[0, 1], [1, 0]])
    x0 = [2, 5]
    fg = check_invariance("gd", l, f @ g, x0, F(1, 4), 8)
    # witness for f . g is g^-1 . f^-1 applied to the x trajectory
    rf = check_invariance("gd", l, f, x0, F(1, 4), 8)
    rg = check_invariance("gd", optim.as_objective(l).compose(f), g, rf.y_trajectory.states[0], F(1, 4), 8)
    assert fg.holds and rf.holds and rg.holds
    assert fg.y_trajectory.states == rg.y_trajectory.states


def test_singular_reparametrization():
    with pytest.raises(NotInvertible):
        check_invariance("gd", P("x1^2 + x2^2"), PolyMap.linear([[1, 1], [1, 1]]), [1, 1], 1, 2)


def test_orthogonality():
    assert optim.is_orthogonal(ROT90) and optim.is_orthogonal(PYTH)
    assert not optim.is_orthogonal(PolyMap.linear([[2, 1], [0, 1]]))
