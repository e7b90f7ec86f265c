import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genopt.experiment import (
    ExperimentConfig, ExperimentReport, SumOfSquares, generate_polynomial, integer_gd_run, log_uniform_points,
    random_search, run_experiment, run_table1,
)
from genopt.optim import integer_gd_step


def single(w, c):
    return SumOfSquares(np.array(w, dtype=np.int64), np.array(c, dtype=np.int64))


def test_single_term_expansion():
    l = single([[1]], [-3])
    assert str(l.poly()) == "x1^2 - 6*x1 + 9"
    assert l.loss([3]) == 0


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40)
def test_generated_polynomials(seed):
    rng = np.random.default_rng(seed)
    l = generate_polynomial(rng)
    assert 1 <= l.nvars <= 10 and 1 <= l.weights.shape[0] <= 10
    assert np.all(np.abs(l.weights) <= 10) and np.all((np.abs(l.offsets) >= 1) & (np.abs(l.offsets) <= 10))
    assert all(np.any(row) for row in l.weights)
    P = l.poly()
    assert P.degree() == 2
    pts = rng.integers(-50, 51, size=(100, l.nvars))
    assert np.all(l.loss(pts) >= 0)
    for x in pts[:5].tolist():
        assert P(x)[0] == int(l.loss(x))
        assert integer_gd_step(P, x) == (np.array(x) - np.sign(l.gradient(x))).tolist()


def test_log_uniform_points():
    pts = log_uniform_points(np.random.default_rng(0), 2000, 3, 1024)
    mags = np.abs(pts)
    assert mags.min() >= 1 and mags.max() <= 1024
    assert (pts < 0).any() and (pts > 0).any()
    # log-uniform: about half the magnitudes lie below sqrt(B)
    assert 0.4 < np.mean(mags < 32) < 0.6


def test_random_search_single_sample():
    l = single([[1]], [0])
    rng = np.random.default_rng(4)
    x, loss = random_search(l, 1, rng)
    assert loss == x[0] ** 2


def test_best_of_samples():
    from genopt.experiment import best_of

    l = single([[1]], [0])
    assert best_of(l, np.array([[4], [-2], [9]])) == ([-2], 4)


def test_random_search_monotone_in_n():
    l = generate_polynomial(np.random.default_rng(1))
    pts = log_uniform_points(np.random.default_rng(2), 100, l.nvars, 1024)
    losses = l.loss(pts)
    prefix_best = np.minimum.accumulate(losses)
    assert np.all(np.diff(prefix_best) <= 0)


def test_integer_gd_examples():
    assert integer_gd_run(single([[1]], [0]), 5, start=[4]) == ([0], 0)
    assert integer_gd_run(single([[1]], [-3]), 3, start=[0]) == ([3], 0)
    # at a fixed point the start is returned
    assert integer_gd_run(single([[1, 1]], [0]), 4, start=[2, -2]) == ([2, -2], 0)
    with pytest.raises(ValueError):
        integer_gd_run(single([[1]], [0]), 0, start=[1])


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(steps=(0,))
    with pytest.raises(ValueError):
        ExperimentConfig(experiments=0)


def test_determinism_and_order_independence():
    cfg = ExperimentConfig(steps=(5, 10), experiments=3, polys_per_experiment=4, seed=11)
    a, b = run_table1(cfg), run_table1(cfg)
    assert a.to_json() == b.to_json()
    assert run_experiment(cfg, 2) == {n: a.per_experiment[n][2] for n in cfg.steps}


def test_single_bit_is_reproducible():
    cfg = ExperimentConfig(experiments=1, polys_per_experiment=1, seed=3, steps=(5,))
    r = run_table1(cfg)
    assert r.rows[0]["mean"] in (0.0, 0.5, 1.0)
    assert r.to_json() == run_table1(cfg).to_json()
    assert r.rows[0]["stderr"] == 0.0


def test_report_shape_and_roundtrip():
    cfg = ExperimentConfig(experiments=4, polys_per_experiment=3, seed=5)
    r = run_table1(cfg)
    assert [row["n_steps"] for row in r.rows] == [5, 10, 50, 100]
    for row in r.rows:
        freqs = np.array(r.per_experiment[row["n_steps"]])
        assert 0 <= row["mean"] <= 1
        assert row["stderr"] == pytest.approx(freqs.std(ddof=1) / 2)
    back = ExperimentReport.from_json(r.to_json())
    assert back.to_json() == r.to_json()
    assert r.per_experiment_csv().splitlines()[0] == "experiment,N=5,N=10,N=50,N=100"
