"""Integer gradient descent versus log-uniform random search.

Objectives are sums of squared integer affine forms, so they are bounded
below by zero and have an integer minimizer whenever some integer point
zeroes every form. Each polynomial is scored once per step budget N; the
integer descent run wins when its best visited loss is strictly lower than
the best of N random samples, and ties count as half a win.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .poly import MultiPoly, PolyMap

REFERENCE_TABLE1 = {5: 0.740, 10: 0.763, 50: 0.769, 100: 0.807}


@dataclass
class ExperimentConfig:
    steps: tuple = (5, 10, 50, 100)
    experiments: int = 100
    polys_per_experiment: int = 10
    bound: int = 10
    seed: int = 0
    magnitude: int = 10

    def __post_init__(self):
        self.steps = tuple(int(n) for n in self.steps)
        if min(self.steps, default=0) < 1:
            raise ValueError("every step count must be at least 1")
        for name in ("experiments", "polys_per_experiment", "bound", "magnitude"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class SumOfSquares:
    """l(x) = sum_t (weights[t] . x + offsets[t])^2 with integer data."""

    weights: np.ndarray
    offsets: np.ndarray

    @property
    def nvars(self) -> int:
        return self.weights.shape[1]

    def forms(self, x) -> np.ndarray:
        return self.weights @ np.asarray(x, dtype=np.int64).T + (self.offsets[:, None] if np.ndim(x) == 2 else self.offsets)

    def loss(self, x):
        r = self.forms(x)
        return (r * r).sum(axis=0)

    def gradient(self, x) -> np.ndarray:
        return 2 * self.weights.T @ self.forms(x)

    def poly(self) -> PolyMap:
        """Expanded canonical polynomial n -> 1 over the integers."""
        n = self.nvars
        total = MultiPoly.zero(n)
        for w, c in zip(self.weights.tolist(), self.offsets.tolist()):
            form = MultiPoly.const(n, int(c))
            for j, wj in enumerate(w):
                if wj:
                    form = form + MultiPoly.var(n, j).scale(int(wj))
            total = total + form * form
        return PolyMap(n, [total])


def _signed(rng, size, bound):
    mags = rng.integers(1, bound + 1, size=size)
    return mags * rng.choice(np.array([-1, 1]), size=size)


def generate_polynomial(rng: np.random.Generator, bound: int = 10) -> SumOfSquares:
    n = int(rng.integers(1, bound + 1))
    terms = int(rng.integers(1, bound + 1))
    W = np.zeros((terms, n), dtype=np.int64)
    for t in range(terms):
        k = int(rng.integers(1, n + 1))
        support = rng.choice(n, size=k, replace=False)
        W[t, support] = _signed(rng, k, bound)
    return SumOfSquares(W, _signed(rng, terms, bound).astype(np.int64))


def log_uniform_points(rng: np.random.Generator, count: int, nvars: int, magnitude: int) -> np.ndarray:
    u = rng.random((count, nvars))
    signs = rng.choice(np.array([-1, 1]), size=(count, nvars))
    return signs * np.rint(np.exp(u * math.log(magnitude))).astype(np.int64)


def best_of(l: SumOfSquares, points: np.ndarray):
    losses = l.loss(points)
    i = int(np.argmin(losses))
    return points[i].tolist(), int(losses[i])


def random_search(l: SumOfSquares, N: int, rng: np.random.Generator, magnitude: int = 10):
    if N < 1:
        raise ValueError("N must be at least 1")
    return best_of(l, log_uniform_points(rng, N, l.nvars, magnitude))


def integer_gd_run(l: SumOfSquares, N: int, rng: np.random.Generator = None, magnitude: int = 10, start=None):
    """N unit sign steps from one log-uniform start; best visited point."""
    if N < 1:
        raise ValueError("N must be at least 1")
    x = np.asarray(start, dtype=np.int64) if start is not None else log_uniform_points(rng, 1, l.nvars, magnitude)[0]
    best = (x.tolist(), int(l.loss(x)))
    for _ in range(N):
        x = x - np.sign(l.gradient(x))
        loss = int(l.loss(x))
        if loss < best[1]:
            best = (x.tolist(), loss)
    return best


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list = field(default_factory=list)  # one dict per N
    per_experiment: dict = field(default_factory=dict)  # N -> list of frequencies

    def row(self, N: int) -> dict:
        return next(r for r in self.rows if r["n_steps"] == N)

    def to_json(self) -> str:
        body = {
            "config": asdict(self.config),
            "seed": self.config.seed,
            "rows": self.rows,
            "per_experiment": {str(k): v for k, v in self.per_experiment.items()},
        }
        body["config"]["steps"] = list(self.config.steps)
        return json.dumps(body, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> ExperimentReport:
        d = json.loads(text)
        cfg = ExperimentConfig(**d["config"])
        return cls(cfg, d["rows"], {int(k): v for k, v in d["per_experiment"].items()})

    def per_experiment_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        steps = list(self.config.steps)
        w.writerow(["experiment"] + [f"N={n}" for n in steps])
        for e in range(self.config.experiments):
            w.writerow([e] + [repr(self.per_experiment[n][e]) for n in steps])
        return buf.getvalue()


def run_experiment(cfg: ExperimentConfig, index: int) -> dict:
    """Win frequencies of one experiment, keyed by N. Depends only on (seed, index)."""
    rng = np.random.default_rng([cfg.seed, index])
    polys = [generate_polynomial(rng, cfg.bound) for _ in range(cfg.polys_per_experiment)]
    out = {}
    for N in cfg.steps:
        wins = 0.0
        for j, l in enumerate(polys):
            run_rng = np.random.default_rng([cfg.seed, index, N, j])
            _, gd = integer_gd_run(l, N, run_rng, cfg.magnitude)
            _, rs = random_search(l, N, run_rng, cfg.magnitude)
            wins += 1.0 if gd < rs else 0.5 if gd == rs else 0.0
        out[N] = wins / len(polys)
    return out


def run_table1(cfg: ExperimentConfig | None = None) -> ExperimentReport:
    cfg = cfg or ExperimentConfig()
    results = [run_experiment(cfg, e) for e in range(cfg.experiments)]
    report = ExperimentReport(cfg)
    for N in cfg.steps:
        freqs = [r[N] for r in results]
        arr = np.asarray(freqs)
        stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
        report.rows.append({"n_steps": N, "mean": float(arr.mean()), "stderr": stderr, "experiments": len(arr)})
        report.per_experiment[N] = freqs
    return report
