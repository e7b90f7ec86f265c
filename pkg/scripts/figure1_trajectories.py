"""Integer polynomial state maps for x^2 and 2x^2 - 1, written as CSV.

Each file holds (t, s(t), l(s(t))) for t = 1..m+1 together with the solved
polynomial, and is checked as a gradient flow before it is written.
"""

import argparse
from pathlib import Path

from genopt import statemap
from genopt.flow import check_descending, gradient_flow, inner_product_identity, verify_flow

CASES = {"square": (1, 0, 0), "shifted": (2, 0, -1)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=6)
    ap.add_argument("--outdir", default="figure1")
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    for name, (a, b, c) in CASES.items():
        x0 = statemap.smallest_anchor(a, b, args.m)
        sol = statemap.solve(statemap.build_system(a, b, c, args.m, x0))
        f = gradient_flow(sol.objective(), sol.state_map(), range(1, args.m + 1))
        checks = [verify_flow(f), check_descending(f, 1), inner_product_identity(f)]
        status = ", ".join(f"{r.check}={'ok' if r.passed else 'FAIL'}" for r in checks)
        path = out / f"{name}.csv"
        path.write_text(statemap.to_csv(sol))
        print(f"{name}: a={a} b={b} c={c} x0={x0} -> {path} [{status}]")
        for t, s, loss in sol.trajectory:
            print(f"  t={t}  s={s}  loss={loss}")


if __name__ == "__main__":
    main()
