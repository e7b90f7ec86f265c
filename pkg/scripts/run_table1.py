"""Integer gradient descent vs random search, printed next to the reference table.

    python3 scripts/run_table1.py --seed 0 --out table1.json
"""

import argparse
import time

from genopt.experiment import REFERENCE_TABLE1, ExperimentConfig, run_table1


def main():
    d = ExperimentConfig()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=d.seed)
    ap.add_argument("--experiments", type=int, default=d.experiments)
    ap.add_argument("--polys", type=int, default=d.polys_per_experiment)
    ap.add_argument("--magnitude", type=int, default=d.magnitude)
    ap.add_argument("--out")
    args = ap.parse_args()

    cfg = ExperimentConfig(experiments=args.experiments, polys_per_experiment=args.polys,
                           seed=args.seed, magnitude=args.magnitude)
    t0 = time.perf_counter()
    report = run_table1(cfg)
    print(f"config: {cfg}  ({time.perf_counter() - t0:.1f}s)")
    print(f"{'N':>5}  {'freq':>6}  {'stderr':>6}  {'ref':>5}")
    for row in report.rows:
        ref = REFERENCE_TABLE1.get(row["n_steps"])
        print(f"{row['n_steps']:>5}  {row['mean']:.3f}  {row['stderr']:.3f}  {ref if ref else '':>5}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_json())


if __name__ == "__main__":
    main()
