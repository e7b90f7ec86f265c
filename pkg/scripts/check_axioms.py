"""Run every derivative axiom on every instance and print a summary grid."""

import argparse
import time

from genopt.laws import ALL_LAWS, INSTANCES, check_law


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cases", type=int, default=200)
    ap.add_argument("--smooth-cases", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    names = list(INSTANCES)
    print(f"{'law':<6}" + "".join(f"{n:>12}" for n in names))
    bad = 0
    t0 = time.perf_counter()
    for law in ALL_LAWS:
        cells = []
        for inst in names:
            cases = args.smooth_cases if inst == "smooth" else args.cases
            r = check_law(law, inst, cases, args.seed)
            bad += len(r.failures)
            cells.append(f"{r.cases - len({f['case'] for f in r.failures})}/{r.cases}")
        print(f"{law:<6}" + "".join(f"{c:>12}" for c in cells))
    print(f"{bad} failures, {time.perf_counter() - t0:.1f}s")
    raise SystemExit(1 if bad else 0)


if __name__ == "__main__":
    main()
