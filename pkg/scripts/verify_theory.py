"""Run the theory verification suite and print per-part verdicts."""

import argparse

from labeltrick.pipeline import verify_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--level", default="fast", choices=["fast", "exhaustive"])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rep = verify_suite(args.level, args.seed)
    for part, ok in rep.metrics["verdicts"].items():
        print(f"{part:16s} {'ok' if ok else 'FAILED'}")
    print(f"overall: {'ok' if rep.passed else 'FAILED'} in {rep.wall_clock:.1f}s")


if __name__ == "__main__":
    main()
