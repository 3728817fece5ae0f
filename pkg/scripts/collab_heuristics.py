"""CN / AA Hits@50 on a pre-fetched collaboration split directory.

The directory must hold train/valid/test/valid_neg/test_neg edge lists.
Validation edges are added to the input graph before scoring test links.
"""

import argparse

from labeltrick.metrics import EdgeSplit
from labeltrick.pipeline import evaluate_heuristic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("data")
    ap.add_argument("--metric", default="hits:50")
    args = ap.parse_args()
    split = EdgeSplit.load(args.data)
    for method in ("cn", "aa"):
        value = evaluate_heuristic(split, method, args.metric, use_valid_edges=True)
        print(f"{method.upper()} test {args.metric}: {100 * value:.2f}")


if __name__ == "__main__":
    main()
