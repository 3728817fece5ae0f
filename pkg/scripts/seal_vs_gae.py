"""Desk-scale SEAL (labeling trick) vs GAE comparison on a two-block SBM."""

import argparse
import json

import numpy as np

from labeltrick.generators import two_block_sbm
from labeltrick.metrics import split_edges
from labeltrick.pipeline import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=400)
    ap.add_argument("--p-in", type=float, default=0.05)
    ap.add_argument("--p-out", type=float, default=0.005)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--epochs", type=int, default=20)
    ap.add_argument("--scheme", default="drnl")
    ap.add_argument("--metric", default="hits:20")
    args = ap.parse_args()

    budget = dict(hops=1, layers=3, epochs=args.epochs, metric=args.metric)
    rows = []
    for seed in range(args.seeds):
        g = two_block_sbm(args.nodes, args.p_in, args.p_out, seed)
        split = split_edges(g, (0.8, 0.1, 0.1), neg_per_pos=1, seed=seed)
        seal, _ = run_experiment(ExperimentConfig(mode="seal", scheme=args.scheme, seed=seed, **budget), split)
        gae, _ = run_experiment(ExperimentConfig(mode="gae", scheme=None, seed=seed, **budget), split)
        row = {"seed": seed, "edges": g.num_edges,
               "seal": seal.metrics["test"][args.metric], "gae": gae.metrics["test"][args.metric]}
        rows.append(row)
        print(json.dumps(row), flush=True)
    print(json.dumps({"mean_seal": float(np.mean([r["seal"] for r in rows])),
                      "mean_gae": float(np.mean([r["gae"] for r in rows]))}))


if __name__ == "__main__":
    main()
