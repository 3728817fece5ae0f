"""Command-line entry point: ``labeltrick <subcommand> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import engine
from .graph import GraphError, IdMap, extract_enclosing_subgraph, read_edge_list, read_features
from .labeling import LabelingScheme, apply_labeling
from .metrics import parse_metric, split_edges
from .pipeline import (
    ConfigError,
    ExperimentConfig,
    Report,
    StageError,
    evaluate_heuristic,
    extract_link,
    load_split,
    run_experiment,
    score_with_checkpoint,
    verify_suite,
    wl_bench,
)


class UsageError(Exception):
    pass


def _ints(text: str, sep: str = ",") -> list[int]:
    try:
        return [int(x) for x in text.split(sep)]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_ingest(args) -> int:
    g, rep = read_edge_list(args.edges)
    summary = rep.summary()
    if args.features:
        feats = read_features(args.features, g.num_nodes)
        summary["feature_dim"] = int(feats.shape[1])
    _emit(json.dumps(summary, indent=2, sort_keys=True), args.out)
    return 0


def cmd_split(args) -> int:
    g, rep = read_edge_list(args.edges)
    ratios = [float(x) for x in args.ratios.split(",")]
    split = split_edges(g, ratios, args.neg, args.seed)
    split.original_ids = rep.original_ids
    split.save(args.outdir)
    _emit(json.dumps({"train": len(split.train), "valid": len(split.valid), "test": len(split.test),
                      "valid_neg": len(split.valid_neg), "test_neg": len(split.test_neg),
                      "seed": args.seed, "outdir": args.outdir}, indent=2, sort_keys=True), args.out)
    return 0


def cmd_label(args) -> int:
    id_map = IdMap()
    g, _ = read_edge_list(args.edges, id_map)
    raw = _ints(args.link)
    if len(raw) != 2 or any(r not in id_map.to_local for r in raw):
        raise UsageError(f"--link must name two nodes of the graph, got {args.link!r}")
    link = tuple(id_map.to_local[r] for r in raw)
    if args.remove_link:
        sg = extract_link(g, link, args.hops)
    else:
        sg = extract_enclosing_subgraph(g, link, args.hops)
    labels = apply_labeling(LabelingScheme(args.scheme, args.dmax), sg)
    lines = ["node\tlabel"]
    lines += [f"{id_map.original[p]}\t{labels.format(i)}" for i, p in enumerate(sg.parent_ids)]
    _emit("\n".join(lines), args.out)
    return 0


def cmd_train(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    split, feats = load_split(args.data, args.features)
    report, model = run_experiment(cfg, split, feats)
    if args.checkpoint:
        engine.save_model(model, args.checkpoint, {"config": cfg.to_dict()})
        report.details["checkpoint"] = args.checkpoint
    _emit(report.to_json(), args.out)
    return 0


def cmd_eval(args) -> int:
    parse_metric(args.metric)
    split, feats = load_split(args.data, args.features)
    report = Report("eval", {"method": args.method, "metric": args.metric,
                             "use_valid_edges": args.use_valid_edges, "split": args.split})
    if args.method == "model":
        if not args.checkpoint:
            raise UsageError("--method model needs --checkpoint")
        model, meta = engine.load_model(args.checkpoint)
        cfg = ExperimentConfig.from_dict(meta["config"])
        value = score_with_checkpoint(model, cfg, split, args.metric, feats,
                                      args.use_valid_edges, args.split)
    else:
        value = evaluate_heuristic(split, args.method, args.metric, args.use_valid_edges,
                                   args.seed, args.split)
    report.metrics = {args.split: {args.metric: value}}
    _emit(report.to_json(), args.out)
    return 0


def cmd_verify(args) -> int:
    report = verify_suite(args.level, args.seed)
    _emit(report.to_json(), args.out)
    return 0 if report.passed else 1


def cmd_wl_bench(args) -> int:
    report = wl_bench(args.degree, _ints(args.sizes), args.hops, args.seeds)
    _emit(report.to_json(), args.out)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="labeltrick", description="Labeling tricks for link prediction.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("ingest", cmd_ingest, "parse an edge list and report ingest stats")
    sp.add_argument("edges")
    sp.add_argument("--features")

    sp = add("split", cmd_split, "split edges into train/valid/test with negatives")
    sp.add_argument("edges")
    sp.add_argument("--ratios", default="0.8,0.1,0.1")
    sp.add_argument("--neg", type=int, default=1, help="negatives per valid/test positive")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--outdir", required=True)

    sp = add("label", cmd_label, "label the enclosing subgraph of one link (TSV)")
    sp.add_argument("edges")
    sp.add_argument("--scheme", required=True, choices=["zo", "drnl", "de", "de+"])
    sp.add_argument("--dmax", type=int)
    sp.add_argument("--hops", type=int, default=1)
    sp.add_argument("--link", required=True, help="u,v in original ids")
    sp.add_argument("--remove-link", action="store_true", help="drop the link itself first")

    sp = add("train", cmd_train, "train a SEAL or GAE model on a split directory")
    sp.add_argument("--config", required=True)
    sp.add_argument("--data", required=True, help="directory written by `split`")
    sp.add_argument("--features")
    sp.add_argument("--checkpoint")

    sp = add("eval", cmd_eval, "evaluate a checkpoint or a heuristic")
    sp.add_argument("--method", required=True, choices=["model", "cn", "aa"])
    sp.add_argument("--metric", default="hits:20", help="hits:K or mrr:N")
    sp.add_argument("--data", required=True)
    sp.add_argument("--features")
    sp.add_argument("--checkpoint")
    sp.add_argument("--split", default="test", choices=["valid", "test"])
    sp.add_argument("--use-valid-edges", action="store_true",
                    help="message-pass over train+valid positives")
    sp.add_argument("--seed", type=int, default=0)

    sp = add("verify", cmd_verify, "run the theory verification suite")
    sp.add_argument("--level", default="fast", choices=["fast", "exhaustive"])
    sp.add_argument("--seed", type=int, default=0)

    sp = add("wl-bench", cmd_wl_bench, "count WL-indistinguishable link pairs on regular graphs")
    sp.add_argument("--degree", type=int, default=3)
    sp.add_argument("--sizes", default="16,24,32")
    sp.add_argument("--hops", type=int, default=2)
    sp.add_argument("--seeds", type=int, default=20)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return args.fn(args)
    except (UsageError, ConfigError, GraphError, FileNotFoundError, ValueError, StageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
