"""Command-line interface.

Subcommands: indices, generate-sbm, sample-bfs, maxcut, attack, check,
regress, sweep.  Every command is deterministic for a fixed --seed,
including across --threads settings.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import attacks, experiments, oracles
from .dynamics import discord_matrix, index_value, load_opinions, normalized_index
from .graphs import bfs_subsample, generate_sbm, load_edge_list, \
    save_communities, save_edge_list
from .maxcut import SolverConfig, solve_alpha_balanced_maxcut


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, newline="\n")
    else:
        sys.stdout.write(text)


def _original_labels(g, nodes) -> list[int]:
    """Map dense node ids back to the labels used in the input file."""
    if g.id_map is None:
        return [int(u) for u in nodes]
    reverse = {dense: orig for orig, dense in g.id_map.items()}
    return [int(reverse[int(u)]) for u in nodes]


def _emit_json(payload, out: str | None) -> None:
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", out)


def _add_common(parser: argparse.ArgumentParser) -> None:
    # default None so commands can tell "not given" from an explicit 0
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", type=str, default=None, help="output path (default: stdout)")
    parser.add_argument("--threads", type=int, default=1)


def _cmd_indices(args) -> int:
    g = load_edge_list(args.graph)
    s = load_opinions(args.opinions, g.n, id_map=g.id_map)
    payload = {"n_nodes": g.n, "n_edges": g.num_edges,
               "mean_s0": float(np.mean(s.values)),
               "std_s0": float(np.std(s.values))}
    kinds = ("disagreement", "polarization") if args.kind == "both" else (args.kind,)
    for kind in kinds:
        A = discord_matrix(g, kind)
        payload[kind] = index_value(A, s)
        payload[f"normalized_{kind}"] = normalized_index(A, s, g)
    _emit_json(payload, args.out)
    return 0


def _cmd_generate_sbm(args) -> int:
    sizes = [int(tok) for tok in args.sizes.split(",") if tok]
    g, labels = generate_sbm(sizes, args.p_intra, args.p_inter, args.seed)
    save_edge_list(g, args.out)
    if args.communities_out:
        save_communities(labels, args.communities_out)
    sys.stdout.write(json.dumps({"n_nodes": g.n, "n_edges": g.num_edges}) + "\n")
    return 0


def _cmd_sample_bfs(args) -> int:
    g = load_edge_list(args.graph)
    sub = bfs_subsample(g, args.target_n, args.seed)
    save_edge_list(sub, args.out)
    sys.stdout.write(json.dumps({"n_nodes": sub.n, "n_edges": sub.num_edges}) + "\n")
    return 0


def _cmd_maxcut(args) -> int:
    g = None
    if args.matrix:
        A = np.loadtxt(args.matrix)
        A = A.reshape(1, 1) if A.ndim == 0 else A
    else:
        if not args.graph:
            raise SystemExit("maxcut needs --graph with --kind, or --matrix")
        g = load_edge_list(args.graph)
        A = discord_matrix(g, args.kind).A
        if args.scale4:
            A = 4.0 * A
    config = SolverConfig(alpha=args.alpha, trials=args.trials, seed=args.seed,
                          threads=args.threads)
    cut, stats = solve_alpha_balanced_maxcut(A, config)
    if args.out:
        with Path(args.out).open("w", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["trial", "cut_after_rounding", "balance_product",
                             "final_value", "z_score", "beta"])
            for st in stats:
                writer.writerow([st.trial, repr(st.cut_after_rounding),
                                 repr(st.balance_product), repr(st.final_value),
                                 repr(st.z_score), repr(st.beta)])
    nodes = _original_labels(g, cut.S) if g is not None else [int(u) for u in cut.S]
    sys.stdout.write(json.dumps({"value": cut.value, "nodes": nodes}) + "\n")
    return 0


def _cmd_attack(args) -> int:
    g = load_edge_list(args.graph)
    k = args.k if args.k is not None else max(1, round(args.k_fraction * g.n))
    spec = attacks.AttackSpec(k=k, info=args.info, algorithm=args.algorithm,
                              seed=args.seed, simulations=args.simulations)
    s0 = load_opinions(args.opinions, g.n, id_map=g.id_map) if args.opinions else None
    matrix = discord_matrix(g, args.kind)
    sdp_config = None
    if args.algorithm == "sdp" and 1 <= k <= g.n - 1:
        sdp_config = SolverConfig(alpha=k / g.n, trials=args.trials, seed=args.seed,
                                  threads=args.threads)
    result = attacks.run_attack(g, args.kind, spec, s0=s0, matrix=matrix,
                                sdp_config=sdp_config)
    initial = index_value(matrix, s0) if s0 is not None else 0.0
    final = index_value(matrix, result.s_after)
    chosen = _original_labels(g, result.chosen)
    rows = [["dataset", "algorithm", "info", "k", "seed", "initial_index",
             "final_index", "relative_increase", "chosen"],
            [Path(args.graph).stem, args.algorithm, args.info, k, args.seed,
             repr(initial), repr(final),
             repr(result.score) if result.score is not None else "",
             " ".join(str(u) for u in chosen)]]
    if args.out:
        with Path(args.out).open("w", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerows(rows)
    sys.stdout.write(json.dumps({"chosen": chosen,
                                 "initial_index": initial, "final_index": final,
                                 "relative_increase": result.score}) + "\n")
    return 0


def _cmd_check(args) -> int:
    report = oracles.run_check_suite(seed=args.seed)
    _emit_json(report, args.out)
    return 0 if report["all_passed"] else 1


def _cmd_regress(args) -> int:
    records = experiments.read_records_csv(args.records)
    _emit_json(experiments.regression_analysis(records), args.out)
    return 0


def _cmd_sweep(args) -> int:
    config = experiments.ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        config.seed = args.seed
    config.threads = args.threads
    out = args.out or config.out or "records.csv"
    config.out = None   # the CLI writes below, honoring --timings
    records = experiments.run_experiment(config)
    experiments.write_records_csv(records, out, timings=args.timings)
    if args.metadata_out:
        experiments.write_run_metadata(config, args.metadata_out)
    sys.stdout.write(json.dumps({"records": len(records)}) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discordmax",
                                     description="Discord maximization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("indices", help="discord indices of a graph + opinions")
    _add_common(p)
    p.add_argument("--graph", required=True)
    p.add_argument("--opinions", required=True)
    p.add_argument("--kind", choices=["disagreement", "polarization", "both"],
                   default="both")
    p.set_defaults(func=_cmd_indices)

    p = sub.add_parser("generate-sbm", help="write a stochastic block model graph")
    _add_common(p)
    p.add_argument("--sizes", required=True, help="comma-separated community sizes")
    p.add_argument("--p-intra", type=float, required=True)
    p.add_argument("--p-inter", type=float, required=True)
    p.add_argument("--communities-out", type=str, default=None)
    p.set_defaults(func=_cmd_generate_sbm)

    p = sub.add_parser("sample-bfs", help="BFS-subsample a graph to target size")
    _add_common(p)
    p.add_argument("--graph", required=True)
    p.add_argument("--target-n", type=int, required=True)
    p.set_defaults(func=_cmd_sample_bfs)

    p = sub.add_parser("maxcut", help="balanced max-cut on a discord matrix")
    _add_common(p)
    p.add_argument("--graph", type=str, default=None)
    p.add_argument("--kind", choices=["disagreement", "polarization"],
                   default="disagreement")
    p.add_argument("--matrix", type=str, default=None,
                   help="dense whitespace-separated matrix file instead of a graph")
    p.add_argument("--scale4", action="store_true",
                   help="multiply the discord matrix by 4 (attack convention)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--trials", type=int, default=50)
    p.set_defaults(func=_cmd_maxcut)

    p = sub.add_parser("attack", help="run one attack algorithm")
    _add_common(p)
    p.add_argument("--graph", required=True)
    p.add_argument("--opinions", type=str, default=None,
                   help="innate opinions; optional for limited information")
    p.add_argument("--kind", choices=["disagreement", "polarization"],
                   default="disagreement")
    p.add_argument("--algorithm", choices=list(attacks.ALGORITHMS), required=True)
    p.add_argument("--info", choices=[attacks.FULL, attacks.LIMITED],
                   default=attacks.LIMITED)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--k-fraction", type=float, default=None)
    p.add_argument("--trials", type=int, default=50, help="SDP rounding trials")
    p.add_argument("--simulations", type=int, default=200)
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("check", help="run the oracle verification suite")
    _add_common(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("regress", help="regression of limited/full ratios on dataset stats")
    _add_common(p)
    p.add_argument("--records", required=True)
    p.set_defaults(func=_cmd_regress)

    p = sub.add_parser("sweep", help="run an experiment config")
    _add_common(p)
    p.add_argument("--config", required=True)
    p.add_argument("--metadata-out", type=str, default=None)
    p.add_argument("--timings", action="store_true",
                   help="record wall-clock runtimes (breaks byte reproducibility)")
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "attack" and (args.k is None) == (args.k_fraction is None):
        parser.error("attack needs exactly one of --k / --k-fraction")
    if args.command != "sweep" and args.seed is None:
        args.seed = 0
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
