"""Experiment harness: seeded attack sweeps, records, regression, stability.

A run is fully determined by its config and master seed.  Records are
kept in a canonical order (dataset, algorithm, info, k, seed) so the CSV
output never depends on scheduling.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import attacks
from .attacks import FULL, LIMITED, TOPOLOGY_ONLY, AttackSpec
from .dynamics import (DENSE_MATRIX_LIMIT, KINDS, Opinions, UndefinedScoreError,
                       discord_matrix, discord_operator, index_value, load_opinions,
                       normalized_index, sample_opinions)
from .graphs import Graph, CommunityLabels, generate_sbm, load_communities, load_edge_list
from .maxcut import SolverConfig

CSV_COLUMNS = ("dataset", "n_nodes", "n_edges", "normalized_initial_index",
               "mean_s0", "std_s0", "algorithm", "info", "k", "seed",
               "initial_index", "final_index", "relative_increase", "runtime_ms")


@dataclass
class ExperimentRecord:
    """One (dataset, algorithm, k, seed) cell of a sweep."""

    dataset: str
    n_nodes: int
    n_edges: int
    normalized_initial_index: float
    mean_s0: float
    std_s0: float
    algorithm: str
    info: str
    k: int
    seed: int
    initial_index: float
    final_index: float
    relative_increase: float
    runtime_ms: float

    def __post_init__(self):
        if self.initial_index > 0.0 and math.isfinite(self.relative_increase):
            recomputed = (self.final_index - self.initial_index) / self.initial_index
            if abs(recomputed - self.relative_increase) > 1e-9 * max(1.0, abs(recomputed)):
                raise ValueError("relative increase inconsistent with index fields")


@dataclass
class ExperimentConfig:
    """Declarative description of a sweep; JSON-mirrorable."""

    name: str
    graph: dict
    opinions: dict
    kind: str = "disagreement"
    algorithms: list[str] = field(default_factory=lambda: ["adaptive_greedy:full", "sdp"])
    k_fractions: list[float] = field(default_factory=lambda: [0.1])
    ks: list[int] | None = None
    repeats: int = 1
    seed: int = 0
    threads: int = 1
    communities: str | None = None
    sdp_trials: int = 50
    simulations: int = 200
    out: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.ks is None:
            for f in self.k_fractions:
                if not 0.0 < f <= 1.0:
                    raise ValueError(f"k fraction {f} outside (0, 1]")

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        with Path(path).open() as fh:
            payload = json.load(fh)
        return cls(**payload)


def parse_algorithm(token: str) -> tuple[str, str]:
    """"name" or "name:full" / "name:limited"; the default regime is limited."""
    if ":" in token:
        name, info = token.split(":", 1)
    else:
        name, info = token, LIMITED
    if name in TOPOLOGY_ONLY and info == FULL:
        raise ValueError(f"{name} only exists in the limited regime")
    return name, info


def _cell_seed(master: int, *parts: int) -> int:
    return int(np.random.SeedSequence([master, *parts]).generate_state(1)[0])


def load_dataset(config: ExperimentConfig) -> tuple[Graph, CommunityLabels | None]:
    if "path" in config.graph:
        g = load_edge_list(config.graph["path"])
        labels = None
        if config.communities:
            labels = load_communities(config.communities, g.n, g.id_map)
        return g, labels
    if "sbm" in config.graph:
        params = config.graph["sbm"]
        seed = params.get("seed", _cell_seed(config.seed, 3))
        g, labels = generate_sbm(params["sizes"], params["p_intra"], params["p_inter"], seed)
        return g, labels
    raise ValueError("graph spec needs 'path' or 'sbm'")


def opinions_for_repeat(config: ExperimentConfig, g: Graph,
                        labels: CommunityLabels | None, repeat: int) -> Opinions:
    spec = config.opinions
    if "path" in spec:
        return load_opinions(spec["path"], g.n, id_map=g.id_map)
    if "gaussian" in spec:
        if labels is None:
            raise ValueError("community-Gaussian opinions need community labels")
        return sample_opinions(labels, spec["gaussian"], _cell_seed(config.seed, 5, repeat))
    if spec.get("zero"):
        return Opinions(np.zeros(g.n), 0.0, 1.0)
    raise ValueError("opinion spec needs 'path', 'gaussian', or 'zero'")


def resolve_ks(config: ExperimentConfig, n: int) -> list[int]:
    if config.ks is not None:
        ks = [int(k) for k in config.ks]
    else:
        ks = [max(1, round(f * n)) for f in config.k_fractions]
    for k in ks:
        if not 1 <= k <= n:
            raise ValueError(f"k={k} out of range for n={n}")
    return ks


def run_experiment(config: ExperimentConfig) -> list[ExperimentRecord]:
    """Run every (algorithm, k, repeat) cell and return canonical records."""
    g, labels = load_dataset(config)
    matrix = (discord_matrix(g, config.kind) if g.n <= DENSE_MATRIX_LIMIT
              else discord_operator(g, config.kind))
    algs = [parse_algorithm(token) for token in config.algorithms]
    ks = resolve_ks(config, g.n)

    cells = []
    for rep in range(config.repeats):
        s0 = opinions_for_repeat(config, g, labels, rep)
        if len(s0) != g.n:
            raise ValueError(f"opinion length {len(s0)} != n={g.n}")
        initial = index_value(matrix, s0)
        norm = normalized_index(matrix, s0, g)
        mean = float(np.mean(s0.values))
        std = float(np.std(s0.values))
        for ai, (alg, info) in enumerate(algs):
            for ki, k in enumerate(ks):
                seed = _cell_seed(config.seed, 7, rep, ai, ki)
                cells.append((s0, initial, norm, mean, std, alg, info, k, seed))

    def run_cell(cell) -> ExperimentRecord:
        s0, initial, norm, mean, std, alg, info, k, seed = cell
        spec = AttackSpec(k=k, info=info, algorithm=alg, seed=seed,
                          simulations=config.simulations)
        sdp_config = SolverConfig(alpha=k / g.n, trials=config.sdp_trials, seed=seed) \
            if alg == "sdp" and 1 <= round(k / g.n * g.n) <= g.n - 1 else None
        result = attacks.run_attack(g, config.kind, spec, s0=s0, matrix=matrix,
                                    sdp_config=sdp_config)
        final = index_value(matrix, result.s_after)
        rel = result.score if result.score is not None else math.nan
        return ExperimentRecord(
            dataset=config.name, n_nodes=g.n, n_edges=g.num_edges,
            normalized_initial_index=norm, mean_s0=mean, std_s0=std,
            algorithm=alg, info=info, k=k, seed=seed, initial_index=initial,
            final_index=final, relative_increase=rel,
            runtime_ms=result.runtime_s * 1000.0)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            records = list(pool.map(run_cell, cells))
    else:
        records = [run_cell(cell) for cell in cells]
    records.sort(key=lambda r: (r.dataset, r.algorithm, r.info, r.k, r.seed))
    if config.out:
        write_records_csv(records, config.out)
    return records


def write_records_csv(records: list[ExperimentRecord], path: str | Path,
                      timings: bool = False) -> None:
    """Write records with the fixed column order.

    Timing is wall clock and would break byte-for-byte reproducibility, so
    the runtime column carries 0.0 unless ``timings`` is set.
    """
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([
                r.dataset, r.n_nodes, r.n_edges, repr(r.normalized_initial_index),
                repr(r.mean_s0), repr(r.std_s0), r.algorithm, r.info, r.k, r.seed,
                repr(r.initial_index), repr(r.final_index), repr(r.relative_increase),
                repr(r.runtime_ms) if timings else repr(0.0),
            ])


def read_records_csv(path: str | Path) -> list[ExperimentRecord]:
    path = Path(path)
    records = []
    with path.open() as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            records.append(ExperimentRecord(
                dataset=row["dataset"], n_nodes=int(row["n_nodes"]),
                n_edges=int(row["n_edges"]),
                normalized_initial_index=float(row["normalized_initial_index"]),
                mean_s0=float(row["mean_s0"]), std_s0=float(row["std_s0"]),
                algorithm=row["algorithm"], info=row["info"], k=int(row["k"]),
                seed=int(row["seed"]), initial_index=float(row["initial_index"]),
                final_index=float(row["final_index"]),
                relative_increase=float(row["relative_increase"]),
                runtime_ms=float(row["runtime_ms"])))
    return records


def write_run_metadata(config: ExperimentConfig, path: str | Path) -> None:
    import scipy

    from . import __version__

    payload = {
        "name": config.name, "graph": config.graph, "opinions": config.opinions,
        "kind": config.kind, "algorithms": config.algorithms,
        "k_fractions": config.k_fractions, "ks": config.ks,
        "repeats": config.repeats, "seed": config.seed, "threads": config.threads,
        "communities": config.communities, "sdp_trials": config.sdp_trials,
        "simulations": config.simulations, "out": config.out,
        "versions": {"discordmax": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__},
    }
    with Path(path).open("w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _ols(x: np.ndarray, y: np.ndarray) -> dict:
    var = float(np.var(x))
    if var == 0.0:
        raise UndefinedScoreError("regressor has zero variance")
    slope = float(np.cov(x, y, bias=True)[0, 1] / var)
    intercept = float(np.mean(y) - slope * np.mean(x))
    residuals = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    ss_res = float(np.sum(residuals ** 2))
    r2 = 0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return {"slope": slope, "intercept": intercept, "r2": r2}


def regression_analysis(records: list[ExperimentRecord]) -> dict:
    """Regress best-limited / best-full score ratios on dataset parameters.

    Returns {parameter: {slope, intercept, r2}} for the normalized initial
    index, the opinion mean, and the opinion standard deviation.
    """
    by_dataset: dict[str, list[ExperimentRecord]] = {}
    for r in records:
        by_dataset.setdefault(r.dataset, []).append(r)
    names, ratios, norm, mean, std = [], [], [], [], []
    for name in sorted(by_dataset):
        rows = by_dataset[name]
        limited = [r.relative_increase for r in rows if r.info == LIMITED
                   and not math.isnan(r.relative_increase)]
        full = [r.relative_increase for r in rows if r.info == FULL
                and not math.isnan(r.relative_increase)]
        if not limited or not full:
            continue
        names.append(name)
        ratios.append(max(limited) / max(full))
        norm.append(float(np.mean([r.normalized_initial_index for r in rows])))
        mean.append(float(np.mean([r.mean_s0 for r in rows])))
        std.append(float(np.mean([r.std_s0 for r in rows])))
    if len(names) < 3:
        raise ValueError(f"need at least 3 datasets with both regimes, got {len(names)}")
    y = np.array(ratios)
    return {
        "datasets": names,
        "ratios": ratios,
        "normalized_initial_index": _ols(np.array(norm), y),
        "mean_s0": _ols(np.array(mean), y),
        "std_s0": _ols(np.array(std), y),
    }


def stability_run(config: ExperimentConfig, repeats: int) -> dict:
    """Mean and sample standard deviation of the score per algorithm.

    The opinion vector is fixed (repeat 0 of the config); only algorithm
    seeds vary across repeats.
    """
    if repeats < 2:
        raise ValueError("stability needs at least 2 repeats")
    g, labels = load_dataset(config)
    matrix = (discord_matrix(g, config.kind) if g.n <= DENSE_MATRIX_LIMIT
              else discord_operator(g, config.kind))
    s0 = opinions_for_repeat(config, g, labels, 0)
    ks = resolve_ks(config, g.n)
    out: dict = {}
    for ai, token in enumerate(config.algorithms):
        alg, info = parse_algorithm(token)
        k = ks[0]
        scores = []
        for rep in range(repeats):
            seed = _cell_seed(config.seed, 17, rep, ai)
            spec = AttackSpec(k=k, info=info, algorithm=alg, seed=seed,
                              simulations=config.simulations)
            sdp_config = SolverConfig(alpha=k / g.n, trials=config.sdp_trials,
                                      seed=seed) if alg == "sdp" else None
            result = attacks.run_attack(g, config.kind, spec, s0=s0, matrix=matrix,
                                        sdp_config=sdp_config)
            if result.score is None:
                raise UndefinedScoreError("stability scores need a positive initial index")
            scores.append(result.score)
        out[token] = {"mean": float(np.mean(scores)),
                      "std": float(np.std(scores, ddof=1))}
    return out
