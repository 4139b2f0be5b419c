import math

import numpy as np
import pytest

import discordmax as dm
from discordmax.dynamics import UndefinedScoreError
from discordmax.experiments import (ExperimentConfig, ExperimentRecord,
                                    parse_algorithm, read_records_csv,
                                    write_records_csv)


def sbm_config(**overrides):
    base = dict(
        name="sbm-demo",
        graph={"sbm": {"sizes": [20, 20], "p_intra": 0.5, "p_inter": 0.1, "seed": 4}},
        opinions={"gaussian": [[0.1, 0.1], [0.3, 0.1]]},
        kind="disagreement",
        algorithms=["adaptive_greedy:full", "nonadaptive_greedy", "degree", "random"],
        k_fractions=[0.1],
        repeats=2,
        seed=7,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_run_experiment_shape_and_order():
    records = dm.run_experiment(sbm_config())
    assert len(records) == 4 * 1 * 2
    keys = [(r.dataset, r.algorithm, r.info, r.k, r.seed) for r in records]
    assert keys == sorted(keys)


def test_run_experiment_deterministic():
    a = dm.run_experiment(sbm_config())
    b = dm.run_experiment(sbm_config())
    assert [(r.algorithm, r.seed, r.relative_increase) for r in a] == \
           [(r.algorithm, r.seed, r.relative_increase) for r in b]


def test_run_experiment_threads_do_not_change_results():
    a = dm.run_experiment(sbm_config(threads=1))
    b = dm.run_experiment(sbm_config(threads=3))
    assert [(r.algorithm, r.seed, r.final_index) for r in a] == \
           [(r.algorithm, r.seed, r.final_index) for r in b]


def test_record_consistency_enforced():
    with pytest.raises(ValueError):
        ExperimentRecord(dataset="d", n_nodes=2, n_edges=1,
                         normalized_initial_index=1.0, mean_s0=0.5, std_s0=0.1,
                         algorithm="degree", info="limited", k=1, seed=0,
                         initial_index=1.0, final_index=2.0,
                         relative_increase=0.5, runtime_ms=0.0)


def test_records_csv_round_trip(tmp_path):
    records = dm.run_experiment(sbm_config(repeats=1))
    path = tmp_path / "records.csv"
    write_records_csv(records, path)
    back = read_records_csv(path)
    assert [(r.algorithm, r.k, r.relative_increase) for r in back] == \
           [(r.algorithm, r.k, r.relative_increase) for r in records]
    # default output carries no wall-clock noise
    assert all(r.runtime_ms == 0.0 for r in back)


def test_k_sweep_best_score_monotone():
    config = sbm_config(
        graph={"sbm": {"sizes": [150, 150], "p_intra": 0.2, "p_inter": 0.05, "seed": 9}},
        algorithms=["adaptive_greedy:full", "nonadaptive_greedy", "degree"],
        k_fractions=[0.005, 0.01, 0.015, 0.02, 0.025],
        repeats=1)
    records = dm.run_experiment(config)
    best = {}
    for r in records:
        best[r.k] = max(best.get(r.k, -math.inf), r.relative_increase)
    ks = sorted(best)
    assert all(best[a] <= best[b] + 1e-12 for a, b in zip(ks, ks[1:]))


def test_parse_algorithm():
    assert parse_algorithm("sdp") == ("sdp", "limited")
    assert parse_algorithm("adaptive_greedy:full") == ("adaptive_greedy", "full")
    with pytest.raises(ValueError):
        parse_algorithm("degree:full")


def test_regression_collinear_r2_one():
    records = []
    for i, (norm, ratio) in enumerate([(1.0, 0.2), (2.0, 0.4), (3.0, 0.6), (4.0, 0.8)]):
        for info, score in (("limited", ratio), ("full", 1.0)):
            records.append(ExperimentRecord(
                dataset=f"d{i}", n_nodes=10, n_edges=20,
                normalized_initial_index=norm, mean_s0=0.5 + 0.01 * i, std_s0=0.1 + 0.01 * i,
                algorithm="adaptive_greedy", info=info, k=2, seed=0,
                initial_index=1.0, final_index=1.0 + score,
                relative_increase=score, runtime_ms=0.0))
    result = dm.regression_analysis(records)
    assert result["normalized_initial_index"]["r2"] == pytest.approx(1.0, abs=1e-12)


def test_regression_constant_ratio_r2_zero():
    records = []
    for i in range(4):
        for info in ("limited", "full"):
            records.append(ExperimentRecord(
                dataset=f"d{i}", n_nodes=10, n_edges=20,
                normalized_initial_index=float(i), mean_s0=0.1 * i, std_s0=0.05 * i + 0.01,
                algorithm="adaptive_greedy", info=info, k=2, seed=0,
                initial_index=1.0, final_index=2.0,
                relative_increase=1.0, runtime_ms=0.0))
    result = dm.regression_analysis(records)
    assert result["std_s0"]["r2"] == pytest.approx(0.0, abs=1e-12)


def test_regression_needs_three_datasets():
    records = dm.run_experiment(sbm_config(repeats=1))
    with pytest.raises(ValueError):
        dm.regression_analysis(records)


def test_regression_zero_variance_regressor():
    records = []
    for i in range(3):
        for info, score in (("limited", 0.5 + i * 0.1), ("full", 1.0)):
            records.append(ExperimentRecord(
                dataset=f"d{i}", n_nodes=10, n_edges=20,
                normalized_initial_index=1.0, mean_s0=0.2 + 0.1 * i, std_s0=0.1,
                algorithm="adaptive_greedy", info=info, k=2, seed=0,
                initial_index=1.0, final_index=1.0 + score,
                relative_increase=score, runtime_ms=0.0))
    with pytest.raises(UndefinedScoreError):
        dm.regression_analysis(records)


def test_stability_degree_is_deterministic():
    config = sbm_config(algorithms=["degree", "random"], repeats=1)
    out = dm.stability_run(config, repeats=4)
    assert out["degree"]["std"] == 0.0
    assert out["random"]["std"] > 0.0


def test_stability_requires_repeats():
    with pytest.raises(ValueError):
        dm.stability_run(sbm_config(), repeats=1)


def test_stability_sdp_scores_are_tight():
    config = sbm_config(algorithms=["sdp"], repeats=1, sdp_trials=30)
    out = dm.stability_run(config, repeats=5)
    stats = out["sdp"]
    assert stats["std"] <= 0.05 * abs(stats["mean"])


def test_opinions_from_file_and_mismatch(tmp_path):
    g, _ = dm.generate_sbm([6], 0.8, 0.0, seed=1)
    gpath = tmp_path / "g.edges"
    dm.save_edge_list(g, gpath)
    s = dm.Opinions(np.linspace(0.1, 0.9, 5))
    spath = tmp_path / "s.opinions"
    dm.save_opinions(s, spath)
    config = ExperimentConfig(
        name="file-demo", graph={"path": str(gpath)},
        opinions={"path": str(spath)}, algorithms=["degree"], k_fractions=[0.5])
    with pytest.raises(Exception):
        dm.run_experiment(config)
