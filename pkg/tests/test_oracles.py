import itertools
import json

import numpy as np
import pytest

import discordmax as dm
from discordmax.maxcut import LocalMoveBoundError
from discordmax.oracles import EnumerationGuardError

from conftest import complete_graph, random_weighted_graph, two_node_graph


def test_brute_force_signed_k4():
    L = dm.laplacian(complete_graph(4)).dense()
    vec, val = dm.brute_force_opt(L, 2, domain="signed")
    assert val == pytest.approx(4.0)
    assert np.count_nonzero(vec > 0) == 2


def test_brute_force_zero_one_two_node():
    A = dm.discord_matrix(two_node_graph(), "disagreement").A
    vec, val = dm.brute_force_opt(A, 1, domain="zero-one")
    assert val == pytest.approx(1 / 9, abs=1e-12)
    assert np.count_nonzero(vec) == 1


def test_brute_force_zero_matrix():
    _, val = dm.brute_force_opt(np.zeros((5, 5)), 2, domain="zero-one")
    assert val == pytest.approx(0.0, abs=1e-15)


def test_brute_force_respects_radicalization_base():
    rng = np.random.default_rng(0)
    g = random_weighted_graph(6, 0.6, rng)
    A = dm.discord_matrix(g, "disagreement").A
    s0 = rng.random(6)
    vec, val = dm.brute_force_opt(A, 2, domain="zero-one", s0=s0)
    # direct enumeration for comparison
    best = -np.inf
    for X in itertools.combinations(range(6), 2):
        s = s0.copy()
        s[list(X)] = 1.0
        best = max(best, float(s @ A @ s))
    assert val == pytest.approx(best, rel=1e-12)


def test_brute_force_guard():
    with pytest.raises(EnumerationGuardError):
        dm.brute_force_opt(np.zeros((40, 40)), 20, domain="signed", guard=1000)


def test_conditions_vanishing_deviation():
    rng = np.random.default_rng(1)
    g = random_weighted_graph(8, 0.6, rng)
    # exact consensus with c equal to it: every gamma numerator vanishes
    rep = dm.check_theorem_conditions(g, "disagreement", dm.Opinions(np.full(8, 0.6)), 2, c=0.6)
    assert rep.gamma2 == 0.0 and rep.gamma3 == 0.0
    # consensus with a different c keeps eps nonzero while the initial
    # discord is still zero: undefined
    with pytest.raises(ValueError):
        dm.check_theorem_conditions(g, "disagreement", dm.Opinions(np.full(8, 0.6)), 2, c=0.5)


def test_conditions_match_naive_enumeration():
    rng = np.random.default_rng(2)
    for _ in range(5):
        n = 9
        g = random_weighted_graph(n, 0.5, rng)
        sizes = np.array([4, 5])
        labels = dm.CommunityLabels(np.repeat([0, 1], sizes))
        s0 = dm.sample_opinions(labels, [(0.3, 0.15), (0.6, 0.15)], seed=int(rng.integers(1000)))
        k = 3
        c = float(np.mean(s0.values))
        rep = dm.check_theorem_conditions(g, "disagreement", s0, k, c=c)
        # independent direct-summation oracle
        A = dm.discord_matrix(g, "disagreement").A
        denom = float(s0.values @ A @ s0.values)
        eps = s0.values - c
        g1 = g2 = g3 = -np.inf
        for X in itertools.combinations(range(n), k):
            sX = s0.values.copy()
            sX[list(X)] = 1.0
            g1 = max(g1, -float((sX - s0.values) @ A @ s0.values))
            restriction = np.zeros(n)
            restriction[list(X)] = eps[list(X)]
            ones_restricted = np.zeros(n)
            ones_restricted[list(X)] = 1.0
            g2 = max(g2, float(restriction @ A @ restriction))
            g3 = max(g3, abs(float(restriction @ A @ ones_restricted)))
        assert rep.quantifier_mode == "exact-enumeration"
        assert rep.gamma1 == pytest.approx(g1 / denom, abs=1e-10)
        assert rep.gamma2 == pytest.approx(g2 / denom, abs=1e-10)
        assert rep.gamma3 == pytest.approx(g3 / denom, abs=1e-10)


def test_conditions_sampled_mode_is_labeled():
    rng = np.random.default_rng(3)
    g = random_weighted_graph(30, 0.3, rng)
    s0 = dm.Opinions(rng.uniform(0.2, 0.8, 30))
    rep = dm.check_theorem_conditions(g, "disagreement", s0, 10,
                                      max_enumeration=1000, sample_size=500, seed=0)
    assert rep.quantifier_mode == "sampled"


def test_ratio_plug_through_for_one_fifth_gammas():
    for c in (0.0, 0.3, 0.7):
        got = dm.limited_to_full_ratio(0.9, 0.2, 0.2, 0.2, c)
        expected = 0.25 * min(0.9, (1 - 2 / 5 - 2 * (1 - c) / 5) / (1 + 2 * (1 - c) / 5 + 1 / 5))
        assert got == pytest.approx(expected, abs=1e-15)


def test_conditions_validate_c():
    rng = np.random.default_rng(4)
    g = random_weighted_graph(6, 0.8, rng)
    s0 = dm.Opinions(rng.uniform(0.3, 0.7, 6))
    with pytest.raises(ValueError):
        dm.check_theorem_conditions(g, "disagreement", s0, 2, c=1.2)


def test_local_move_bound_zero_value():
    # with zero cut value, PSD forces every flip to be non-increasing in
    # reverse: any node is a witness
    A = dm.random_psd_zero_rowsum(6, np.random.default_rng(5))
    x = np.ones(6)
    node, dec = dm.verify_local_move_bound(A, x)
    assert dec <= 1e-9


def test_local_move_bound_k4():
    L = dm.laplacian(complete_graph(4)).dense()
    x = np.array([1.0, 1.0, 1.0, -1.0])
    node, dec = dm.verify_local_move_bound(L, x)
    # moving to a bisection raises the cut from 3 to 4
    assert dec == pytest.approx(-1.0)


def test_local_move_bound_random_suite():
    rng = np.random.default_rng(6)
    for _ in range(300):
        n = int(rng.integers(4, 31))
        A = dm.random_psd_zero_rowsum(n, rng)
        x = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        if not (x > 0).any():
            x[0] = 1.0
        dm.verify_local_move_bound(A, x)


def test_local_move_bound_raises_on_bad_matrix():
    signed = np.array([[-1.0, 1.0], [1.0, -1.0]])
    with pytest.raises(LocalMoveBoundError):
        dm.verify_local_move_bound(signed, np.array([1.0, 1.0]))


def test_extreme_optimum_centering_matrix():
    A = np.eye(6) - np.full((6, 6), 1 / 6)
    assert dm.verify_extreme_optimum(A, np.random.default_rng(7), n_samples=2000)


def test_extreme_optimum_zero_matrix():
    assert dm.verify_extreme_optimum(np.zeros((5, 5)), np.random.default_rng(8),
                                     n_samples=100)


def test_extreme_optimum_random_psd():
    rng = np.random.default_rng(9)
    for _ in range(20):
        B = rng.standard_normal((8, 8))
        assert dm.verify_extreme_optimum(B.T @ B, rng, n_samples=2000)


def test_ratio_bound_pointwise():
    assert dm.ratio_bound(0.5) == pytest.approx(0.34)
    assert dm.ratio_bound(0.25) == pytest.approx(2.059 * 0.0625)
    assert dm.ratio_bound(0.45) == pytest.approx(1.36 * 0.55 ** 2)
    assert dm.ratio_bound(0.1) == pytest.approx(2.059 * 0.01)
    assert dm.ratio_bound(0.9) == pytest.approx(2.059 * 0.01)
    with pytest.raises(ValueError):
        dm.ratio_bound(0.0)


def test_algorithms_never_beat_brute_force():
    rng = np.random.default_rng(10)
    for _ in range(6):
        n = int(rng.integers(6, 11))
        g = random_weighted_graph(n, 0.5, rng)
        A = dm.discord_matrix(g, "disagreement")
        s0 = dm.Opinions(rng.uniform(0.0, 0.8, n))
        k = int(rng.integers(1, 4))
        _, opt_full = dm.brute_force_opt(A.A, k, domain="zero-one", s0=s0)
        for select in (dm.adaptive_greedy_select, dm.nonadaptive_greedy_select):
            chosen = select(A, s0, k)
            val = float(dm.radicalize(s0, chosen).values @ A.A @ dm.radicalize(s0, chosen).values)
            assert val <= opt_full + 1e-9 * max(1.0, opt_full)
        _, opt_signed = dm.brute_force_opt(A.A, k, domain="signed")
        cut, _ = dm.solve_alpha_balanced_maxcut(
            A.A, dm.SolverConfig(alpha=k / n, trials=20, seed=int(rng.integers(2 ** 31))))
        assert cut.value <= opt_signed + 1e-9 * max(1.0, opt_signed)


def test_check_suite_passes_and_serializes():
    report = dm.run_check_suite(seed=1)
    assert report["all_passed"]
    json.dumps(report)


def test_check_suite_deterministic():
    a = dm.run_check_suite(seed=2)
    b = dm.run_check_suite(seed=2)
    assert a == b
