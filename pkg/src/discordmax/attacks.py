"""Attack algorithms: pick k users to radicalize, with or without opinions.

Full-information algorithms see the discord matrix and the innate
opinions.  Limited-information algorithms see only the graph (the discord
matrix is a pure function of topology); their selection functions do not
take an opinion argument at all, so blindness holds by construction.
"""
from __future__ import annotations

import heapq
import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from .dynamics import (KINDS, Opinions, UndefinedScoreError, discord_matrix,
                       opinion_values, relative_increase)
from .graphs import Graph
from .maxcut import SolverConfig, solve_alpha_balanced_maxcut

FULL = "full"
LIMITED = "limited"

ALGORITHMS = ("sdp", "adaptive_greedy", "nonadaptive_greedy", "degree", "random",
              "influence_max")
# algorithms that never read opinions, regardless of the declared regime
TOPOLOGY_ONLY = ("sdp", "degree", "random", "influence_max")


@dataclass
class AttackSpec:
    """What to run: k targets, information regime, algorithm, seed."""

    k: int
    info: str
    algorithm: str
    seed: int = 0
    simulations: int = 200   # cascade samples for the influence baseline

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.info not in (FULL, LIMITED):
            raise ValueError(f"info must be '{FULL}' or '{LIMITED}'")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm in TOPOLOGY_ONLY and self.info == FULL:
            raise ValueError(f"{self.algorithm} only exists in the limited regime")


@dataclass
class AttackResult:
    chosen: np.ndarray
    s_after: Opinions
    score: float | None
    runtime_s: float
    algorithm: str
    info: str
    k: int

    def __post_init__(self):
        chosen = np.asarray(self.chosen, dtype=np.int64).reshape(-1)
        self.chosen = np.sort(chosen)
        if self.chosen.size != self.k:
            raise ValueError(f"chose {self.chosen.size} nodes, expected k={self.k}")


def radicalize(s0: Opinions, nodes) -> Opinions:
    """Set the innate opinions of the given nodes to 1, leave the rest."""
    vals = opinion_values(s0).copy()
    idx = np.asarray(list(nodes), dtype=np.int64)
    if idx.size:
        vals[idx] = 1.0
    return Opinions(vals, 0.0, 1.0)


def _radicalization_gains(diag: np.ndarray, As: np.ndarray, s: np.ndarray) -> np.ndarray:
    # setting s_u = 1 changes s^T A s by (1-s_u)^2 A_uu + 2 (1-s_u) (A s)_u
    rest = 1.0 - s
    return rest * rest * diag + 2.0 * rest * As


def adaptive_greedy_select(A, s0, k: int) -> np.ndarray:
    """k rounds; each round radicalizes the node with the largest gain
    against the current vector (ties to the lowest id)."""
    s = opinion_values(s0).copy()
    n = s.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for n={n}")
    diag = np.asarray(A.diagonal(), dtype=np.float64) if hasattr(A, "diagonal") else np.diag(A)
    As = A.matvec(s) if hasattr(A, "matvec") else np.asarray(A) @ s
    column = A.column if hasattr(A, "column") else (lambda i: np.asarray(A)[:, i])
    chosen: list[int] = []
    taken = np.zeros(n, dtype=bool)
    for _ in range(k):
        gains = _radicalization_gains(diag, As, s)
        gains[taken] = -np.inf
        u = int(np.argmax(gains))
        bump = 1.0 - s[u]
        As = As + bump * column(u)
        s[u] = 1.0
        taken[u] = True
        chosen.append(u)
    return np.sort(np.array(chosen, dtype=np.int64))


def nonadaptive_greedy_select(A, s0, k: int) -> np.ndarray:
    """Score every node once against s0, then walk the score order and
    commit nodes whose gain against the current vector is positive.

    If fewer than k nodes get committed that way, the highest-scoring
    unchosen nodes fill the set so that exactly k are returned.
    """
    s = opinion_values(s0).copy()
    n = s.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for n={n}")
    diag = np.asarray(A.diagonal(), dtype=np.float64) if hasattr(A, "diagonal") else np.diag(A)
    As = A.matvec(s) if hasattr(A, "matvec") else np.asarray(A) @ s
    column = A.column if hasattr(A, "column") else (lambda i: np.asarray(A)[:, i])
    scores = _radicalization_gains(diag, As, s)
    order = np.argsort(-scores, kind="stable")
    chosen: list[int] = []
    for u in order:
        if len(chosen) >= k:
            break
        u = int(u)
        gain = _radicalization_gains(diag[u:u + 1], As[u:u + 1], s[u:u + 1])[0]
        if gain > 0.0:
            bump = 1.0 - s[u]
            As = As + bump * column(u)
            s[u] = 1.0
            chosen.append(u)
    if len(chosen) < k:
        committed = set(chosen)
        for u in order:
            if len(chosen) >= k:
                break
            if int(u) not in committed:
                chosen.append(int(u))
    return np.sort(np.array(chosen, dtype=np.int64))


def top_degree_nodes(g: Graph, k: int) -> np.ndarray:
    """k nodes of highest weighted degree, ties to the lowest id."""
    if not 1 <= k <= g.n:
        raise ValueError(f"k={k} out of range for n={g.n}")
    deg = g.weighted_degrees()
    order = np.argsort(-deg, kind="stable")
    return np.sort(order[:k].astype(np.int64))


def random_nodes(g: Graph, k: int, seed) -> np.ndarray:
    """Uniform sample of k nodes without replacement."""
    if not 1 <= k <= g.n:
        raise ValueError(f"k={k} out of range for n={g.n}")
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(g.n, size=k, replace=False).astype(np.int64))


def _cascade_worlds(g: Graph, seed, simulations: int) -> list[np.ndarray]:
    """Live-edge samples of the weighted cascade: the directed edge into v
    survives with probability 1/deg(v).  One CSR-style index pair per world."""
    counts = g.neighbor_counts().astype(np.float64)
    u = g.edges[:, 0]
    v = g.edges[:, 1]
    p_uv = 1.0 / counts[v]   # u -> v
    p_vu = 1.0 / counts[u]   # v -> u
    worlds = []
    for w in range(simulations):
        rng = np.random.default_rng([seed, 23, w])
        draws = rng.random((u.size, 2))
        src = np.concatenate([u[draws[:, 0] < p_uv], v[draws[:, 1] < p_vu]])
        dst = np.concatenate([v[draws[:, 0] < p_uv], u[draws[:, 1] < p_vu]])
        order = np.argsort(src, kind="stable")
        src, dst = src[order], dst[order]
        indptr = np.zeros(g.n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        indptr = np.cumsum(indptr)
        worlds.append(np.concatenate([indptr, dst]))
    return worlds


def _world_spread(world: np.ndarray, n: int, seeds: np.ndarray) -> int:
    indptr = world[:n + 1]
    dst = world[n + 1:]
    seen = np.zeros(n, dtype=bool)
    seen[seeds] = True
    frontier = deque(int(s) for s in seeds)
    count = int(seeds.size)
    while frontier:
        node = frontier.popleft()
        for nxt in dst[indptr[node]:indptr[node + 1]]:
            if not seen[nxt]:
                seen[nxt] = True
                count += 1
                frontier.append(int(nxt))
    return count


def influence_max_nodes(g: Graph, k: int, seed, simulations: int = 200) -> np.ndarray:
    """Greedy influence maximization under the weighted cascade model.

    Spread is the average reach over a fixed set of live-edge worlds, so
    repeated evaluations share randomness and the whole selection is
    deterministic for a given seed.  Lazy (CELF) evaluation skips
    re-estimating candidates whose cached gain already loses.
    """
    if not 1 <= k <= g.n:
        raise ValueError(f"k={k} out of range for n={g.n}")
    if simulations < 1:
        raise ValueError("simulations must be >= 1")
    if k == g.n:
        return np.arange(g.n, dtype=np.int64)
    worlds = _cascade_worlds(g, seed, simulations)

    def spread(nodes: np.ndarray) -> float:
        return sum(_world_spread(w, g.n, nodes) for w in worlds) / len(worlds)

    chosen: list[int] = []
    base = 0.0
    # heap entries: (-cached gain, node, round the cache was computed in)
    heap = [(-spread(np.array([u])), u, 0) for u in range(g.n)]
    heapq.heapify(heap)
    for round_no in range(1, k + 1):
        while True:
            neg_gain, u, stamp = heapq.heappop(heap)
            if stamp == round_no:
                chosen.append(u)
                base -= neg_gain
                break
            fresh = spread(np.array(chosen + [u])) - base
            heapq.heappush(heap, (-fresh, u, round_no))
    return np.sort(np.array(chosen, dtype=np.int64))


def sdp_limited_info_select(g: Graph, kind: str, k: int, config: SolverConfig | None = None,
                            seed: int = 0, matrix=None) -> np.ndarray:
    """Balanced max-cut on 4A with alpha = k/n; the +1 side is the target set."""
    if not 1 <= k <= g.n:
        raise ValueError(f"k={k} out of range for n={g.n}")
    if k == g.n:
        return np.arange(g.n, dtype=np.int64)
    A = matrix if matrix is not None else discord_matrix(g, kind)
    scaled = 4.0 * (A.A if hasattr(A, "A") else np.asarray(A, dtype=np.float64))
    if config is None:
        config = SolverConfig(alpha=k / g.n, seed=seed)
    cut, _ = solve_alpha_balanced_maxcut(scaled, config)
    return np.sort(cut.S.astype(np.int64))


def select_limited_info(g: Graph, kind: str, algorithm: str, k: int, seed: int = 0,
                        matrix=None, sdp_config: SolverConfig | None = None,
                        simulations: int = 200) -> np.ndarray:
    """Dispatch for the topology-only selection algorithms.

    ``matrix`` may carry a precomputed discord matrix for the graph; it is
    a function of the topology alone, so passing it changes nothing about
    what the algorithms can see.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if algorithm == "sdp":
        return sdp_limited_info_select(g, kind, k, config=sdp_config, seed=seed, matrix=matrix)
    if algorithm == "degree":
        return top_degree_nodes(g, k)
    if algorithm == "random":
        return random_nodes(g, k, seed)
    if algorithm == "influence_max":
        return influence_max_nodes(g, k, seed, simulations=simulations)
    A = matrix if matrix is not None else discord_matrix(g, kind)
    zeros = np.zeros(g.n)
    if algorithm == "adaptive_greedy":
        return adaptive_greedy_select(A, zeros, k)
    if algorithm == "nonadaptive_greedy":
        return nonadaptive_greedy_select(A, zeros, k)
    raise ValueError(f"unknown limited-information algorithm {algorithm!r}")


def select_full_info(A, s0, algorithm: str, k: int) -> np.ndarray:
    """Dispatch for the opinion-aware greedy algorithms."""
    if algorithm == "adaptive_greedy":
        return adaptive_greedy_select(A, s0, k)
    if algorithm == "nonadaptive_greedy":
        return nonadaptive_greedy_select(A, s0, k)
    raise ValueError(f"unknown full-information algorithm {algorithm!r}")


def run_attack(g: Graph, kind: str, spec: AttackSpec, s0: Opinions | None = None,
               matrix=None, sdp_config: SolverConfig | None = None) -> AttackResult:
    """Select a target set, radicalize it against s0, and score the result.

    Timing covers the selection call only.  When s0 is omitted (limited
    information without ground truth), scoring starts from all-zero
    opinions and the relative score is undefined (None).
    """
    A = matrix if matrix is not None else discord_matrix(g, kind)
    start = time.perf_counter()
    if spec.info == FULL:
        if s0 is None:
            raise ValueError("full-information attacks need the innate opinions")
        chosen = select_full_info(A, s0, spec.algorithm, spec.k)
    else:
        chosen = select_limited_info(g, kind, spec.algorithm, spec.k, seed=spec.seed,
                                     matrix=A, sdp_config=sdp_config,
                                     simulations=spec.simulations)
    runtime = time.perf_counter() - start
    base = s0 if s0 is not None else Opinions(np.zeros(g.n), 0.0, 1.0)
    s_after = radicalize(base, chosen)
    score = None
    if s0 is not None:
        try:
            score = relative_increase(A, s0, s_after)
        except UndefinedScoreError:
            score = None
    return AttackResult(chosen=chosen, s_after=s_after, score=score, runtime_s=runtime,
                        algorithm=spec.algorithm, info=spec.info, k=spec.k)
