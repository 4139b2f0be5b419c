"""Friedkin-Johnsen dynamics, discord indices, and opinion handling.

Expressed opinions equilibrate at z* = (I+L)^-1 s for innate opinions s.
Both discord measures are quadratic forms s^T A s in the innate opinions:

  disagreement:  A = (I+L)^-1 L (I+L)^-1
  polarization:  A = (I+L)^-1 (I - 11^T/n) (I+L)^-1

Both matrices are positive semidefinite with zero row sums, which every
downstream cut and attack algorithm relies on.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graphs import Graph, CommunityLabels, GraphFormatError, laplacian

DISAGREEMENT = "disagreement"
POLARIZATION = "polarization"
KINDS = (DISAGREEMENT, POLARIZATION)

# Above this size the dense n x n discord matrix is refused and the
# matrix-free operator must be used instead.
DENSE_MATRIX_LIMIT = 5000

_DENSE_SOLVE_LIMIT = 2048


class OpinionRangeError(ValueError):
    """Opinion values outside their declared interval."""


class UndefinedScoreError(ValueError):
    """A score or normalization whose denominator vanishes."""


@dataclass
class Opinions:
    """A vector of innate or expressed opinions with a declared range."""

    values: np.ndarray
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if not self.lo < self.hi:
            raise OpinionRangeError(f"invalid range [{self.lo}, {self.hi}]")
        if values.size and (values.min() < self.lo - 1e-12 or values.max() > self.hi + 1e-12):
            raise OpinionRangeError(
                f"opinion values outside declared range [{self.lo}, {self.hi}]")
        self.values = np.clip(values, self.lo, self.hi)

    def __len__(self) -> int:
        return int(self.values.size)


def opinion_values(s) -> np.ndarray:
    """Accept an Opinions instance or a plain array."""
    if isinstance(s, Opinions):
        return s.values
    return np.asarray(s, dtype=np.float64).reshape(-1)


def _solve_i_plus_l(g: Graph, rhs: np.ndarray) -> np.ndarray:
    lap = laplacian(g)
    if g.n <= _DENSE_SOLVE_LIMIT:
        m = np.eye(g.n) + lap.dense()
        c, low = scipy.linalg.cho_factor(m)
        return scipy.linalg.cho_solve((c, low), rhs)
    lu = spla.splu((sp.identity(g.n, format="csc") + lap.L.tocsc()))
    return lu.solve(rhs)


def equilibrium(g: Graph, s: Opinions) -> Opinions:
    """Equilibrium expressed opinions z* solving (I+L) z = s."""
    vals = opinion_values(s)
    if vals.size != g.n:
        raise ValueError(f"opinion vector length {vals.size} != n={g.n}")
    z = _solve_i_plus_l(g, vals)
    if isinstance(s, Opinions):
        lo, hi = s.lo, s.hi
    else:
        lo = min(0.0, float(vals.min(initial=0.0)))
        hi = max(1.0, float(vals.max(initial=1.0)))
    return Opinions(np.clip(z, lo, hi), lo, hi)


def fj_step(g: Graph, s, z) -> np.ndarray:
    """One synchronous update: each node averages its innate opinion with
    the weighted expressed opinions of its neighbors."""
    sv = opinion_values(s)
    zv = opinion_values(z)
    deg = g.weighted_degrees()
    return (sv + g.adjacency @ zv) / (1.0 + deg)


def iterate_to_equilibrium(g: Graph, s, tol: float = 1e-10, max_steps: int = 1_000_000) -> np.ndarray:
    """Run the update rule from z = s until the sup-norm step change is <= tol."""
    sv = opinion_values(s)
    z = sv.copy()
    for _ in range(max_steps):
        nxt = fj_step(g, sv, z)
        if np.max(np.abs(nxt - z)) <= tol:
            return nxt
        z = nxt
    raise RuntimeError(f"no convergence after {max_steps} iterations")


@dataclass
class DiscordMatrix:
    """Dense discord quadratic-form kernel, symmetric PSD with zero row sums."""

    A: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        A = np.asarray(self.A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("discord matrix must be square")
        scale = max(1.0, float(np.abs(A).max(initial=0.0)))
        if not np.allclose(A, A.T, atol=1e-10 * scale):
            raise ValueError("discord matrix must be symmetric")
        if A.shape[0] and np.max(np.abs(A.sum(axis=1))) > 1e-8 * scale * A.shape[0]:
            raise ValueError("discord matrix row sums must vanish")
        self.A = A

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def quad(self, s) -> float:
        v = opinion_values(s)
        return float(v @ (self.A @ v))

    def matvec(self, s) -> np.ndarray:
        return self.A @ opinion_values(s)

    def column(self, i: int) -> np.ndarray:
        return self.A[:, i]

    def diagonal(self) -> np.ndarray:
        return np.diag(self.A)


class DiscordOperator:
    """Matrix-free discord kernel for graphs too large to densify.

    Quadratic forms cost one linear solve with (I+L); matrix-vector
    products cost two.
    """

    def __init__(self, g: Graph, kind: str):
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        self.kind = kind
        self.n = g.n
        lap = laplacian(g)
        self._L = lap.L.tocsr()
        self._lu = spla.splu(sp.identity(g.n, format="csc") + lap.L.tocsc())
        self._diag: np.ndarray | None = None

    def _solve(self, v: np.ndarray) -> np.ndarray:
        return self._lu.solve(np.asarray(v, dtype=np.float64))

    def quad(self, s) -> float:
        y = self._solve(opinion_values(s))
        if self.kind == DISAGREEMENT:
            return float(y @ (self._L @ y))
        return float(y @ y - (y.sum() ** 2) / self.n)

    def matvec(self, s) -> np.ndarray:
        y = self._solve(opinion_values(s))
        if self.kind == DISAGREEMENT:
            return self._solve(self._L @ y)
        return self._solve(y - y.sum() / self.n)

    def column(self, i: int) -> np.ndarray:
        e = np.zeros(self.n)
        e[i] = 1.0
        return self.matvec(e)

    def diagonal(self) -> np.ndarray:
        if self._diag is None:
            diag = np.empty(self.n)
            e = np.zeros(self.n)
            for i in range(self.n):
                e[i] = 1.0
                diag[i] = self.quad(e)
                e[i] = 0.0
            self._diag = diag
        return self._diag


def discord_matrix(g: Graph, kind: str, dense_limit: int = DENSE_MATRIX_LIMIT) -> DiscordMatrix:
    """Dense discord matrix of the given kind.

    Gated to graphs with at most ``dense_limit`` nodes; use
    :func:`discord_operator` beyond that.
    """
    if g.n > dense_limit:
        raise ValueError(
            f"n={g.n} exceeds the dense limit {dense_limit}; use discord_operator")
    lap = laplacian(g)
    ldense = lap.dense()
    m = np.eye(g.n) + ldense
    c, low = scipy.linalg.cho_factor(m)
    minv = scipy.linalg.cho_solve((c, low), np.eye(g.n))
    if kind == DISAGREEMENT:
        A = minv @ ldense @ minv
    elif kind == POLARIZATION:
        center = np.eye(g.n) - np.full((g.n, g.n), 1.0 / g.n)
        A = minv @ center @ minv
    else:
        raise ValueError(f"kind must be one of {KINDS}")
    return DiscordMatrix(A=0.5 * (A + A.T), kind=kind)


def discord_operator(g: Graph, kind: str) -> DiscordOperator:
    return DiscordOperator(g, kind)


def index_value(A, s) -> float:
    """The discord index s^T A s (disagreement or polarization)."""
    if hasattr(A, "quad"):
        return A.quad(s)
    v = opinion_values(s)
    return float(v @ (np.asarray(A, dtype=np.float64) @ v))


def normalized_index(A, s, g: Graph) -> float:
    """Scale the index by 1e5 per edge (disagreement) or per node (polarization)."""
    kind = getattr(A, "kind", None)
    if kind not in KINDS:
        raise ValueError("normalized_index needs a discord matrix or operator with a kind")
    value = index_value(A, s)
    if kind == DISAGREEMENT:
        if g.num_edges == 0:
            raise UndefinedScoreError("normalized disagreement needs at least one edge")
        return value * 1e5 / g.num_edges
    return value * 1e5 / g.n


def _quad_noise_floor(A, values: np.ndarray) -> float:
    """Rounding-noise scale of a quadratic form; 0 when the diagonal is
    unavailable cheaply (matrix-free operators)."""
    if isinstance(A, DiscordMatrix):
        diag_max = float(np.max(np.abs(np.diag(A.A)), initial=0.0))
    elif isinstance(A, np.ndarray):
        diag_max = float(np.max(np.abs(np.diag(A)), initial=0.0))
    else:
        return 0.0
    return 1e-12 * diag_max * float(values @ values)


def relative_increase(A, s_before, s_after) -> float:
    """Relative change of the index: (after - before) / before."""
    vals = opinion_values(s_before)
    base = index_value(A, s_before)
    if base <= _quad_noise_floor(A, vals):
        raise UndefinedScoreError("relative increase undefined for zero initial index")
    return (index_value(A, s_after) - base) / base


def rescale_opinions(s, src: tuple[float, float], dst: tuple[float, float]) -> Opinions:
    """Affine map of opinions from [a, b] onto [x, y] (endpoints to endpoints)."""
    a, b = float(src[0]), float(src[1])
    x, y = float(dst[0]), float(dst[1])
    if not (a < b and x < y):
        raise OpinionRangeError("intervals must be nondegenerate")
    vals = opinion_values(s)
    if vals.size and (vals.min() < a - 1e-12 or vals.max() > b + 1e-12):
        raise OpinionRangeError(f"values outside source interval [{a}, {b}]")
    scale = (y - x) / (b - a)
    shift = 0.5 * (x + y - (a + b) * scale)
    return Opinions(scale * vals + shift, x, y)


def sample_opinions(labels: CommunityLabels, params, seed: int) -> Opinions:
    """Draw opinions per node from its community's Gaussian, clipped to [0, 1].

    ``params`` maps community index to (mean, std); a list or tuple indexed
    by community works too.
    """
    k = labels.n_communities
    if isinstance(params, dict):
        table = [params[i] for i in range(k)]
    else:
        table = list(params)
        if len(table) < k:
            raise ValueError(f"{k} communities but only {len(table)} parameter pairs")
    means = np.array([float(table[lab][0]) for lab in labels.labels])
    stds = np.array([float(table[lab][1]) for lab in labels.labels])
    if np.any(stds < 0):
        raise ValueError("standard deviations must be nonnegative")
    rng = np.random.default_rng(seed)
    vals = rng.normal(means, stds)
    return Opinions(np.clip(vals, 0.0, 1.0), 0.0, 1.0)


def flip_opinions(s: Opinions) -> Opinions:
    """Mirror opinions around 0.5: s -> 1 - s.  Leaves both indices unchanged."""
    vals = opinion_values(s)
    if vals.size and (vals.min() < -1e-12 or vals.max() > 1.0 + 1e-12):
        raise OpinionRangeError("flip requires opinions in [0, 1]")
    return Opinions(1.0 - vals, 0.0, 1.0)


def load_opinions(path: str | Path, n: int, lo: float = 0.0, hi: float = 1.0,
                  id_map: dict[int, int] | None = None) -> Opinions:
    """Parse "node value" lines with '#' comments.

    Every node must appear exactly once and out-of-range values are
    rejected rather than clipped.
    """
    path = Path(path)
    raw: dict[int, float] = {}
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphFormatError(f"{path}:{lineno}: expected 'node value'")
            try:
                node = int(parts[0])
                value = float(parts[1])
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
            if id_map is not None:
                if node not in id_map:
                    raise GraphFormatError(f"{path}:{lineno}: unknown node {node}")
                node = id_map[node]
            if node < 0 or node >= n:
                raise GraphFormatError(f"{path}:{lineno}: node {node} out of range")
            if node in raw:
                raise GraphFormatError(f"{path}:{lineno}: duplicate entry for node {node}")
            if value < lo - 1e-12 or value > hi + 1e-12:
                raise OpinionRangeError(
                    f"{path}:{lineno}: value {value} outside [{lo}, {hi}]")
            raw[node] = value
    if len(raw) != n:
        raise GraphFormatError(f"{path}: {len(raw)} opinions, expected {n}")
    return Opinions(np.array([raw[i] for i in range(n)]), lo, hi)


def save_opinions(s: Opinions, path: str | Path) -> None:
    path = Path(path)
    vals = opinion_values(s)
    with path.open("w", newline="\n") as fh:
        for node, value in enumerate(vals):
            fh.write(f"{node} {float(value)!r}\n")
