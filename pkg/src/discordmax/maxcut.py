"""Balanced max-cut over PSD matrices with zero row sums.

Maximize (1/4) x^T A x over sign vectors whose +1 side has exactly
round(alpha*n) entries.  A may have mixed-sign off-diagonal entries; the
only structure required is symmetry, positive semidefiniteness, and
A 1 = 0.

The pipeline follows the relax-round-rebalance scheme: a low-rank
factorized SDP relaxation with unit-norm rows and a single balance
constraint (handled by an augmented Lagrangian), Gaussian hyperplane
rounding, then a greedy pass that moves one node at a time until the
cardinality target holds.  The greedy step is safe for mixed-sign A: with
zero row sums there is always a move that costs at most 2M/|side|, and
the solver asserts this bound on every move it takes.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.optimize


class SdpPreconditionError(ValueError):
    """Input matrix or balance target violates the solver's requirements."""


class SdpConvergenceError(RuntimeError):
    """The factorized SDP did not reach its tolerances."""

    def __init__(self, message: str, grad_norm: float, constraint_residual: float):
        super().__init__(f"{message} (grad_norm={grad_norm:.3e}, "
                         f"constraint_residual={constraint_residual:.3e})")
        self.grad_norm = grad_norm
        self.constraint_residual = constraint_residual


class LocalMoveBoundError(RuntimeError):
    """No single move within the 2M/|side| budget exists.

    This cannot happen for symmetric PSD matrices with zero row sums, so
    it signals a violated precondition.
    """


# (alpha, approximation ratio, rebalance weight beta) calibration points for
# the trial diagnostic Z = X/M* + Y/(n^2/beta).  Nearest-alpha lookup.
RATIO_BETA_TABLE = (
    (0.01, 0.0002, 0.01), (0.05, 0.0063, 0.01), (0.09, 0.0205, 0.01),
    (0.13, 0.0429, 0.01), (0.17, 0.0734, 0.01), (0.21, 0.1121, 0.01),
    (0.25, 0.1589, 0.01), (0.29, 0.2139, 0.01), (0.33, 0.2770, 0.01),
    (0.37, 0.3268, 0.877), (0.41, 0.3754, 2.081), (0.45, 0.4076, 4.075),
    (0.49, 0.3635, 5.390), (0.525, 0.3837, 5.341), (0.565, 0.4017, 3.088),
    (0.605, 0.3570, 1.598), (0.645, 0.3090, 0.478), (0.685, 0.2524, 0.01),
    (0.725, 0.1923, 0.01), (0.765, 0.1404, 0.01), (0.805, 0.0966, 0.01),
    (0.845, 0.0610, 0.01), (0.885, 0.0335, 0.01), (0.925, 0.0142, 0.01),
    (0.965, 0.0031, 0.01),
)


def beta_for_alpha(alpha: float) -> float:
    """Rebalance weight from the calibration table, nearest alpha."""
    best = min(RATIO_BETA_TABLE, key=lambda row: abs(row[0] - alpha))
    return best[2]


def trials_for_failure_prob(epsilon: float, alpha: float, beta: float | None = None) -> int:
    """Number of rounding trials so the trial-selection argument succeeds
    with probability at least 1 - epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if beta is None:
        beta = beta_for_alpha(alpha)
    c = (2.0 / math.pi + 0.878 * alpha * (1.0 - alpha) * beta) / (1.0 + beta / 4.0)
    if not 0.0 < c < 1.0:
        raise ValueError(f"derived constant c={c} outside (0, 1)")
    kappa = (1.0 - c + epsilon * c) / (epsilon * c) * math.log(1.0 / epsilon)
    return max(1, math.ceil(kappa))


@dataclass
class SolverConfig:
    """Knobs for the relax-round-rebalance pipeline.

    ``residual_tol`` is multiplied by n^2 before use, matching the scale of
    the balance constraint.
    """

    alpha: float
    trials: int = 50
    epsilon: float = 0.1
    rank: int | None = None
    grad_tol: float = 1e-6
    residual_tol: float = 1e-6
    max_iterations: int = 60000
    restarts: int = 3
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class SdpSolution:
    """Unit vectors v_1..v_n solving the relaxation, with the achieved
    objective (1/4) sum_ij A_ij <v_i, v_j> and balance-constraint residual."""

    V: np.ndarray
    objective: float
    constraint_residual: float

    def __post_init__(self):
        V = np.asarray(self.V, dtype=np.float64)
        norms = np.linalg.norm(V, axis=1)
        if np.max(np.abs(norms - 1.0), initial=0.0) > 1e-8:
            raise ValueError("SDP solution rows must be unit vectors")
        self.V = V

    @property
    def n(self) -> int:
        return self.V.shape[0]

    @property
    def rank(self) -> int:
        return self.V.shape[1]


@dataclass
class CutSolution:
    """Sign vector with its +1 side and objective value (1/4) x^T A x."""

    x: np.ndarray
    value: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64).reshape(-1)
        if x.size and not np.all(np.abs(x) == 1.0):
            raise ValueError("cut vector entries must be -1 or +1")
        self.x = x

    @property
    def S(self) -> np.ndarray:
        return np.flatnonzero(self.x > 0)

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self.x > 0))


@dataclass
class TrialStats:
    """Per-trial diagnostics for one rounding + rebalancing pass."""

    trial: int
    cut_after_rounding: float     # X: objective right after hyperplane rounding
    balance_product: float        # Y: |S| * |S-bar| after rounding
    final_value: float            # objective after rebalancing to the target
    z_score: float                # X/M* + Y/(n^2/beta), selection diagnostic only
    beta: float

    def __post_init__(self):
        if self.balance_product < 0:
            raise ValueError("balance product cannot be negative")


def _dense(A) -> np.ndarray:
    if hasattr(A, "A") and isinstance(getattr(A, "A"), np.ndarray):
        A = A.A
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SdpPreconditionError("matrix must be square")
    return A


def balance_constraint_target(n: int, alpha: float) -> float:
    """Right-hand side of the relaxed balance constraint:
    sum_{i<j} <v_i, v_j> = n^2 (1-2a)^2 / 2 - n/2."""
    return 0.5 * n * n * (1.0 - 2.0 * alpha) ** 2 - 0.5 * n


def cut_value(A, x) -> float:
    """(1/4) x^T A x for x in [-1, 1]^n."""
    A = _dense(A)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size and np.max(np.abs(x)) > 1.0 + 1e-9:
        raise ValueError("cut vector entries must lie in [-1, 1]")
    return 0.25 * float(x @ (A @ x))


def _check_input_matrix(A: np.ndarray) -> float:
    """Validate symmetry, zero row sums, and PSD-ness; return the spectral scale."""
    n = A.shape[0]
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    if not np.allclose(A, A.T, atol=1e-8 * scale):
        raise SdpPreconditionError("matrix must be symmetric")
    if np.max(np.abs(A.sum(axis=1)), initial=0.0) > 1e-6 * scale * max(1, n):
        raise SdpPreconditionError("matrix must have (near-)zero row sums")
    eigs = np.linalg.eigvalsh(A)
    spectral = max(1e-300, float(np.max(np.abs(eigs), initial=0.0)))
    if eigs.size and eigs[0] < -1e-6 * spectral:
        raise SdpPreconditionError(
            f"matrix is not PSD: min eigenvalue {eigs[0]:.3e} vs scale {spectral:.3e}")
    return spectral


def _phi_and_grad(A: np.ndarray, V: np.ndarray, lam: float, rho: float, b: float):
    """Augmented-Lagrangian value, Riemannian gradient, constraint gap, raw objective."""
    n = V.shape[0]
    AV = A @ V
    f = 0.25 * float(np.sum(AV * V))
    m = V.sum(axis=0)
    gap = 0.5 * (float(m @ m) - n) - b
    coef = lam + rho * gap
    G = 0.5 * AV - coef * (m[None, :] - V)
    G -= np.sum(G * V, axis=1)[:, None] * V
    phi = f - lam * gap - 0.5 * rho * gap * gap
    return phi, G, gap, f


def _normalize_rows(V: np.ndarray) -> np.ndarray:
    return V / np.linalg.norm(V, axis=1)[:, None]


def _initial_vectors(n: int, r: int, target: int, rng: np.random.Generator,
                     perturbed_signs: bool) -> np.ndarray:
    if perturbed_signs:
        x = -np.ones(n)
        x[rng.permutation(n)[:target]] = 1.0
        V = np.concatenate([x[:, None], 0.35 * rng.standard_normal((n, r - 1))], axis=1)
    else:
        V = rng.standard_normal((n, r))
    return _normalize_rows(V)


def _ascend(A: np.ndarray, V: np.ndarray, b: float, grad_tol: float, res_tol: float,
            max_iterations: int):
    """Maximize the augmented Lagrangian over unit rows.

    Inner loop: L-BFGS on the free factor W with rows normalized inside
    the objective, which keeps the iterate on the product of spheres.
    Outer loop: multiplier update, with penalty escalation while
    feasibility stalls.
    """
    n, r = V.shape
    lam = 0.0
    rho = 2.0 * (np.linalg.norm(A) + 1.0) / max(1, n)
    used = 0
    prev_gap = math.inf
    grad_norm = math.inf
    gap = math.inf
    for _ in range(50):
        def neg_phi_and_grad(wflat, lam=lam, rho=rho):
            W = wflat.reshape(n, r)
            norms = np.maximum(np.linalg.norm(W, axis=1), 1e-300)
            Vw = W / norms[:, None]
            AV = A @ Vw
            f = 0.25 * float(np.sum(AV * Vw))
            m = Vw.sum(axis=0)
            g = 0.5 * (float(m @ m) - n) - b
            coef = lam + rho * g
            GV = 0.5 * AV - coef * (m[None, :] - Vw)
            GV -= np.sum(GV * Vw, axis=1)[:, None] * Vw
            phi = f - lam * g - 0.5 * rho * g * g
            return -phi, -(GV / norms[:, None]).ravel()

        outcome = scipy.optimize.minimize(
            neg_phi_and_grad, V.ravel(), jac=True, method="L-BFGS-B",
            options={"maxiter": 3000, "ftol": 1e-18, "gtol": 1e-14, "maxcor": 20})
        used += int(outcome.nit) + 1
        V = _normalize_rows(outcome.x.reshape(n, r))
        _, G, gap, _ = _phi_and_grad(A, V, lam, rho, b)
        grad_norm = float(np.linalg.norm(G))
        if grad_norm <= grad_tol and abs(gap) <= res_tol:
            return V, grad_norm, abs(gap), used
        if used >= max_iterations:
            break
        lam += rho * gap
        if abs(gap) > 0.25 * prev_gap and abs(gap) > res_tol:
            rho *= 4.0
        prev_gap = abs(gap)
    return V, grad_norm, abs(gap), used


def solve_sdp(A, config: SolverConfig) -> SdpSolution:
    """Solve the factorized relaxation for the given balance fraction.

    Runs up to ``config.restarts`` seeded initializations (one from a
    perturbed balanced sign vector, the rest random) and returns the best
    converged solution.
    """
    A = _dense(A)
    n = A.shape[0]
    if n == 0:
        raise SdpPreconditionError("empty matrix")
    _check_input_matrix(A)
    target = round(config.alpha * n)
    # the integral problem fixes |S| = round(alpha*n), so the relaxation
    # must use the realized fraction or it would exclude the integral
    # solutions whenever alpha*n is fractional
    b = balance_constraint_target(n, target / n)
    r = config.rank or (math.ceil(math.sqrt(2 * n)) + 2)
    res_tol = config.residual_tol * n * n
    # gradient tolerance scales with the matrix so convergence does not
    # depend on the unit system of A
    grad_tol = config.grad_tol * (1.0 + float(np.linalg.norm(A)))
    best = None
    worst = (math.inf, math.inf)
    for attempt in range(config.restarts):
        rng = np.random.default_rng([config.seed, 7, attempt])
        V0 = _initial_vectors(n, r, target, rng, perturbed_signs=(attempt % 2 == 0))
        V, grad_norm, residual, _ = _ascend(A, V0, b, grad_tol, res_tol,
                                            config.max_iterations)
        if grad_norm <= grad_tol and residual <= res_tol:
            objective = 0.25 * float(np.sum((A @ V) * V))
            if best is None or objective > best.objective:
                best = SdpSolution(V=V, objective=objective, constraint_residual=residual)
        else:
            worst = min(worst, (grad_norm, residual))
    if best is None:
        raise SdpConvergenceError("SDP solver did not converge", worst[0], worst[1])
    return best


def hyperplane_round(sdp: SdpSolution, A, trial_seed) -> CutSolution:
    """Split nodes by the sign of <v_i, r> for a standard Gaussian r."""
    A = _dense(A)
    rng = np.random.default_rng(trial_seed)
    direction = rng.standard_normal(sdp.rank)
    x = np.where(sdp.V @ direction >= 0.0, 1.0, -1.0)
    return CutSolution(x=x, value=0.25 * float(x @ (A @ x)))


def greedy_rebalance(A, cut: CutSolution, target_size: int, refresh_every: int = 1000) -> CutSolution:
    """Move nodes one at a time until the +1 side has exactly target_size.

    Each step moves the node whose flip decreases the objective least
    (ties to the lowest id) and asserts the guaranteed existence of a move
    costing at most 2M/|side| where |side| is the side being shrunk.
    """
    A = _dense(A)
    n = A.shape[0]
    if not 0 <= target_size <= n:
        raise ValueError(f"target size {target_size} out of range for n={n}")
    x = cut.x.copy()
    size = int(np.count_nonzero(x > 0))
    if size == target_size:
        return CutSolution(x=x, value=0.25 * float(x @ (A @ x)))
    diag = np.diag(A)
    Ax = A @ x
    M = 0.25 * float(x @ Ax)
    moves = 0
    while size != target_size:
        if size > target_size:
            side = np.flatnonzero(x > 0)
            decreases = Ax[side] - diag[side]
        else:
            side = np.flatnonzero(x < 0)
            decreases = -Ax[side] - diag[side]
        pick = int(np.argmin(decreases))
        decrease = float(decreases[pick])
        if decrease > 2.0 * M / side.size + 1e-9:
            raise LocalMoveBoundError(
                f"cheapest move costs {decrease:.3e} > 2M/|side| = "
                f"{2.0 * M / side.size:.3e}; input matrix violates PSD or zero row sums")
        j = int(side[pick])
        sign_before = x[j]
        x[j] = -sign_before
        Ax -= 2.0 * sign_before * A[:, j]
        M -= decrease
        size += 1 if sign_before < 0 else -1
        moves += 1
        if moves % refresh_every == 0:
            Ax = A @ x
            M = 0.25 * float(x @ Ax)
    return CutSolution(x=x, value=0.25 * float(x @ (A @ x)))


def solve_alpha_balanced_maxcut(A, config: SolverConfig) -> tuple[CutSolution, list[TrialStats]]:
    """Full pipeline: one SDP solve, then ``config.trials`` independent
    rounding + rebalancing passes; the best final objective wins.

    Per-trial seeds derive from (config.seed, trial index), so the result
    does not depend on how trials are scheduled.
    """
    A = _dense(A)
    n = A.shape[0]
    target = round(config.alpha * n)
    if not 1 <= target <= n - 1:
        raise SdpPreconditionError(
            f"round(alpha*n)={target} must lie in [1, n-1] for n={n}")
    sdp = solve_sdp(A, config)
    beta = beta_for_alpha(config.alpha)
    m_star = sdp.objective

    def run_trial(t: int) -> tuple[TrialStats, CutSolution]:
        rounded = hyperplane_round(sdp, A, [config.seed, 11, t])
        s_size = rounded.size
        y = float(s_size * (n - s_size))
        balanced = greedy_rebalance(A, rounded, target)
        z = rounded.value / m_star + y / (n * n / beta) if m_star > 1e-12 else math.nan
        stats = TrialStats(trial=t, cut_after_rounding=rounded.value,
                           balance_product=y, final_value=balanced.value,
                           z_score=z, beta=beta)
        return stats, balanced

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            outcomes = list(pool.map(run_trial, range(config.trials)))
    else:
        outcomes = [run_trial(t) for t in range(config.trials)]
    best_cut = None
    stats_list = []
    for stats, balanced in outcomes:
        stats_list.append(stats)
        if best_cut is None or balanced.value > best_cut.value:
            best_cut = balanced
    return best_cut, stats_list
