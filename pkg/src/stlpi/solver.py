"""Path-integral solver for deterministic optimal control with STL costs.

Each iteration draws ``M`` Gaussian perturbations of the current input
sequence, scores the perturbed rollouts, and moves the inputs to the
exponentially weighted mean perturbation. Both the sampling covariance and
the inverse temperature are then multiplied by ``nu``, so their ratio (the
effective input penalty ``R = lam * inv(Sigma)``) never changes while the
sampling distribution collapses onto the deterministic optimum.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from stlpi._backend import kernels
from stlpi.stl import BIG, Formula, RobustnessCostMode, cost_from_robustness
from stlpi.systems import SystemModel, rollout, rollout_batch

log = logging.getLogger(__name__)

CostFn = Callable[[np.ndarray], np.ndarray]


class SolverError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


@dataclass
class SolverConfig:
    """Hyperparameters of one solve.

    ``stage_cost`` and ``terminal_cost`` must accept states with arbitrary
    leading batch dimensions, ``(..., n_x) -> (...)``; ``None`` means zero.
    """

    J: int
    M: int
    nu: float
    sigma: np.ndarray
    lam: float
    gamma: float = 1.0
    mode: RobustnessCostMode = RobustnessCostMode.PENALIZE_VIOLATION
    u_init: Optional[np.ndarray] = None
    seed: int = 0
    stage_cost: Optional[CostFn] = None
    terminal_cost: Optional[CostFn] = None
    threads: Optional[int] = None
    chunk_size: int = 2048
    callback: Optional[Callable[["IterationStats", np.ndarray], bool]] = field(default=None, repr=False)

    def __post_init__(self):
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=np.float64))
        if sigma.shape == (1, sigma.shape[1]) and sigma.shape[1] > 1:
            sigma = np.diag(sigma[0])  # a flat list is a diagonal
        self.sigma = sigma
        if isinstance(self.mode, str):
            self.mode = RobustnessCostMode(self.mode)
        self.validate()

    def validate(self):
        if int(self.J) != self.J or self.J < 1:
            raise ConfigError(f"J must be a positive integer, got {self.J}")
        if int(self.M) != self.M or self.M < 1:
            raise ConfigError(f"M must be a positive integer, got {self.M}")
        if not 0.0 < self.nu < 1.0:
            raise ConfigError(f"nu must lie in (0, 1), got {self.nu}")
        if not self.lam > 0:
            raise ConfigError(f"lam must be positive, got {self.lam}")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.chunk_size < 1:
            raise ConfigError("chunk_size must be positive")
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"threads must be positive, got {self.threads}")
        s = self.sigma
        if s.ndim != 2 or s.shape[0] != s.shape[1] or not np.array_equal(s, s.T):
            raise ConfigError(f"sigma must be a symmetric square matrix, got {s!r}")
        try:
            np.linalg.cholesky(s)
        except np.linalg.LinAlgError:
            raise ConfigError(f"sigma is not positive definite: {s!r}") from None

    @property
    def n_u(self) -> int:
        return self.sigma.shape[0]

    @property
    def input_weight(self) -> np.ndarray:
        """``R = lam * inv(sigma)``, the quadratic input penalty."""
        return self.lam * np.linalg.inv(self.sigma)


@dataclass
class IterationStats:
    j: int
    objective: float  # objective of the updated input sequence
    best_sample_cost: float
    ess: float
    lam: float
    sigma_scale: float  # Sigma_j = sigma_scale * Sigma_1
    nonfinite: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SolveResult:
    u_star: np.ndarray
    x_star: np.ndarray
    iterations: list[IterationStats]
    final_cost: float
    final_robustness: float
    nonfinite_samples: int = 0


@dataclass
class WeightBatch:
    weights: np.ndarray
    baseline: float
    normalizer: float

    @property
    def ess(self) -> float:
        return float(1.0 / np.sum(self.weights**2))


def _sanitize(costs: np.ndarray) -> tuple[np.ndarray, int]:
    bad = ~np.isfinite(costs)
    n_bad = int(bad.sum())
    if n_bad:
        costs = np.where(bad, BIG, costs)
    return costs, n_bad


def compute_weights(costs, lam: float) -> WeightBatch:
    """Softmax of ``-costs / lam`` with the minimum subtracted first.

    Non-finite costs are treated as the largest finite cost. Sums run in
    ascending sample order.
    """
    costs = np.asarray(costs, dtype=np.float64).ravel()
    if costs.size == 0:
        raise SolverError("no sample costs")
    if not lam > 0:
        raise ConfigError(f"lam must be positive, got {lam}")
    if not np.isfinite(costs).any():
        raise SolverError("all sample costs are non-finite")
    costs, _ = _sanitize(costs)
    baseline = float(costs.min())
    with np.errstate(over="ignore"):
        expo = np.exp(-(costs - baseline) / lam)
    eta = float(np.cumsum(expo)[-1])
    return WeightBatch(expo / eta, baseline, eta)


def sample_noise(seed: int, j: int, m: int, k: int, cov) -> np.ndarray:
    """The perturbation ``eps[j, m, k] ~ N(0, cov)`` used by :func:`solve`.

    Iterations ``j`` count from 1. Deterministic in (seed, j, m, k), whatever
    the batching or thread count.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise ConfigError(f"covariance is not positive definite: {cov!r}") from None
    z = kernels.standard_normals(seed, j, m, 1, k + 1, cov.shape[0])[0, k]
    return chol @ z


def _thread_count(requested: Optional[int]) -> int:
    cap = os.environ.get("STLPI_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, int(cap))
    return max(1, n)


class _Problem:
    """Everything a batch of samples needs, shared read-only across threads."""

    def __init__(self, model, x0, phi, config, K):
        self.model = model
        self.x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
        self.phi = phi
        self.config = config
        self.K = K

    def path_costs(self, U: np.ndarray, extra: np.ndarray) -> np.ndarray:
        """Sample costs for inputs ``U`` (B, K, n_u); ``extra`` (B, K) holds per-step additive terms."""
        cfg = self.config
        X = rollout_batch(self.model, self.x0, U)
        B = X.shape[0]
        if cfg.stage_cost is not None:
            stage = np.asarray(cfg.stage_cost(X[:, :-1]), dtype=np.float64)
        else:
            stage = np.zeros((B, self.K))
        S = np.zeros(B)
        for k in range(self.K):
            S = S + (stage[:, k] + extra[:, k])
        if cfg.terminal_cost is not None:
            S = S + np.asarray(cfg.terminal_cost(X[:, -1]), dtype=np.float64)
        rho = self.phi.signal(X)[:, 0]
        return S + cfg.gamma * cost_from_robustness(rho, cfg.mode)


def objective_batch(model: SystemModel, x0, phi: Formula, config: SolverConfig, U) -> np.ndarray:
    """STL-OCP objective for each input sequence in ``U`` (B, K, n_u).

    ``gamma * J_phi(x) + sum_k [c(x_k) + u_k' R u_k / 2] + E(x_K)`` with
    ``R = lam * inv(sigma)`` from the configuration.
    """
    U = np.asarray(U, dtype=np.float64)
    R = config.input_weight
    quad = 0.5 * np.einsum("bki,ij,bkj->bk", U, R, U)
    return _Problem(model, x0, phi, config, U.shape[1]).path_costs(U, quad)


def objective(model: SystemModel, x0, phi: Formula, config: SolverConfig, u) -> float:
    u = np.asarray(u, dtype=np.float64).reshape(-1, model.n_u)
    return float(objective_batch(model, x0, phi, config, u[None])[0])


def solve(model: SystemModel, x0, phi: Formula, config: SolverConfig, K: int) -> SolveResult:
    """Run the shrinking path-integral iteration for ``config.J`` rounds."""
    if K < 1:
        raise ConfigError(f"horizon must be >= 1, got {K}")
    if config.n_u != model.n_u:
        raise ConfigError(f"sigma is {config.n_u}x{config.n_u} but the model has {model.n_u} inputs")
    n_u, M = model.n_u, config.M
    if config.u_init is None:
        u_hat = np.zeros((K, n_u))
    else:
        u_hat = np.array(config.u_init, dtype=np.float64).reshape(-1, n_u)
        if u_hat.shape != (K, n_u):
            raise ConfigError(f"u_init must have shape ({K}, {n_u}), got {u_hat.shape}")

    problem = _Problem(model, x0, phi, config, K)
    sigma0 = config.sigma
    R0 = config.input_weight
    starts = list(range(0, M, config.chunk_size))
    n_threads = min(_thread_count(config.threads), len(starts))
    pool = ThreadPoolExecutor(max_workers=n_threads) if n_threads > 1 else None
    stats: list[IterationStats] = []
    total_bad = 0

    try:
        for j in range(1, config.J + 1):
            scale = config.nu ** (j - 1)
            lam = config.lam * scale
            cov = scale * sigma0
            chol = np.linalg.cholesky(cov)
            # lam * eps' inv(cov) u_hat, precomputed per step as eps . g_k
            g = lam * np.linalg.solve(cov, u_hat.T).T
            eps = np.empty((M, K, n_u))
            S = np.empty(M)

            def run_chunk(start, u_hat=u_hat, chol=chol, g=g, j=j):
                stop = min(start + config.chunk_size, M)
                z = kernels.standard_normals(config.seed, j, start, stop - start, K, n_u)
                e = z @ chol.T
                eps[start:stop] = e
                correction = np.einsum("bki,ki->bk", e, g)
                S[start:stop] = problem.path_costs(u_hat[None] + e, correction)

            if pool is None:
                for start in starts:
                    run_chunk(start)
            else:
                list(pool.map(run_chunk, starts))

            S, n_bad = _sanitize(S)
            if n_bad == M:
                raise SolverError(f"iteration {j}: every sample cost is non-finite")
            total_bad += n_bad
            batch = compute_weights(S, lam)
            step = kernels.weighted_sum(batch.weights, eps.reshape(M, K * n_u))
            u_hat = u_hat + step.reshape(K, n_u)

            R = lam * np.linalg.inv(cov)
            if not np.allclose(R, R0, rtol=1e-9, atol=0.0):
                raise SolverError(f"input penalty drifted at iteration {j}: {R} vs {R0}")
            it = IterationStats(
                j=j,
                objective=objective(model, x0, phi, config, u_hat),
                best_sample_cost=batch.baseline,
                ess=batch.ess,
                lam=lam,
                sigma_scale=scale,
                nonfinite=n_bad,
            )
            stats.append(it)
            log.debug("iter %d obj=%.6g best=%.6g ess=%.1f", j, it.objective, it.best_sample_cost, it.ess)
            if config.callback is not None and config.callback(it, u_hat.copy()):
                break
    finally:
        if pool is not None:
            pool.shutdown()

    traj = rollout(model, x0, u_hat)
    rho = float(phi.signal(traj.states)[0])
    return SolveResult(
        u_star=u_hat,
        x_star=traj.states,
        iterations=stats,
        final_cost=objective(model, x0, phi, config, u_hat),
        final_robustness=rho,
        nonfinite_samples=total_bad,
    )
