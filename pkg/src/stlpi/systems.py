"""Discrete-time dynamics, rollouts, and the stacked-history state augmentation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from stlpi._backend import kernels

StepFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
BatchRolloutFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SystemModel:
    """``x_{k+1} = f(x_k, u_k)`` with fixed step size ``dt``.

    ``f`` maps a single state and input to the next state. ``f_batch``, when
    given, does the same for stacked arrays ``(B, n_x), (B, n_u) -> (B, n_x)``;
    ``batch_rollout`` may replace the whole step loop with a fused kernel.
    """

    n_x: int
    n_u: int
    dt: float
    f: StepFn
    f_batch: Optional[StepFn] = None
    batch_rollout: Optional[BatchRolloutFn] = None
    name: str = "custom"

    def __post_init__(self):
        if self.n_x < 1 or self.n_u < 1:
            raise ValueError(f"dimensions must be positive, got n_x={self.n_x}, n_u={self.n_u}")
        if not self.dt > 0:
            raise ValueError(f"step size must be positive, got {self.dt}")

    def step(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        out = np.asarray(self.f(x, u), dtype=np.float64)
        if out.shape != (self.n_x,):
            raise ValueError(f"dynamics returned shape {out.shape}, expected ({self.n_x},)")
        return out

    def step_batch(self, X: np.ndarray, U: np.ndarray) -> np.ndarray:
        if self.f_batch is not None:
            return self.f_batch(X, U)
        return np.stack([self.step(x, u) for x, u in zip(X, U)])


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray  # (K+1, n_x)
    inputs: np.ndarray  # (K, n_u)

    def __post_init__(self):
        if len(self.states) != len(self.inputs) + 1:
            raise ValueError(
                f"{len(self.states)} states do not match {len(self.inputs)} inputs (need one more state)"
            )

    @property
    def horizon(self) -> int:
        return len(self.inputs)


def _as_inputs(model: SystemModel, u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.size == 0:
        return np.zeros((0, model.n_u))
    if u.ndim == 1 and model.n_u == 1:
        u = u[:, None]
    if u.ndim != 2 or u.shape[1] != model.n_u:
        raise ValueError(f"inputs must have shape (K, {model.n_u}), got {u.shape}")
    return u


def _as_state(model: SystemModel, x0) -> np.ndarray:
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    if x0.shape != (model.n_x,):
        raise ValueError(f"initial state must have shape ({model.n_x},), got {x0.shape}")
    return x0


def rollout(model: SystemModel, x0, u) -> Trajectory:
    """Simulate from ``x0`` under the input sequence ``u`` (shape (K, n_u))."""
    x0 = _as_state(model, x0)
    u = _as_inputs(model, u)
    states = np.empty((len(u) + 1, model.n_x))
    states[0] = x0
    for k in range(len(u)):
        states[k + 1] = model.step(states[k], u[k])
    return Trajectory(states, u)


def rollout_batch(model: SystemModel, x0, U: np.ndarray) -> np.ndarray:
    """Simulate many input sequences ``U`` (B, K, n_u) from one initial state -> (B, K+1, n_x)."""
    x0 = _as_state(model, x0)
    U = np.ascontiguousarray(U, dtype=np.float64)
    if U.ndim != 3 or U.shape[2] != model.n_u:
        raise ValueError(f"batched inputs must have shape (B, K, {model.n_u}), got {U.shape}")
    if model.batch_rollout is not None:
        return model.batch_rollout(x0, U)
    B, K, _ = U.shape
    X = np.empty((B, K + 1, model.n_x))
    X[:, 0] = x0
    for k in range(K):
        X[:, k + 1] = model.step_batch(X[:, k], U[:, k])
    return X


# ----------------------------------------------------------- augmentation


def augment_state(x0, K: int) -> np.ndarray:
    """Augmented initial state ``[x0, 0, ..., 0]`` of length (K+1)*n_x."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    out = np.zeros((K + 1) * x0.size)
    out[: x0.size] = x0
    return out


def augment(model: SystemModel, K: int) -> SystemModel:
    """Model whose state is the newest-first stacked history ``[x_k, ..., x_0, 0, ...]``.

    One step prepends ``f(x_k, u_k)`` and drops the trailing block, which is
    still zero padding for every ``k < K``.
    """
    if K < 1:
        raise ValueError(f"horizon must be >= 1, got {K}")
    n = model.n_x

    def f_aug(xa, u):
        return np.concatenate([model.step(xa[:n], u), xa[: K * n]])

    def f_aug_batch(XA, U):
        return np.concatenate([model.step_batch(XA[:, :n], U), XA[:, : K * n]], axis=1)

    return SystemModel(
        n_x=(K + 1) * n, n_u=model.n_u, dt=model.dt, f=f_aug, f_batch=f_aug_batch, name=f"{model.name}~aug{K}"
    )


def unstack(xa: np.ndarray, n_x: int) -> np.ndarray:
    """Augmented terminal state -> trajectory in time order, shape (K+1, n_x)."""
    return np.asarray(xa).reshape(-1, n_x)[::-1]


def head(xa: np.ndarray, n_x: int) -> np.ndarray:
    """Current physical state contained in an augmented state."""
    return np.asarray(xa)[..., :n_x]


# --------------------------------------------------------- builtin models


def scalar_integrator() -> SystemModel:
    """``x_{k+1} = x_k + u_k``."""

    def f(x, u):
        return x + u

    def rollout_fn(x0, U):
        X = np.empty((U.shape[0], U.shape[1] + 1, 1))
        X[:, 0] = x0
        for k in range(U.shape[1]):
            X[:, k + 1] = X[:, k] + U[:, k]
        return X

    return SystemModel(n_x=1, n_u=1, dt=1.0, f=f, f_batch=f, batch_rollout=rollout_fn, name="scalar_integrator")


def double_integrator(dt: float = 1.0) -> SystemModel:
    """Planar double integrator, state [p_x, p_y, v_x, v_y], input [a_x, a_y].

    Exact zero-order-hold discretization:
    ``p' = p + v*dt + a*dt**2/2``, ``v' = v + a*dt``.
    """
    if not dt > 0:
        raise ValueError(f"step size must be positive, got {dt}")
    half_dt2 = 0.5 * dt * dt

    def f(x, u):
        x = np.asarray(x, dtype=np.float64)
        u = np.asarray(u, dtype=np.float64)
        out = np.empty(x.shape)
        out[..., 0:2] = x[..., 0:2] + x[..., 2:4] * dt + u * half_dt2
        out[..., 2:4] = x[..., 2:4] + u * dt
        return out

    return SystemModel(n_x=4, n_u=2, dt=dt, f=f, f_batch=f, name="double_integrator")


def single_track(dt: float = 0.1, wheelbase: float = 2.0) -> SystemModel:
    """Kinematic single-track (bicycle) model, explicit Euler.

    State [p_x, p_y, steering angle, speed, heading], input [steering rate,
    acceleration].
    """
    if not dt > 0:
        raise ValueError(f"step size must be positive, got {dt}")
    if not wheelbase > 0:
        raise ValueError(f"wheelbase must be positive, got {wheelbase}")

    def f(x, u):
        x = np.asarray(x, dtype=np.float64)
        u = np.asarray(u, dtype=np.float64)
        px, py, steer, v, psi = (x[..., i] for i in range(5))
        return np.stack(
            [
                px + (v * np.cos(psi)) * dt,
                py + (v * np.sin(psi)) * dt,
                steer + u[..., 0] * dt,
                v + u[..., 1] * dt,
                psi + (v / wheelbase * np.tan(steer)) * dt,
            ],
            axis=-1,
        )

    def rollout_fn(x0, U):
        return kernels.single_track_rollout(x0, U, dt, wheelbase)

    return SystemModel(n_x=5, n_u=2, dt=dt, f=f, f_batch=f, batch_rollout=rollout_fn, name="single_track")


MODELS = {
    "scalar_integrator": scalar_integrator,
    "double_integrator": double_integrator,
    "single_track": single_track,
}


def make_model(name: str, **params) -> SystemModel:
    try:
        factory = MODELS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
    return factory(**params)
