"""Fixed-step simulation of the switched (sticking / non-sticking) pendulum.

The simulator doubles as the synthetic stand-in for the laboratory rig: it
produces ground-truth states, regime labels and noisy angle measurements.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import (
    FrictionParams,
    MechParams,
    Regime,
    State,
    drift,
    drift_jacobian,
    stiction_holds,
)

#: |omega2| below this counts as a zero crossing of the wheel velocity (rad/s)
ZERO_CROSSING_EPS = 1e-4

TRACE_HEADER = ["t", "phi1", "omega1", "omega2", "u", "y", "regime"]


class IntegrationError(RuntimeError):
    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


def rk4_step(f: Callable[[np.ndarray], np.ndarray], x, dt: float, step: int | None = None) -> np.ndarray:
    """One classical Runge-Kutta step of ``x' = f(x)`` (input held by the caller)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):  # checked just below
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        out = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise IntegrationError("non-finite state after RK4 step", step)
    return out


def rk4_step_t(f: Callable[[float, np.ndarray], np.ndarray], x, dt: float) -> np.ndarray:
    """RK4 step of ``x' = f(tau, x)`` with ``tau`` measured from the step start."""
    x = np.asarray(x, dtype=float)
    h = 0.5 * dt
    k1 = f(0.0, x)
    k2 = f(h, x + h * k1)
    k3 = f(h, x + h * k2)
    k4 = f(dt, x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step_with_jacobian(f, jac, x, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """RK4 step together with the Jacobian of the discrete map.

    The sensitivity is propagated through all four stages, so the returned
    matrix is the exact derivative of the one-step map (not ``expm(A dt)``).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    eye = np.eye(n)
    k1 = f(x)
    D1 = jac(x)
    x2 = x + 0.5 * dt * k1
    k2 = f(x2)
    D2 = jac(x2) @ (eye + 0.5 * dt * D1)
    x3 = x + 0.5 * dt * k2
    k3 = f(x3)
    D3 = jac(x3) @ (eye + 0.5 * dt * D2)
    x4 = x + dt * k3
    k4 = f(x4)
    D4 = jac(x4) @ (eye + dt * D3)
    out = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    F = eye + dt / 6.0 * (D1 + 2.0 * D2 + 2.0 * D3 + D4)
    return out, F


def regime_step(regime: Regime, x, M: float, dt: float, mp: MechParams, fp, step=None) -> np.ndarray:
    """Noise-free sampled-data map of the given regime (zero-order-hold input)."""
    return rk4_step(lambda s: drift(regime, s, M, mp, fp), x, dt, step)


def regime_step_jacobian(regime: Regime, x, M: float, dt: float, mp: MechParams, fp):
    return rk4_step_with_jacobian(
        lambda s: drift(regime, s, M, mp, fp),
        lambda s: drift_jacobian(regime, s, M, mp, fp),
        x,
        dt,
    )


@dataclass(frozen=True)
class NoiseModel:
    q_diag: tuple[float, float, float] = (0.0, 0.0, 0.0)
    r_var: float = 0.0

    def __post_init__(self):
        if len(self.q_diag) != 3 or min(self.q_diag) < 0 or self.r_var < 0:
            raise ValueError("noise variances must be three non-negative values plus r_var >= 0")


@dataclass(frozen=True)
class SimConfig:
    t_end: float
    x0: State
    dt: float = 0.005
    input: float | Sequence[float] = 0.0
    noise: NoiseModel | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= self.dt:
            raise ValueError(f"t_end={self.t_end} gives an empty trace (need t_end >= dt)")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def input_samples(self) -> np.ndarray:
        n = self.n_steps + 1
        if np.isscalar(self.input):
            return np.full(n, float(self.input))
        u = np.asarray(self.input, dtype=float)
        if u.size < n:
            raise ValueError(f"input has {u.size} samples, need {n}")
        return u[:n].copy()


@dataclass
class RegimeTrace:
    """Time-indexed simulation record.

    ``regime[k]`` is the model active on ``[t[k], t[k+1])``; it is decided at
    ``t[k]`` from the state ``x[k]``.
    """

    t: np.ndarray
    x: np.ndarray  # (N, 3)
    regime: np.ndarray  # int 1/2
    u: np.ndarray
    y: np.ndarray
    dt: float = field(default=0.005)

    def __len__(self) -> int:
        return len(self.t)

    @classmethod
    def empty(cls, dt: float = 0.005) -> RegimeTrace:
        return cls(np.zeros(0), np.zeros((0, 3)), np.zeros(0, dtype=int), np.zeros(0), np.zeros(0), dt)

    def switch_indices(self) -> np.ndarray:
        """Indices k where regime[k] differs from regime[k-1]."""
        return np.flatnonzero(np.diff(self.regime)) + 1

    def write_csv(self, path) -> None:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            for k in range(len(self)):
                w.writerow(
                    [repr(float(self.t[k]))]
                    + [repr(float(v)) for v in self.x[k]]
                    + [repr(float(self.u[k])), repr(float(self.y[k])), int(self.regime[k])]
                )

    @classmethod
    def read_csv(cls, path, dt: float | None = None) -> RegimeTrace:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0]] != TRACE_HEADER:
            raise ValueError(f"{path}: expected header {','.join(TRACE_HEADER)}")
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float).reshape(-1, 7)
        if dt is None:
            dt = float(data[1, 0] - data[0, 0]) if len(data) > 1 else 0.005
        return cls(
            data[:, 0], data[:, 1:4], data[:, 6].astype(int), data[:, 4], data[:, 5], dt
        )


def initial_regime(x0, M0: float, mp: MechParams, fp) -> Regime:
    if abs(x0[2]) < ZERO_CROSSING_EPS and stiction_holds(x0[0], x0[1], M0, mp, fp):
        return Regime.STICKING
    return Regime.NONSTICKING


def simulate(cfg: SimConfig, mp: MechParams, fp: FrictionParams | None) -> RegimeTrace:
    """Integrate the switched model on the uniform grid ``t_k = k*dt``.

    Entry into sticking requires a wheel-velocity zero crossing within the
    step plus the stiction condition at the post-step state; ``omega2`` is then
    projected to exactly zero. Exit happens as soon as the condition fails.
    Passing ``fp=None`` removes friction and never sticks.
    """
    x0 = cfg.x0.to_array()
    n = cfg.n_steps + 1
    u = cfg.input_samples()
    rng = np.random.default_rng(cfg.seed)
    noise = cfg.noise or NoiseModel()
    q_std = np.sqrt(np.asarray(noise.q_diag, dtype=float))
    r_std = math.sqrt(noise.r_var)

    xs = np.empty((n, 3))
    regimes = np.empty(n, dtype=int)
    x = x0.copy()
    regime = initial_regime(x, u[0], mp, fp)
    if regime == Regime.STICKING:
        x[2] = 0.0
    for k in range(n):
        xs[k] = x
        regimes[k] = regime
        if k == n - 1:
            break
        x_next = regime_step(regime, x, u[k], cfg.dt, mp, fp, step=k)
        if q_std.any():
            w = q_std * rng.standard_normal(3)
            if regime == Regime.STICKING:
                w[2] = 0.0
            x_next = x_next + w
        nxt = u[k + 1]
        if regime == Regime.NONSTICKING:
            crossed = x[2] * x_next[2] < 0.0 or abs(x_next[2]) < ZERO_CROSSING_EPS
            if crossed and stiction_holds(x_next[0], x_next[1], nxt, mp, fp):
                regime = Regime.STICKING
                x_next[2] = 0.0
        elif not stiction_holds(x_next[0], x_next[1], nxt, mp, fp):
            regime = Regime.NONSTICKING
        x = x_next

    y = xs[:, 0].copy()
    if r_std > 0:
        y = y + r_std * rng.standard_normal(n)
    t = np.arange(n) * cfg.dt
    return RegimeTrace(t, xs, regimes, u, y, cfg.dt)


def emit_measurements(trace: RegimeTrace) -> list[tuple[float, float, float]]:
    """Project a trace onto the encoder stream ``(t, y, u)``."""
    return [(float(t), float(y), float(u)) for t, y, u in zip(trace.t, trace.y, trace.u)]
