"""Nonlinear observer with passive error dynamics, posed in port-Hamiltonian coordinates.

The observer is a plant copy whose energy gradient is corrected by a
compensation term so that the error system is port-Hamiltonian with the
desired storage ``H_d``; damping is injected on the measured angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..model import (
    G_PH,
    J_PH,
    J_PH_STICK,
    FrictionParams,
    MechParams,
    Regime,
    dissipation,
    dissipation_stick,
    from_stick_coordinates,
    grad_hamiltonian,
    grad_hamiltonian_stick,
    momenta_to_velocities,
    stribeck_torque,
    to_stick_coordinates,
    velocities_to_momenta,
)
from ..sim import rk4_step_t
from .base import Observer, check_finite


@dataclass(frozen=True)
class NopDesign:
    alpha: float = 10.0
    beta: float = 5.0
    z_hat: np.ndarray = None  # [phi1, p1, p2]

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")

    def state(self, mp: MechParams) -> np.ndarray:
        return momenta_to_velocities(self.z_hat, mp)


def desired_hamiltonian(regime: Regime, e, mp: MechParams, alpha: float) -> float:
    """Storage of the estimation error ``e`` (momentum coordinates of the regime)."""
    if regime == Regime.STICKING:
        return 0.5 * alpha * e[0] ** 2 + e[1] ** 2 / (2 * mp.theta1)
    return (
        0.5 * alpha * e[0] ** 2
        + (e[1] - e[2]) ** 2 / (2 * mp.theta1)
        + e[2] ** 2 / (2 * mp.theta2)
    )


def desired_hamiltonian_matrix(regime: Regime, mp: MechParams, alpha: float) -> np.ndarray:
    """Coefficient matrix ``W`` with ``H_d(e) = e W e / 2``."""
    if regime == Regime.STICKING:
        return np.diag([alpha, 1.0 / mp.theta1])
    i1, i2 = 1.0 / mp.theta1, 1.0 / mp.theta2
    return np.array([[alpha, 0.0, 0.0], [0.0, i1, -i1], [0.0, -i1, i1 + i2]])


def compensation(regime: Regime, z_hat, y: float, mp: MechParams, alpha: float) -> np.ndarray:
    """``Phi(x_hat, y)``; only the angle slot is nonzero, and it never touches the momenta."""
    phi = -mp.a * math.sin(y) + mp.a * math.sin(z_hat[0]) - alpha * (y - z_hat[0])
    if regime == Regime.STICKING:
        return np.array([phi, 0.0])
    return np.array([phi, 0.0, 0.0])


def nop_rhs(regime: Regime, z_hat, y: float, u: float, mp: MechParams, alpha: float, beta: float) -> np.ndarray:
    """Observer vector field. ``u`` is the port input ``M - M_S`` (ignored while sticking)."""
    damping = beta * alpha * (y - z_hat[0])
    if regime == Regime.STICKING:
        g = grad_hamiltonian_stick(z_hat, mp) + compensation(regime, z_hat, y, mp, alpha)
        dz = (J_PH_STICK - dissipation_stick(mp)) @ g
    else:
        g = grad_hamiltonian(z_hat, mp) + compensation(regime, z_hat, y, mp, alpha)
        dz = (J_PH - dissipation(mp)) @ g + G_PH * u
    dz[0] += damping
    return dz


def nop_step(
    d: NopDesign,
    regime: Regime,
    u_plant: float,
    y: float,
    dt: float,
    mp: MechParams,
    fp: FrictionParams | None = None,
    *,
    y_next: float | None = None,
    friction: float | None = None,
) -> NopDesign:
    """One RK4 step of the observer; returns the design with the advanced estimate.

    ``u_plant`` is the motor torque. The friction part of the port input is
    M_S at the estimated wheel speed unless ``friction`` supplies it. ``y`` is
    linearly interpolated towards ``y_next`` across the step.
    """
    y1 = y if y_next is None else y_next

    def y_at(tau):
        return y + (y1 - y) * tau / dt

    if regime == Regime.STICKING:
        x = momenta_to_velocities(d.z_hat, mp)
        zs = to_stick_coordinates(x, mp)
        zs = rk4_step_t(
            lambda tau, z: nop_rhs(regime, z, y_at(tau), 0.0, mp, d.alpha, d.beta), zs, dt
        )
        z_new = velocities_to_momenta(from_stick_coordinates(zs, x[2], mp), mp)
    else:

        def f(tau, z):
            if friction is None:
                ms = stribeck_torque(float(momenta_to_velocities(z, mp)[2]), fp)
            else:
                ms = friction
            return nop_rhs(regime, z, y_at(tau), u_plant - ms, mp, d.alpha, d.beta)

        z_new = rk4_step_t(f, d.z_hat, dt)
    check_finite(z_new, "NO_P estimate")
    return replace(d, z_hat=z_new)


class NOP(Observer):
    name = "nop"

    def __init__(self, x0, mp, fp, alpha: float = 10.0, beta: float = 5.0, **kw):
        super().__init__(x0, **kw)
        self.mp, self.fp = mp, fp
        self.design = NopDesign(alpha, beta, velocities_to_momenta(self._x, mp))

    def _enter(self, regime):
        super()._enter(regime)
        self.design = replace(self.design, z_hat=velocities_to_momenta(self._x, self.mp))

    def _advance(self, regime, u, y_prev, y, dt):
        w2 = self._x[2]
        self.design = nop_step(self.design, regime, u, y_prev, dt, self.mp, self.fp, y_next=y)
        self._x = self.design.state(self.mp)
        if regime == Regime.STICKING:
            self._x[2] = w2  # exact hold; the momentum round trip is only exact to roundoff
