"""Inertia wheel pendulum: parameters, Stribeck friction and the two regime models.

State vector convention: ``x = [phi1, omega1, omega2]`` where ``phi1`` is the
absolute pendulum angle (0 = upright, pi = hanging), ``omega1`` its angular
velocity and ``omega2`` the wheel velocity relative to the pendulum. Angles
are never wrapped.

Port-Hamiltonian coordinates are ``z = [phi1, p1, p2]`` (wheel slipping) and
``z = [phi1, p1]`` (wheel stuck).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class Regime(enum.IntEnum):
    """Active wheel model. Integer values are used in CSV files."""

    NONSTICKING = 1  # M1
    STICKING = 2  # M2


@dataclass(frozen=True)
class MechParams:
    a: float = 0.15535
    theta1: float = 0.05045
    theta2: float = 0.00113
    d1: float = 0.00885
    d2: float = 0.00015
    theta_c: float = field(init=False)

    def __post_init__(self):
        if not (self.a > 0 and self.theta1 > 0 and self.theta2 > 0):
            raise ValueError("a, theta1 and theta2 must be positive")
        if self.d1 < 0 or self.d2 < 0:
            raise ValueError("damping coefficients must be non-negative")
        object.__setattr__(
            self, "theta_c", self.theta1 * self.theta2 / (self.theta1 + self.theta2)
        )


@dataclass(frozen=True)
class FrictionParams:
    r_C: float = 0.0024
    r_S: float = 0.0026
    omega20: float = 0.0501

    def __post_init__(self):
        if not (0 < self.r_C <= self.r_S):
            raise ValueError("need 0 < r_C <= r_S")
        if self.omega20 <= 0:
            raise ValueError("omega20 must be positive")


@dataclass(frozen=True)
class State:
    phi1: float
    omega1: float
    omega2: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.phi1, self.omega1, self.omega2)):
            raise ValueError(f"non-finite state {self}")

    def to_array(self) -> np.ndarray:
        return np.array([self.phi1, self.omega1, self.omega2])

    @classmethod
    def from_array(cls, x) -> State:
        return cls(float(x[0]), float(x[1]), float(x[2]))


@dataclass(frozen=True)
class PhState:
    phi1: float
    p1: float
    p2: float

    def to_array(self) -> np.ndarray:
        return np.array([self.phi1, self.p1, self.p2])


@dataclass(frozen=True)
class PhStateStick:
    phi1: float
    p1: float

    def to_array(self) -> np.ndarray:
        return np.array([self.phi1, self.p1])


def _sgn(v: float) -> float:
    return 1.0 if v > 0 else (-1.0 if v < 0 else 0.0)


def stribeck_torque(omega2: float, fp: FrictionParams | None) -> float:
    """Stribeck friction torque on the wheel; ``fp=None`` disables friction."""
    if fp is None or omega2 == 0.0:
        return 0.0
    s = _sgn(omega2)
    return s * (fp.r_C + (fp.r_S - fp.r_C) * math.exp(-((omega2 / fp.omega20) ** 2)))


def stribeck_slope(omega2: float, fp: FrictionParams | None) -> float:
    """Derivative of :func:`stribeck_torque` away from zero (0 at the origin)."""
    if fp is None or omega2 == 0.0:
        return 0.0
    s = _sgn(omega2)
    g = math.exp(-((omega2 / fp.omega20) ** 2))
    return s * (fp.r_S - fp.r_C) * g * (-2.0 * omega2 / fp.omega20**2)


def stiction_torque_demand(phi1: float, omega1: float, M: float, mp: MechParams) -> float:
    """Torque the wheel bearing has to transmit to keep ``omega2`` pinned at zero."""
    return mp.theta2 / (mp.theta1 + mp.theta2) * (-mp.a * math.sin(phi1) + mp.d1 * omega1) + M


def stiction_holds(
    phi1: float, omega1: float, M: float, mp: MechParams, fp: FrictionParams | None
) -> bool:
    if fp is None:
        return False
    return abs(stiction_torque_demand(phi1, omega1, M, mp)) < fp.r_S


def drift_nonsticking(x, M: float, mp: MechParams, fp: FrictionParams | None) -> np.ndarray:
    phi1, w1, w2 = x[0], x[1], x[2]
    ms = stribeck_torque(w2, fp)
    s = math.sin(phi1)
    return np.array(
        [
            w1,
            (mp.a * s - mp.d1 * w1 + mp.d2 * w2 - M + ms) / mp.theta1,
            -mp.a / mp.theta1 * s + mp.d1 / mp.theta1 * w1 + (M - ms - mp.d2 * w2) / mp.theta_c,
        ]
    )


def drift_sticking(x, mp: MechParams) -> np.ndarray:
    phi1, w1 = x[0], x[1]
    return np.array([w1, (mp.a * math.sin(phi1) - mp.d1 * w1) / mp.theta1, 0.0])


def drift(regime: Regime, x, M: float, mp: MechParams, fp: FrictionParams | None) -> np.ndarray:
    if regime == Regime.STICKING:
        return drift_sticking(x, mp)
    return drift_nonsticking(x, M, mp, fp)


def drift_jacobian(
    regime: Regime, x, M: float, mp: MechParams, fp: FrictionParams | None
) -> np.ndarray:
    """Analytic Jacobian of :func:`drift` with respect to the state."""
    phi1, w2 = x[0], x[2]
    c = mp.a * math.cos(phi1)
    if regime == Regime.STICKING:
        return np.array(
            [
                [0.0, 1.0, 0.0],
                [c / mp.theta1, -mp.d1 / mp.theta1, 0.0],
                [0.0, 0.0, 0.0],
            ]
        )
    dms = stribeck_slope(w2, fp)
    return np.array(
        [
            [0.0, 1.0, 0.0],
            [c / mp.theta1, -mp.d1 / mp.theta1, (mp.d2 + dms) / mp.theta1],
            [-c / mp.theta1, mp.d1 / mp.theta1, -(dms + mp.d2) / mp.theta_c],
        ]
    )


# -- port-Hamiltonian form ---------------------------------------------------


def mass_matrix(mp: MechParams) -> np.ndarray:
    return np.array([[mp.theta1 + mp.theta2, mp.theta2], [mp.theta2, mp.theta2]])


def velocities_to_momenta(x, mp: MechParams) -> np.ndarray:
    phi1, w1, w2 = x[0], x[1], x[2]
    return np.array(
        [phi1, (mp.theta1 + mp.theta2) * w1 + mp.theta2 * w2, mp.theta2 * (w1 + w2)]
    )


def momenta_to_velocities(z, mp: MechParams) -> np.ndarray:
    phi1, p1, p2 = z[0], z[1], z[2]
    w1 = (p1 - p2) / mp.theta1
    return np.array([phi1, w1, p2 / mp.theta2 - w1])


def hamiltonian(z, mp: MechParams) -> float:
    phi1, p1, p2 = z[0], z[1], z[2]
    return (p1 - p2) ** 2 / (2 * mp.theta1) + p2**2 / (2 * mp.theta2) + mp.a * math.cos(phi1)


def hamiltonian_stick(z, mp: MechParams) -> float:
    phi1, p1 = z[0], z[1]
    return p1**2 / (2 * mp.theta1) + mp.a * math.cos(phi1)


def energy(x, mp: MechParams) -> float:
    """Total energy of a velocity-coordinate state (wheel slipping form)."""
    return hamiltonian(velocities_to_momenta(x, mp), mp)


def grad_hamiltonian(z, mp: MechParams) -> np.ndarray:
    phi1, p1, p2 = z[0], z[1], z[2]
    w1 = (p1 - p2) / mp.theta1
    return np.array([-mp.a * math.sin(phi1), w1, -w1 + p2 / mp.theta2])


def grad_hamiltonian_stick(z, mp: MechParams) -> np.ndarray:
    return np.array([-mp.a * math.sin(z[0]), z[1] / mp.theta1])


J_PH = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
G_PH = np.array([0.0, 0.0, 1.0])
J_PH_STICK = np.array([[0.0, 1.0], [-1.0, 0.0]])


def dissipation(mp: MechParams) -> np.ndarray:
    return np.diag([0.0, mp.d1, mp.d2])


def dissipation_stick(mp: MechParams) -> np.ndarray:
    # damping sits on the momentum slot so that the flow equals the sticking model
    return np.diag([0.0, mp.d1])


def ph_drift(z, u: float, mp: MechParams) -> np.ndarray:
    """(J - R) dH^T + G u with ``u = M - M_S``."""
    return (J_PH - dissipation(mp)) @ grad_hamiltonian(z, mp) + G_PH * u


def ph_drift_stick(z, mp: MechParams) -> np.ndarray:
    return (J_PH_STICK - dissipation_stick(mp)) @ grad_hamiltonian_stick(z, mp)


def to_stick_coordinates(x, mp: MechParams) -> np.ndarray:
    return np.array([x[0], mp.theta1 * x[1]])


def from_stick_coordinates(z, omega2: float, mp: MechParams) -> np.ndarray:
    return np.array([z[0], z[1] / mp.theta1, omega2])
