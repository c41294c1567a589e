"""Extended Kalman filter on the RK4-discretised regime models."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..model import FrictionParams, MechParams, Regime
from ..sim import regime_step_jacobian
from .base import DesignError, DivergenceError, Observer

H_ROW = np.array([1.0, 0.0, 0.0])

#: smallest admissible covariance eigenvalue before the filter is declared broken
PSD_TOL = 1e-10


@dataclass(frozen=True)
class EkfState:
    x_hat: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    R: float

    def __post_init__(self):
        if np.shape(self.P) != (3, 3) or np.shape(self.Q) != (3, 3):
            raise ValueError("P and Q must be 3x3")


def ekf_jacobian(
    regime: Regime, x, u: float, dt: float, mp: MechParams, fp: FrictionParams | None
) -> np.ndarray:
    """Jacobian of the RK4 one-step map of the given regime at ``x``."""
    return regime_step_jacobian(regime, x, u, dt, mp, fp)[1]


def ekf_predict(s: EkfState, regime: Regime, u: float, dt: float, mp, fp) -> EkfState:
    x_pred, F = regime_step_jacobian(regime, s.x_hat, u, dt, mp, fp)
    P = F @ s.P @ F.T + s.Q
    return replace(s, x_hat=x_pred, P=P)


def ekf_update(s: EkfState, y: float, step: int | None = None) -> EkfState:
    P = s.P
    innov_var = H_ROW @ P @ H_ROW + s.R
    if not np.isfinite(innov_var) or innov_var <= 0.0:
        raise DesignError(f"innovation variance {innov_var} is not invertible")
    K = P @ H_ROW / innov_var
    x = s.x_hat + K * (y - s.x_hat[0])
    P = P - np.outer(K, H_ROW @ P)
    P = 0.5 * (P + P.T)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(P))):
        raise DivergenceError("EKF became non-finite", step)
    if np.linalg.eigvalsh(P)[0] < -PSD_TOL:
        raise DivergenceError("covariance lost positive semidefiniteness", step)
    return replace(s, x_hat=x, P=P)


def ekf_step(s: EkfState, regime: Regime, u: float, y: float, dt: float, mp, fp) -> EkfState:
    """Predict over one interval with the active regime, then correct with ``y``.

    While sticking the prediction holds the wheel velocity; the correction may
    still move it through its covariance with the angle.
    """
    return ekf_update(ekf_predict(s, regime, u, dt, mp, fp), y)


class EKF(Observer):
    name = "ekf"

    def __init__(self, x0, P0, Q, R: float, mp: MechParams, fp: FrictionParams | None, **kw):
        super().__init__(x0, **kw)
        self.mp, self.fp = mp, fp
        self.state = EkfState(self._x, np.array(P0, dtype=float), np.array(Q, dtype=float), float(R))

    def _enter(self, regime):
        super()._enter(regime)
        self.state = replace(self.state, x_hat=self._x)

    def _advance(self, regime, u, y_prev, y, dt):
        s = ekf_predict(self.state, regime, u, dt, self.mp, self.fp)
        self.state = ekf_update(s, y, self.k)
        self._x = self.state.x_hat

    @property
    def P(self) -> np.ndarray:
        return self.state.P
