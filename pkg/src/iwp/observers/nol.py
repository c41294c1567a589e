"""Nonlinear observer with linear error dynamics (output-injection form).

Both regime models split as ``x' = A x + alpha(u, y)`` with every
nonlinearity in the measured angle, so a plant copy plus linear correction
cancels ``alpha`` and leaves ``e' = (A - K C) e``. The observer is available
quasi-continuously (RK4 of the observer ODE) or as the sampled-data
recursion ``x[k+1] = A_d x[k] + G_d alpha[k] + K_d (y[k] - C x[k])``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.linalg import expm, solve_continuous_are, solve_discrete_are
from scipy.signal import place_poles

from ..model import FrictionParams, MechParams, Regime, stribeck_torque
from ..sim import rk4_step_t
from .base import DesignError, Observer

SAMPLED = "sampled-data"
QUASI_CONTINUOUS = "quasi-continuous"


def linear_part(regime: Regime, mp: MechParams) -> tuple[np.ndarray, np.ndarray]:
    """System matrix ``A`` and output row ``C`` of the regime decomposition."""
    if regime == Regime.STICKING:
        A = np.array([[0.0, 1.0], [0.0, -mp.d1 / mp.theta1]])
        return A, np.array([[1.0, 0.0]])
    A = np.array(
        [
            [0.0, 1.0, 0.0],
            [0.0, -mp.d1 / mp.theta1, mp.d2 / mp.theta1],
            [0.0, mp.d1 / mp.theta1, -mp.d2 / mp.theta_c],
        ]
    )
    return A, np.array([[1.0, 0.0, 0.0]])


def injection(regime: Regime, M: float, y: float, mp: MechParams, friction: float = 0.0) -> np.ndarray:
    """Output-injection term ``alpha(u, y)``; ``friction`` is the wheel torque M_S used in ``u``."""
    s = mp.a / mp.theta1 * math.sin(y)
    if regime == Regime.STICKING:
        return np.array([0.0, s])
    u = M - friction
    return np.array([0.0, s - u / mp.theta1, -s + u / mp.theta_c])


def discretize(A: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """``A_d = e^{A dt}`` and ``G_d = int_0^dt e^{A tau} dtau`` via one augmented exponential.

    ``A`` is singular here, so ``A^{-1}(A_d - I)`` is not an option.
    """
    n = A.shape[0]
    aug = np.zeros((2 * n, 2 * n))
    aug[:n, :n] = A
    aug[:n, n:] = np.eye(n)
    E = expm(aug * dt)
    return E[:n, :n], E[:n, n:]


def observability_matrix(A: np.ndarray, C: np.ndarray) -> np.ndarray:
    rows = [C]
    for _ in range(A.shape[0] - 1):
        rows.append(rows[-1] @ A)
    return np.vstack(rows)


def _require_observable(A, C) -> None:
    n = A.shape[0]
    if np.linalg.matrix_rank(observability_matrix(A, C)) < n:
        raise DesignError("(A, C) is not observable")


def deadbeat_gain(A_d: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Gain placing every eigenvalue of ``A_d - K C`` at zero (Ackermann).

    The wheel mode is only weakly visible in the angle, so the observability
    matrix is badly conditioned; the formula is evaluated with 40 digits and
    returned as ``np.longdouble``.
    """
    n = A_d.shape[0]
    with mpmath.workdps(40):
        Am = mpmath.matrix(A_d.tolist())
        row = mpmath.matrix(C.tolist())
        O = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                O[i, j] = row[0, j]
            row = row * Am
        en = mpmath.matrix([0] * (n - 1) + [1])
        K = (Am**n) * mpmath.lu_solve(O, en)
        return np.array([np.longdouble(mpmath.nstr(K[i], 30)) for i in range(n)])


def lqe_gain(A_d: np.ndarray, C: np.ndarray, Q: np.ndarray, R: float) -> np.ndarray:
    """Steady-state one-step-predictor Kalman gain."""
    P = solve_discrete_are(A_d.T, C.T, Q, np.atleast_2d(R))
    S = C @ P @ C.T + R
    return (A_d @ P @ C.T / S).ravel()


@dataclass(frozen=True)
class NolDesign:
    regime: Regime
    A: np.ndarray
    C: np.ndarray
    A_d: np.ndarray
    G_d: np.ndarray
    K: np.ndarray  # K_d in sampled-data mode, K otherwise
    mode: str = SAMPLED
    dt: float = 0.005
    use_friction: bool = True

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def closed_loop(self) -> np.ndarray:
        base = self.A_d if self.mode == SAMPLED else self.A
        return base.astype(self.K.dtype) - np.outer(self.K, self.C[0].astype(self.K.dtype))

    def check(self) -> None:
        _require_observable(self.A, self.C)
        eig = np.linalg.eigvals(self.closed_loop.astype(float))
        if self.mode == SAMPLED and np.max(np.abs(eig)) >= 1.0:
            raise DesignError(f"sampled-data error dynamics unstable: {eig}")
        if self.mode == QUASI_CONTINUOUS and np.max(eig.real) >= 0.0:
            raise DesignError(f"continuous error dynamics unstable: {eig}")


def _restrict(Q, n):
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if Q.shape == (1, 1):
        return Q[0, 0] * np.eye(n)
    if Q.shape == (1, 3) or Q.ndim == 1:
        Q = np.diag(np.ravel(Q))
    return Q[:n, :n]


def nol_design(
    regime: Regime,
    mp: MechParams,
    mode: str = SAMPLED,
    dt: float = 0.005,
    *,
    method: str = "lqe",
    poles=None,
    Q=None,
    R: float | None = None,
    use_friction: bool = True,
) -> NolDesign:
    """Design the output-injection observer for one regime.

    ``method`` is ``"deadbeat"`` (sampled-data only), ``"poles"`` (requires
    ``poles``; discrete poles in sampled-data mode) or ``"lqe"`` (requires
    ``Q`` and ``R``; for the sticking model ``Q`` is cut to its leading 2x2
    block).
    """
    if mode not in (SAMPLED, QUASI_CONTINUOUS):
        raise ValueError(f"unknown mode {mode!r}")
    A, C = linear_part(regime, mp)
    n = A.shape[0]
    _require_observable(A, C)
    A_d, G_d = discretize(A, dt)
    if method == "deadbeat":
        if mode != SAMPLED:
            raise DesignError("dead-beat behaviour needs the sampled-data observer")
        K = deadbeat_gain(A_d, C)
    elif method == "poles":
        if poles is None:
            raise DesignError("pole placement needs a pole list")
        p = np.asarray(poles, dtype=complex if np.iscomplexobj(poles) else float)[:n]
        base = A_d if mode == SAMPLED else A
        K = place_poles(base.T, C.T, p).gain_matrix.T.ravel()
    elif method == "lqe":
        if Q is None or R is None:
            raise DesignError("LQE design needs Q and R")
        Qn = _restrict(Q, n)
        if mode == SAMPLED:
            K = lqe_gain(A_d, C, Qn, float(R))
        else:
            P = solve_continuous_are(A.T, C.T, Qn, np.atleast_2d(R))
            K = (P @ C.T / float(R)).ravel()
    else:
        raise ValueError(f"unknown design method {method!r}")
    d = NolDesign(regime, A, C, A_d, G_d, K, mode, dt, use_friction)
    d.check()
    return d


def nol_step(
    d: NolDesign,
    x_hat,
    u: float,
    y: float,
    mp: MechParams,
    fp: FrictionParams | None = None,
    *,
    y_next: float | None = None,
    friction: float | None = None,
) -> np.ndarray:
    """Advance the three-state estimate by one sample interval.

    Sampled-data mode evaluates the recursion with ``y = y[k]``. The
    quasi-continuous mode integrates the observer ODE with ``y`` linearly
    interpolated towards ``y_next`` (held if omitted). ``friction`` overrides
    the wheel friction torque inside ``alpha``; by default it is M_S at the
    estimated wheel speed, or zero when the design drops friction. While
    sticking the wheel component is carried along unchanged.
    """
    dtype = d.K.dtype
    x_hat = np.asarray(x_hat, dtype=dtype)
    n = d.n

    def fric(w2):
        if friction is not None:
            return friction
        if not d.use_friction:
            return 0.0
        return stribeck_torque(float(w2), fp)

    if d.mode == SAMPLED:
        xs = x_hat[:n]
        alpha = injection(d.regime, u, y, mp, fric(x_hat[2])).astype(dtype)
        new = d.A_d.astype(dtype) @ xs + d.G_d.astype(dtype) @ alpha + d.K * (dtype.type(y) - xs[0])
    else:
        y1 = y if y_next is None else y_next

        def f(tau, xs):
            yt = y + (y1 - y) * tau / d.dt
            w2 = xs[2] if n == 3 else x_hat[2]
            return d.A @ xs + injection(d.regime, u, yt, mp, fric(w2)) + d.K * (yt - xs[0])

        new = rk4_step_t(f, x_hat[:n].astype(float), d.dt).astype(dtype)
    out = x_hat.copy()
    out[:n] = new
    return out


class NOL(Observer):
    name = "nol"

    def __init__(self, x0, designs: dict[Regime, NolDesign], mp, fp, **kw):
        super().__init__(x0, **kw)
        self.designs, self.mp, self.fp = designs, mp, fp
        self._x = self._x.astype(designs[Regime.NONSTICKING].K.dtype)

    @classmethod
    def from_settings(cls, x0, mp, fp, mode=SAMPLED, dt=0.005, project_on_stick=False, **design_kw):
        designs = {r: nol_design(r, mp, mode, dt, **design_kw) for r in Regime}
        return cls(x0, designs, mp, fp, project_on_stick=project_on_stick)

    def _advance(self, regime, u, y_prev, y, dt):
        d = self.designs[regime]
        if d.mode == SAMPLED:
            self._x = nol_step(d, self._x, u, y_prev, self.mp, self.fp)
        else:
            self._x = nol_step(d, self._x, u, y_prev, self.mp, self.fp, y_next=y)
