from __future__ import annotations

import numpy as np

from ..model import Regime


class DesignError(ValueError):
    """Observer design failed (unobservable pair, singular innovation, ...)."""


class DivergenceError(ArithmeticError):
    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


def check_finite(x, what: str, step: int | None = None) -> None:
    if not np.all(np.isfinite(np.asarray(x, dtype=float))):
        raise DivergenceError(f"{what} became non-finite", step)


class Observer:
    """Sequential estimator driven one sample interval at a time.

    ``step`` advances the estimate from ``t[k-1]`` to ``t[k]``: ``u`` is the
    input held over the interval, ``y_prev`` and ``y`` are the angle
    measurements at its two ends. Subclasses keep the full three-state
    estimate in both regimes; while sticking the wheel velocity is held.
    """

    name = "observer"

    def __init__(self, x0, project_on_stick: bool = False):
        self._x = np.array(x0, dtype=float)
        self.project_on_stick = project_on_stick
        self.regime: Regime | None = None
        self.k = 0

    @property
    def x_hat(self) -> np.ndarray:
        return np.asarray(self._x, dtype=float).copy()

    def _enter(self, regime: Regime) -> None:
        if (
            self.project_on_stick
            and regime == Regime.STICKING
            and self.regime != Regime.STICKING
        ):
            self._x[2] = 0.0
        self.regime = regime

    def step(self, regime: Regime, u: float, y_prev: float, y: float, dt: float) -> np.ndarray:
        self.k += 1
        self._enter(regime)
        try:
            self._advance(regime, u, y_prev, y, dt)
        except DivergenceError as exc:
            if exc.step is None:
                raise DivergenceError(str(exc), self.k) from None
            raise
        check_finite(self._x, f"{self.name} estimate", self.k)
        return self.x_hat

    def _advance(self, regime, u, y_prev, y, dt) -> None:  # pragma: no cover
        raise NotImplementedError
