"""Drive an observer with per-sample model selection and score the result."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Regime
from .observers.base import Observer
from .selection import SelectorConfig, select_with_evidence

SETTLING_BAND = 0.02  # rad


@dataclass
class EstimationReport:
    t: np.ndarray
    y: np.ndarray
    u: np.ndarray
    x_hat: np.ndarray  # (N, 3)
    regime: np.ndarray  # selected model per row
    log_k: np.ndarray  # nan in row 0
    summary: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)


def run_estimation(
    observer: Observer,
    t,
    y,
    u,
    dt: float,
    cfg: SelectorConfig,
    mp,
    fp,
    initial_regime: Regime = Regime.NONSTICKING,
    regimes=None,
) -> EstimationReport:
    """Run ``observer`` over a measurement stream.

    At every sample both regime models propagate the previous estimate, the
    Bayes factor against ``y[k]`` picks one, and the observer then advances
    with that model. Passing ``regimes`` bypasses the selector and forces the
    given per-row labels (row k's label is used for the interval ending at k).
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    n = len(t)
    xs = np.empty((n, 3))
    sel = np.empty(n, dtype=int)
    logk = np.full(n, np.nan)
    if n == 0:
        return EstimationReport(t, y, u, xs, sel, logk)
    current = Regime(initial_regime)
    xs[0] = observer.x_hat
    sel[0] = current
    for k in range(1, n):
        x_prev = xs[k - 1]
        if regimes is None:
            current, logk[k] = select_with_evidence(y[k], x_prev, u[k - 1], dt, cfg, current, mp, fp)
        else:
            current = Regime(int(regimes[k]))
        xs[k] = observer.step(current, u[k - 1], y[k - 1], y[k], dt)
        sel[k] = current
    return EstimationReport(t, y, u, xs, sel, logk)


def rmse(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.size == 0:
        return float("nan")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def switch_mask(labels, guard: int = 2) -> np.ndarray:
    """True for samples farther than ``guard`` samples from any label change."""
    labels = np.asarray(labels)
    keep = np.ones(len(labels), dtype=bool)
    for s in np.flatnonzero(np.diff(labels)) + 1:
        keep[max(0, s - guard) : s + guard + 1] = False
    return keep


def regime_agreement(selected, truth, guard: int = 2) -> float:
    """Fraction of rows where the selected model matches the generating one.

    Row ``k`` of ``selected`` chose the model for the interval ending at
    ``t[k]``, which the simulator labels ``truth[k-1]``. Samples within
    ``guard`` of a true switch are ignored.
    """
    selected = np.asarray(selected)[1:]
    gen = np.asarray(truth)[:-1]
    if gen.size == 0:
        return float("nan")
    keep = switch_mask(gen, guard)
    if not keep.any():
        return float("nan")
    return float(np.mean(selected[keep] == gen[keep]))


def settling_time(t, est, ref, band: float = SETTLING_BAND) -> float:
    """First time after which ``|est - ref|`` stays inside ``band`` (inf if never)."""
    err = np.abs(np.asarray(est) - np.asarray(ref))
    outside = np.flatnonzero(err >= band)
    if outside.size == 0:
        return float(t[0])
    last = outside[-1]
    if last == len(t) - 1:
        return float("inf")
    return float(t[last + 1])


def summarize(report: EstimationReport, x_ref=None, regime_ref=None, final_window: float = 10.0) -> dict:
    out: dict = {}
    if x_ref is not None:
        x_ref = np.asarray(x_ref, dtype=float)
        names = ("phi1", "omega1", "omega2")
        tail = report.t >= report.t[-1] - final_window + 1e-12
        for i, nm in enumerate(names):
            out[f"rmse_{nm}"] = rmse(report.x_hat[:, i], x_ref[:, i])
            out[f"rmse_final_{nm}"] = rmse(report.x_hat[tail, i], x_ref[tail, i])
        out["settling_time"] = settling_time(report.t, report.x_hat[:, 0], x_ref[:, 0])
    if regime_ref is not None:
        out["regime_agreement"] = regime_agreement(report.regime, regime_ref)
    report.summary = out
    return out
