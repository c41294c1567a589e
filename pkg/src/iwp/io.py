"""CSV layouts for measurements, estimation reports and regime timelines.

All files are UTF-8 with LF line endings and a mandatory header. Floats are
written with ``repr`` so a round trip is lossless.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MEAS_HEADER = ["t", "y", "u"]
REF_COLUMNS = ["omega1", "omega2"]
REPORT_HEADER = ["t", "y", "u", "phi1_hat", "omega1_hat", "omega2_hat", "regime", "log_k"]

#: relative tolerance on the sample spacing
SPACING_RTOL = 1e-6


class SchemaError(ValueError):
    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


@dataclass
class Measurements:
    t: np.ndarray
    y: np.ndarray
    u: np.ndarray
    omega1: np.ndarray | None = None  # reference only, never fed to observers
    omega2: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self) > 1 else float("nan")


def _fmt(v) -> str:
    return repr(float(v))


def write_measurements(path, t, y, u) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MEAS_HEADER)
        for row in zip(t, y, u):
            w.writerow([_fmt(v) for v in row])


def check_uniform(t, dt: float | None = None) -> float:
    """Return the sample spacing; raise ``SchemaError`` naming the first bad row.

    Row numbers count data rows from 1 (the header is row 0).
    """
    t = np.asarray(t, dtype=float)
    if len(t) < 2:
        return float("nan") if dt is None else dt
    steps = np.diff(t)
    ref = steps[0] if dt is None else dt
    if not ref > 0:
        raise SchemaError("timestamps must be strictly increasing", 2)
    bad = np.flatnonzero(np.abs(steps - ref) > SPACING_RTOL * ref)
    if bad.size:
        raise SchemaError(f"non-uniform timestamp spacing (expected {ref})", int(bad[0]) + 2)
    return float(ref)


def read_measurements(path, dt: float | None = None) -> Measurements:
    """Read a ``t,y,u[,omega1,omega2]`` file and check the grid."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot open {path}: {exc}") from None
    with fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise SchemaError(f"{path}: empty measurement file")
    header = [c.strip() for c in rows[0]]
    if header[:3] != MEAS_HEADER:
        raise SchemaError(f"{path}: header must start with t,y,u", 0)
    extra = header[3:]
    if extra and extra != REF_COLUMNS:
        raise SchemaError(f"{path}: unexpected columns {extra}", 0)
    if len(rows) == 1:
        raise SchemaError(f"{path}: no data rows")
    data = np.empty((len(rows) - 1, len(header)))
    for i, r in enumerate(rows[1:], start=1):
        if len(r) != len(header):
            raise SchemaError(f"expected {len(header)} fields, got {len(r)}", i)
        try:
            data[i - 1] = [float(c) for c in r]
        except ValueError:
            raise SchemaError("unparseable number", i) from None
        if not np.all(np.isfinite(data[i - 1])):
            raise SchemaError("non-finite value", i)
    check_uniform(data[:, 0], dt)
    m = Measurements(data[:, 0], data[:, 1], data[:, 2])
    if extra:
        m.omega1, m.omega2 = data[:, 3], data[:, 4]
    return m


def write_report(path, report) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for k in range(len(report)):
            w.writerow(
                [_fmt(report.t[k]), _fmt(report.y[k]), _fmt(report.u[k])]
                + [_fmt(v) for v in report.x_hat[k]]
                + [int(report.regime[k]), _fmt(report.log_k[k])]
            )


def write_summary(path, summary: dict) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "value"])
        for key in sorted(summary):
            w.writerow([key, _fmt(summary[key])])


def write_timeline(path, t, columns: dict[str, np.ndarray]) -> None:
    """Regime labels side by side; missing observers are written as 0."""
    names = list(columns)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + names)
        for k in range(len(t)):
            w.writerow([_fmt(t[k])] + [int(columns[n][k]) for n in names])


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
