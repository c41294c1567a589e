"""``iwp`` command line: simulate the twin, run observers over measurement files.

Exit codes: 0 success, 2 input error (config, schema, empty data), 3 numerical
failure (integration blow-up, observer divergence).
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .config import OBSERVERS, ConfigError, ExperimentConfig, load_config
from .estimation import EstimationReport, run_estimation, summarize
from .io import (
    SchemaError,
    ensure_dir,
    read_measurements,
    write_measurements,
    write_report,
    write_summary,
    write_timeline,
)
from .observers import EKF, NOL, NOP, DesignError, DivergenceError
from .sim import IntegrationError, RegimeTrace, simulate

log = logging.getLogger("iwp")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def build_observer(cfg: ExperimentConfig, kind: str | None = None):
    o = cfg.observer
    kind = kind or o.kind
    mp, fp = cfg.mech, cfg.friction
    if kind == "ekf":
        return EKF(o.x0, np.diag(o.P0), np.diag(o.Q), o.R, mp, fp, project_on_stick=o.project_on_stick)
    if kind == "nol":
        kw = dict(method=o.nol_method, use_friction=o.nol_friction)
        if o.nol_method == "lqe":
            kw.update(Q=np.diag(o.Q), R=o.R)
        elif o.nol_method == "poles":
            kw.update(poles=o.poles)
        return NOL.from_settings(
            o.x0, mp, fp, mode=o.nol_mode, dt=cfg.dt, project_on_stick=o.project_on_stick, **kw
        )
    if kind == "nop":
        return NOP(o.x0, mp, fp, o.alpha, o.beta, project_on_stick=o.project_on_stick)
    raise ConfigError(f"unknown observer {kind!r}")


def _reference(cfg: ExperimentConfig, meas):
    """Reference states and labels for metrics: a full trace if configured, else lab columns."""
    if cfg.io.reference:
        try:
            tr = RegimeTrace.read_csv(cfg.io.reference)
        except (ValueError, IndexError) as exc:
            raise SchemaError(f"reference trace: {exc}") from None
        if len(tr) != len(meas) or not np.allclose(tr.t, meas.t, rtol=0, atol=1e-9):
            raise SchemaError("reference trace does not match the measurement grid")
        return tr.x, tr.regime
    if meas.omega1 is not None:
        return np.column_stack([meas.y, meas.omega1, meas.omega2]), None
    return None, None


def _estimate_one(cfg, kind, meas) -> EstimationReport:
    obs = build_observer(cfg, kind)
    return run_estimation(
        obs, meas.t, meas.y, meas.u, meas.dt, cfg.selector, cfg.mech, cfg.friction
    )


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.out:
        cfg.io.out = args.out
    return cfg


def _meas_path(args, cfg) -> str:
    path = args.measurements or cfg.io.measurements
    if not path:
        raise SchemaError("no measurement file given (--measurements or io.measurements)")
    return path


def cmd_simulate(args) -> int:
    cfg = _load(args)
    trace = simulate(cfg.sim_config(args.seed), cfg.mech, cfg.friction)
    out = ensure_dir(cfg.io.out)
    trace.write_csv(out / "trace.csv")
    write_measurements(out / "measurements.csv", trace.t, trace.y, trace.u)
    log.info("wrote %d samples to %s", len(trace), out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg = _load(args)
    meas = read_measurements(_meas_path(args, cfg), cfg.dt)
    x_ref, reg_ref = _reference(cfg, meas)
    rep = _estimate_one(cfg, cfg.observer.kind, meas)
    out = ensure_dir(cfg.io.out)
    write_report(out / f"report_{cfg.observer.kind}.csv", rep)
    if x_ref is not None:
        summary = summarize(rep, x_ref, reg_ref)
        write_summary(out / f"summary_{cfg.observer.kind}.csv", summary)
        for k, v in summary.items():
            print(f"{cfg.observer.kind} {k} {v:.6g}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _load(args)
    meas = read_measurements(_meas_path(args, cfg), cfg.dt)
    x_ref, reg_ref = _reference(cfg, meas)
    out = ensure_dir(cfg.io.out)
    timeline: dict[str, np.ndarray] = {}
    if reg_ref is not None:
        timeline["truth"] = reg_ref
    status = EXIT_OK
    for kind in OBSERVERS:
        try:
            rep = _estimate_one(cfg, kind, meas)
        except (DivergenceError, IntegrationError, DesignError, FloatingPointError) as exc:
            log.error("%s failed: %s", kind, exc)
            print(f"{kind} FAILED {exc}")
            timeline[kind] = np.zeros(len(meas), dtype=int)
            status = EXIT_NUMERIC
            continue
        write_report(out / f"report_{kind}.csv", rep)
        timeline[kind] = rep.regime
        if x_ref is not None:
            summary = summarize(rep, x_ref, reg_ref)
            write_summary(out / f"summary_{kind}.csv", summary)
            for k, v in summary.items():
                print(f"{kind} {k} {v:.6g}")
    write_timeline(out / "regimes.csv", meas.t, timeline)
    return status


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="iwp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in (("simulate", cmd_simulate), ("estimate", cmd_estimate), ("compare", cmd_compare)):
        s = sub.add_parser(name)
        s.add_argument("--config", required=True)
        s.add_argument("--measurements")
        s.add_argument("--out")
        s.add_argument("--seed", type=int)
        s.set_defaults(func=fn)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s"
    )
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (IntegrationError, DivergenceError, DesignError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
