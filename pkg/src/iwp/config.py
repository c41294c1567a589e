"""Experiment configuration: flat ``section.key = value`` text files.

Lines starting with ``#`` are comments. Vectors are comma-separated. Every
key must be known; anything else is rejected so that typos cannot silently
fall back to defaults.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import FrictionParams, MechParams, Regime, State
from .sim import NoiseModel, SimConfig
from .selection import SelectorConfig

OBSERVERS = ("ekf", "nol", "nop")


class ConfigError(ValueError):
    pass


_PI = re.compile(r"^([+-]?)(?:([0-9.eE+-]+)\s*\*\s*)?pi(?:\s*/\s*([0-9.eE+-]+))?$")


def _float(s: str) -> float:
    """Float literal, or a multiple of pi such as ``-pi/10`` or ``3*pi``."""
    s = s.strip()
    m = _PI.match(s)
    if m is None:
        return float(s)
    sign, num, den = m.groups()
    v = math.pi * (float(num) if num else 1.0) / (float(den) if den else 1.0)
    return -v if sign == "-" else v


def _vec(s: str, n: int | None = None) -> tuple[float, ...]:
    vals = tuple(_float(p) for p in s.split(",") if p.strip())
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} values, got {len(vals)}")
    return vals


def _bool(s: str) -> bool:
    s = s.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _tie(s: str) -> Regime | None:
    s = s.strip().lower()
    if s in ("keep", "current"):
        return None
    return Regime(int(s))


def _str(s: str) -> str:
    return s.strip()


@dataclass
class ObserverSettings:
    kind: str = "nop"
    x0: tuple[float, float, float] = (-math.pi / 10, 1.0, 1.0)
    P0: tuple[float, float, float] = (0.00165, 0.01, 0.1)
    Q: tuple[float, float, float] = (0.0, 0.01, 0.1)
    R: float = 0.001
    nol_mode: str = "sampled-data"
    nol_method: str = "lqe"
    poles: tuple[float, ...] = ()
    nol_friction: bool = True
    alpha: float = 10.0
    beta: float = 5.0
    project_on_stick: bool = False


@dataclass
class IoSettings:
    out: str = "out"
    measurements: str = ""
    reference: str = ""


@dataclass
class ExperimentConfig:
    mech: MechParams = field(default_factory=MechParams)
    friction: FrictionParams | None = field(default_factory=FrictionParams)
    t_end: float = 30.0
    dt: float = 0.005
    x0: tuple[float, float, float] = (0.01, 0.0, 0.0)
    input: float = 0.0
    q_diag: tuple[float, float, float] = (0.0, 0.0, 0.0)
    r_var: float = 0.0
    seed: int = 0
    observer: ObserverSettings = field(default_factory=ObserverSettings)
    selector: SelectorConfig = field(default_factory=SelectorConfig)
    io: IoSettings = field(default_factory=IoSettings)

    def sim_config(self, seed: int | None = None) -> SimConfig:
        return SimConfig(
            t_end=self.t_end,
            x0=State(*self.x0),
            dt=self.dt,
            input=self.input,
            noise=NoiseModel(tuple(self.q_diag), self.r_var),
            seed=self.seed if seed is None else seed,
        )


# key -> (parser, target group, attribute)
_PARAMS = {
    "params.a": (_float, "mech", "a"),
    "params.theta1": (_float, "mech", "theta1"),
    "params.theta2": (_float, "mech", "theta2"),
    "params.d1": (_float, "mech", "d1"),
    "params.d2": (_float, "mech", "d2"),
    "params.r_C": (_float, "fric", "r_C"),
    "params.r_S": (_float, "fric", "r_S"),
    "params.omega20": (_float, "fric", "omega20"),
    "params.friction": (_bool, "top", "_friction_on"),
    "sim.t_end": (_float, "top", "t_end"),
    "sim.dt": (_float, "top", "dt"),
    "sim.x0": (lambda s: _vec(s, 3), "top", "x0"),
    "sim.input": (_float, "top", "input"),
    "sim.q_diag": (lambda s: _vec(s, 3), "top", "q_diag"),
    "sim.r_var": (_float, "top", "r_var"),
    "sim.seed": (int, "top", "seed"),
    "selector.r_var": (_float, "sel", "r_var"),
    "selector.prior_ratio": (_float, "sel", "prior_ratio"),
    "selector.tie_policy": (_tie, "sel", "tie_policy"),
    "io.out": (_str, "io", "out"),
    "io.measurements": (_str, "io", "measurements"),
    "io.reference": (_str, "io", "reference"),
}
_OBS_PARSERS = {
    "kind": _str,
    "x0": lambda s: _vec(s, 3),
    "P0": lambda s: _vec(s, 3),
    "Q": lambda s: _vec(s, 3),
    "R": _float,
    "nol_mode": _str,
    "nol_method": _str,
    "poles": _vec,
    "nol_friction": _bool,
    "alpha": _float,
    "beta": _float,
    "project_on_stick": _bool,
}
for _k, _p in _OBS_PARSERS.items():
    _PARAMS[f"observer.{_k}"] = (_p, "obs", _k)

KNOWN_KEYS = tuple(_PARAMS)


def parse_config_text(text: str, base_dir: Path | None = None) -> ExperimentConfig:
    groups: dict[str, dict] = {g: {} for g in ("mech", "fric", "top", "sel", "obs", "io")}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _PARAMS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        parser, group, attr = _PARAMS[key]
        try:
            groups[group][attr] = parser(value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None

    top = groups["top"]
    friction_on = top.pop("_friction_on", True)
    try:
        mech = MechParams(**groups["mech"])
        fric = FrictionParams(**groups["fric"]) if friction_on else None
        sel = SelectorConfig(**groups["sel"])
        obs = ObserverSettings(**groups["obs"])
        io = IoSettings(**groups["io"])
        cfg = ExperimentConfig(mech=mech, friction=fric, observer=obs, selector=sel, io=io, **top)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _validate(cfg, base_dir)
    return cfg


def _validate(cfg: ExperimentConfig, base_dir: Path | None) -> None:
    o = cfg.observer
    if o.kind not in OBSERVERS:
        raise ConfigError(f"observer.kind must be one of {OBSERVERS}")
    if o.nol_mode not in ("sampled-data", "quasi-continuous"):
        raise ConfigError("observer.nol_mode must be sampled-data or quasi-continuous")
    if o.nol_method not in ("lqe", "deadbeat", "poles"):
        raise ConfigError("observer.nol_method must be lqe, deadbeat or poles")
    if o.nol_method == "poles" and len(o.poles) < 3:
        raise ConfigError("observer.poles needs three poles")
    if min(o.P0) < 0 or min(o.Q) < 0 or not o.R > 0:
        raise ConfigError("observer covariances must be non-negative and R > 0")
    if not (o.alpha > 0 and o.beta > 0):
        raise ConfigError("observer.alpha and observer.beta must be positive")
    if not cfg.dt > 0:
        raise ConfigError("sim.dt must be positive")
    if cfg.t_end < cfg.dt:
        raise ConfigError(f"sim.t_end={cfg.t_end} gives an empty trace")
    if min(cfg.q_diag) < 0 or cfg.r_var < 0:
        raise ConfigError("noise variances must be non-negative")
    if not all(np.isfinite(cfg.x0)) or not all(np.isfinite(o.x0)):
        raise ConfigError("initial states must be finite")
    for name in ("measurements", "reference"):
        p = getattr(cfg.io, name)
        if p:
            path = Path(p) if base_dir is None or Path(p).is_absolute() else base_dir / p
            if not path.exists():
                raise ConfigError(f"io.{name}: {path} does not exist")
            setattr(cfg.io, name, str(path))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, path.parent)


def config_keys() -> list[str]:
    return sorted(KNOWN_KEYS)


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "IoSettings",
    "ObserverSettings",
    "config_keys",
    "load_config",
    "parse_config_text",
]
