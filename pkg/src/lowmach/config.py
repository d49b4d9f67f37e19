"""Experiment configuration: JSON documents validated into dataclasses.

Unknown keys are rejected with the dotted path of the offending entry,
and every value is range-checked here so the drivers can assume a sane
config.  Defaults are chosen so the stock experiments run in minutes on
a laptop.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import ConfigInvalid
from .solver.states import BoundaryKind, Scheme

__all__ = [
    "ExperimentKind",
    "PhysicalParams",
    "NumericalParams",
    "WaveParams",
    "IllParams",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "config_echo",
]


class ExperimentKind(str, Enum):
    WAVE = "wave"
    WELL_PREPARED = "well_prepared"
    ILL_PREPARED = "ill_prepared"
    LIMIT_HEAT = "limit_heat"
    SWEEP = "sweep"
    CHECK = "check"


_KIND_ALIASES = {
    "wave": ExperimentKind.WAVE,
    "wellprepared": ExperimentKind.WELL_PREPARED,
    "well_prepared": ExperimentKind.WELL_PREPARED,
    "illprepared": ExperimentKind.ILL_PREPARED,
    "ill_prepared": ExperimentKind.ILL_PREPARED,
    "limitheat": ExperimentKind.LIMIT_HEAT,
    "limit_heat": ExperimentKind.LIMIT_HEAT,
    "sweep": ExperimentKind.SWEEP,
    "check": ExperimentKind.CHECK,
}

# default checks attached to each experiment kind when none are requested
_DEFAULT_CHECKS = {
    ExperimentKind.WAVE: ("tail_fit",),
    ExperimentKind.WELL_PREPARED: ("decay_shape", "creep"),
    ExperimentKind.ILL_PREPARED: ("box",),
    ExperimentKind.LIMIT_HEAT: ("limit_tracking",),
    ExperimentKind.SWEEP: (),  # filled from the sweep target
    ExperimentKind.CHECK: ("conservation", "ap_stability"),
}

_KNOWN_CHECKS = (
    "wave_oracle",
    "tail_fit",
    "residual_rates",
    "decay_shape",
    "eps_rate",
    "creep",
    "ap_stability",
    "conservation",
    "ill_trends",
    "p_oscillation",
    "box",
    "limit_tracking",
)

# per-check pass thresholds; see experiments.py for how each is compared
_DEFAULT_THRESHOLDS = {
    "wave_oracle": 1e-5,
    "tail_fit": 0.2,
    "residual_rates": 0.15,
    "decay_shape": 1.2,
    "eps_rate": 1.0,
    "creep": 0.99,
    "ap_stability": 1e3,
    "conservation": 1e-10,
    "ill_trends": 1.0,
    "p_oscillation": 1.3,
    "box": 1.0,
    "limit_tracking": 5.0,
}


@dataclass(frozen=True)
class PhysicalParams:
    kappa: float = 1.0
    mu_tilde: float = 1.0
    left: float = 1.0
    right: float = 1.1


@dataclass(frozen=True)
class NumericalParams:
    half_length: float = None  # None: 20 sqrt(1 + end_time)
    cells: int = 2001
    dt: float = 0.005
    scheme: Scheme = Scheme.SEMI_IMPLICIT
    bc: BoundaryKind = BoundaryKind.DIRICHLET_FAR_FIELD
    end_time: float = 10.0
    snapshot_times: tuple = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0)
    cfl_safety: float = 0.9

    def resolved_half_length(self) -> float:
        if self.half_length is not None:
            return self.half_length
        return 20.0 * math.sqrt(1.0 + self.end_time)


@dataclass(frozen=True)
class WaveParams:
    half_width: float = 12.0
    nodes: int = 4001
    newton_tol: float = 1e-12
    max_iters: int = 50
    tail_tol: float = 1e-8


@dataclass(frozen=True)
class IllParams:
    bump_amplitude: float = 1.0
    bump_width: float = 1.0
    bump_center: float = 0.0
    velocity: str = "zero"
    window: tuple = (-5.0, 5.0)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: ExperimentKind
    physical: PhysicalParams = PhysicalParams()
    numerical: NumericalParams = NumericalParams()
    wave: WaveParams = WaveParams()
    ill: IllParams = IllParams()
    epsilon: float = 0.1
    sweep: tuple = ()
    target: ExperimentKind = ExperimentKind.WELL_PREPARED
    checks: tuple = ()
    thresholds: dict = field(default_factory=dict)
    output_dir: str = "out"
    seed: int = 0
    noise_amplitude: float = 0.0

    @property
    def delta(self) -> float:
        return abs(self.physical.right - self.physical.left)

    def threshold(self, check: str) -> float:
        return self.thresholds.get(check, _DEFAULT_THRESHOLDS[check])


def _expect(cond: bool, path: str, message: str):
    if not cond:
        raise ConfigInvalid(f"{path}: {message}")


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigInvalid(f"{path}: expected a number, got {value!r}")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigInvalid(f"{path}: expected an integer, got {value!r}")
    return value


def _take(section: dict, path: str, allowed):
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigInvalid(f"{path}.{unknown[0]}: unknown key")


def _parse_physical(raw: dict) -> PhysicalParams:
    _take(raw, "physical", ("kappa", "mu_tilde", "endpoints"))
    kappa = _as_number(raw.get("kappa", 1.0), "physical.kappa")
    _expect(kappa > 0.0, "physical.kappa", f"must be positive, got {kappa}")
    mu = _as_number(raw.get("mu_tilde", 1.0), "physical.mu_tilde")
    _expect(mu > 0.0, "physical.mu_tilde", f"must be positive, got {mu}")
    ends = raw.get("endpoints", (1.0, 1.1))
    _expect(isinstance(ends, (list, tuple)) and len(ends) == 2,
            "physical.endpoints", "expected a pair [left, right]")
    left = _as_number(ends[0], "physical.endpoints[0]")
    right = _as_number(ends[1], "physical.endpoints[1]")
    _expect(left > 0.0, "physical.endpoints[0]", "must be positive")
    _expect(right > 0.0, "physical.endpoints[1]", "must be positive")
    return PhysicalParams(kappa, mu, left, right)


def _parse_numerical(raw: dict, kind: ExperimentKind) -> NumericalParams:
    _take(raw, "numerical", ("half_length", "cells", "dt", "scheme", "bc",
                             "end_time", "snapshot_times", "cfl_safety"))
    base = NumericalParams()
    half = raw.get("half_length")
    if half is not None:
        half = _as_number(half, "numerical.half_length")
        _expect(half > 0.0, "numerical.half_length", "must be positive")
    cells = _as_int(raw.get("cells", base.cells), "numerical.cells")
    _expect(cells >= 16, "numerical.cells", f"needs at least 16 cells, got {cells}")
    dt = _as_number(raw.get("dt", base.dt), "numerical.dt")
    _expect(dt > 0.0, "numerical.dt", "must be positive")
    scheme = raw.get("scheme", base.scheme.value)
    try:
        scheme = Scheme(scheme)
    except ValueError:
        raise ConfigInvalid(f"numerical.scheme: unknown scheme {scheme!r}")
    bc = raw.get("bc", base.bc.value)
    try:
        bc = BoundaryKind(bc)
    except ValueError:
        raise ConfigInvalid(f"numerical.bc: unknown boundary kind {bc!r}")
    end_default = 1.0 if kind in (ExperimentKind.ILL_PREPARED,
                                  ExperimentKind.LIMIT_HEAT) else base.end_time
    end_time = _as_number(raw.get("end_time", end_default), "numerical.end_time")
    _expect(end_time >= 0.0, "numerical.end_time", "must be non-negative")
    snaps = raw.get("snapshot_times")
    if snaps is None:
        snaps = tuple(s for s in base.snapshot_times if s <= end_time)
        if not snaps or snaps[-1] < end_time:
            snaps = snaps + (end_time,)
    else:
        _expect(isinstance(snaps, (list, tuple)), "numerical.snapshot_times",
                "expected a list of times")
        snaps = tuple(_as_number(s, f"numerical.snapshot_times[{i}]")
                      for i, s in enumerate(snaps))
        for i, s in enumerate(snaps):
            _expect(0.0 <= s <= end_time, f"numerical.snapshot_times[{i}]",
                    "outside [0, end_time]")
            if i:
                _expect(s > snaps[i - 1], f"numerical.snapshot_times[{i}]",
                        "times must increase strictly")
    safety = _as_number(raw.get("cfl_safety", base.cfl_safety), "numerical.cfl_safety")
    _expect(0.0 < safety <= 1.0, "numerical.cfl_safety", "must lie in (0, 1]")
    return NumericalParams(half, cells, dt, scheme, bc, end_time, snaps, safety)


def _parse_wave(raw: dict) -> WaveParams:
    _take(raw, "wave", ("half_width", "nodes", "newton_tol", "max_iters", "tail_tol"))
    base = WaveParams()
    half = _as_number(raw.get("half_width", base.half_width), "wave.half_width")
    _expect(half > 0.0, "wave.half_width", "must be positive")
    nodes = _as_int(raw.get("nodes", base.nodes), "wave.nodes")
    _expect(nodes >= 64, "wave.nodes", f"needs at least 64 nodes, got {nodes}")
    tol = _as_number(raw.get("newton_tol", base.newton_tol), "wave.newton_tol")
    _expect(tol > 0.0, "wave.newton_tol", "must be positive")
    iters = _as_int(raw.get("max_iters", base.max_iters), "wave.max_iters")
    _expect(iters > 0, "wave.max_iters", "must be positive")
    tail = _as_number(raw.get("tail_tol", base.tail_tol), "wave.tail_tol")
    _expect(tail > 0.0, "wave.tail_tol", "must be positive")
    return WaveParams(half, nodes, tol, iters, tail)


def _parse_ill(raw: dict) -> IllParams:
    _take(raw, "ill", ("bump_amplitude", "bump_width", "bump_center",
                       "velocity", "window"))
    base = IllParams()
    amp = _as_number(raw.get("bump_amplitude", base.bump_amplitude),
                     "ill.bump_amplitude")
    width = _as_number(raw.get("bump_width", base.bump_width), "ill.bump_width")
    _expect(width > 0.0, "ill.bump_width", "must be positive")
    center = _as_number(raw.get("bump_center", base.bump_center), "ill.bump_center")
    velocity = raw.get("velocity", base.velocity)
    _expect(velocity in ("zero", "limit"), "ill.velocity",
            f"must be 'zero' or 'limit', got {velocity!r}")
    window = raw.get("window", base.window)
    _expect(isinstance(window, (list, tuple)) and len(window) == 2,
            "ill.window", "expected a pair [lo, hi]")
    lo = _as_number(window[0], "ill.window[0]")
    hi = _as_number(window[1], "ill.window[1]")
    _expect(lo < hi, "ill.window", "window must be increasing")
    return IllParams(amp, width, center, velocity, (lo, hi))


_TOP_KEYS = ("kind", "physical", "numerical", "wave", "ill", "epsilon",
             "sweep", "target", "checks", "thresholds", "output_dir", "seed",
             "noise_amplitude",
             # top-level shorthands folded into the physical section
             "endpoints", "kappa", "mu_tilde")


def parse_config(text: str) -> ExperimentConfig:
    """Validate a JSON experiment document into an ExperimentConfig."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise ConfigInvalid("config must be a JSON object")
    _take(doc, "config", _TOP_KEYS)

    if "kind" not in doc:
        raise ConfigInvalid("kind: required key is missing")
    kind_raw = str(doc["kind"]).strip().lower()
    if kind_raw not in _KIND_ALIASES:
        raise ConfigInvalid(f"kind: unknown experiment kind {doc['kind']!r}")
    kind = _KIND_ALIASES[kind_raw]

    physical_raw = dict(doc.get("physical", {}))
    if not isinstance(doc.get("physical", {}), dict):
        raise ConfigInvalid("physical: expected an object")
    for short in ("endpoints", "kappa", "mu_tilde"):
        if short in doc:
            if short in physical_raw:
                raise ConfigInvalid(f"{short}: also given under physical.{short}")
            physical_raw[short] = doc[short]
    physical = _parse_physical(physical_raw)

    target_raw = str(doc.get("target", "well_prepared")).strip().lower()
    if target_raw not in _KIND_ALIASES:
        raise ConfigInvalid(f"target: unknown experiment kind {doc.get('target')!r}")
    target = _KIND_ALIASES[target_raw]
    _expect(target in (ExperimentKind.WELL_PREPARED, ExperimentKind.ILL_PREPARED),
            "target", "sweep target must be well_prepared or ill_prepared")

    for section in ("numerical", "wave", "ill", "thresholds"):
        if section in doc and not isinstance(doc[section], dict):
            raise ConfigInvalid(f"{section}: expected an object")
    effective = target if kind is ExperimentKind.SWEEP else kind
    numerical = _parse_numerical(dict(doc.get("numerical", {})), effective)
    wave = _parse_wave(dict(doc.get("wave", {})))
    ill = _parse_ill(dict(doc.get("ill", {})))

    epsilon = _as_number(doc.get("epsilon", 0.1), "epsilon")
    _expect(epsilon > 0.0, "epsilon", "must be positive")

    sweep_raw = doc.get("sweep", [0.2, 0.1, 0.05] if kind is ExperimentKind.SWEEP else [])
    _expect(isinstance(sweep_raw, (list, tuple)), "sweep", "expected a list")
    sweep = []
    for i, e in enumerate(sweep_raw):
        e = _as_number(e, f"sweep[{i}]")
        _expect(e > 0.0, f"sweep[{i}]", "must be positive")
        sweep.append(e)
    _expect(len(set(sweep)) == len(sweep), "sweep", "values must be distinct")
    sweep = tuple(sorted(sweep, reverse=True))

    checks_raw = doc.get("checks")
    if checks_raw is None:
        if kind is ExperimentKind.SWEEP:
            checks = ("eps_rate",) if target is ExperimentKind.WELL_PREPARED \
                else ("ill_trends",)
        else:
            checks = _DEFAULT_CHECKS[kind]
    else:
        _expect(isinstance(checks_raw, (list, tuple)), "checks", "expected a list")
        checks = []
        for i, name in enumerate(checks_raw):
            _expect(isinstance(name, str), f"checks[{i}]", "expected a string")
            _expect(name in _KNOWN_CHECKS, f"checks[{i}]",
                    f"unknown check {name!r}; known: {', '.join(_KNOWN_CHECKS)}")
            _expect(name not in checks, f"checks[{i}]", f"duplicate check {name!r}")
            checks.append(name)
        checks = tuple(checks)

    thresholds = {}
    for name, value in dict(doc.get("thresholds", {})).items():
        _expect(name in _KNOWN_CHECKS, f"thresholds.{name}", "unknown check")
        thresholds[name] = _as_number(value, f"thresholds.{name}")

    output_dir = doc.get("output_dir", "out")
    _expect(isinstance(output_dir, str) and output_dir, "output_dir",
            "expected a non-empty path")
    seed = _as_int(doc.get("seed", 0), "seed")
    noise = _as_number(doc.get("noise_amplitude", 0.0), "noise_amplitude")
    _expect(noise >= 0.0, "noise_amplitude", "must be non-negative")

    return ExperimentConfig(kind=kind, physical=physical, numerical=numerical,
                            wave=wave, ill=ill, epsilon=epsilon, sweep=sweep,
                            target=target, checks=checks, thresholds=thresholds,
                            output_dir=output_dir, seed=seed,
                            noise_amplitude=noise)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read())


def config_echo(cfg: ExperimentConfig) -> dict:
    """Normalized plain-dict form of a config, as echoed in reports."""
    return {
        "kind": cfg.kind.value,
        "physical": {"kappa": cfg.physical.kappa, "mu_tilde": cfg.physical.mu_tilde,
                     "endpoints": [cfg.physical.left, cfg.physical.right]},
        "numerical": {"half_length": cfg.numerical.resolved_half_length(),
                      "cells": cfg.numerical.cells, "dt": cfg.numerical.dt,
                      "scheme": cfg.numerical.scheme.value,
                      "bc": cfg.numerical.bc.value,
                      "end_time": cfg.numerical.end_time,
                      "snapshot_times": list(cfg.numerical.snapshot_times),
                      "cfl_safety": cfg.numerical.cfl_safety},
        "wave": {"half_width": cfg.wave.half_width, "nodes": cfg.wave.nodes,
                 "newton_tol": cfg.wave.newton_tol, "max_iters": cfg.wave.max_iters,
                 "tail_tol": cfg.wave.tail_tol},
        "ill": {"bump_amplitude": cfg.ill.bump_amplitude,
                "bump_width": cfg.ill.bump_width,
                "bump_center": cfg.ill.bump_center,
                "velocity": cfg.ill.velocity, "window": list(cfg.ill.window)},
        "epsilon": cfg.epsilon,
        "sweep": list(cfg.sweep),
        "target": cfg.target.value,
        "checks": list(cfg.checks),
        "thresholds": {name: cfg.threshold(name) for name in cfg.checks},
        "output_dir": cfg.output_dir,
        "seed": cfg.seed,
        "noise_amplitude": cfg.noise_amplitude,
    }
