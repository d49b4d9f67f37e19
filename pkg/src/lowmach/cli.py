"""Command-line entry points.

Subcommands: `wave` (construct and dump the self-similar profile),
`profiles` (dump background/corrected fields at one time), `simulate`
(one well-prepared, ill-prepared or limit run), `sweep` (one run per
epsilon plus rate fits) and `check` (named verification checks).  Each
takes --config plus a few overriding flags; the exit code is 0 exactly
when every requested check passed.
"""

import argparse
import json
import os
import sys

from .config import ExperimentKind, parse_config
from .errors import ConfigInvalid, LowmachError
from .experiments import run_experiment
from .profiles import Frame, ProfileSet
from .wave import WaveSolveOptions, solve_wave

_SIMULATE_KINDS = ("well_prepared", "ill_prepared", "limit_heat")


def _add_common(parser):
    parser.add_argument("--config", help="path to a JSON experiment config")
    parser.add_argument("--epsilon", type=float, help="override epsilon")
    parser.add_argument("--dt", type=float, help="override the time step")
    parser.add_argument("--cells", type=int, help="override the grid cell count")
    parser.add_argument("--end-time", type=float, help="override the end time")
    parser.add_argument("--out", help="override the output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowmach",
        description="Diffusive-wave construction and low Mach number "
                    "simulations for 1D heat-conducting compressible flow.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
            ("wave", "solve the self-similar profile and fit its tails"),
            ("simulate", "run one simulation and its configured checks"),
            ("sweep", "run one simulation per epsilon and fit rates"),
            ("check", "run named verification checks"),
            ("profiles", "dump background and corrected profile fields")):
        p = sub.add_parser(name, help=doc)
        _add_common(p)
        if name == "profiles":
            p.add_argument("--time", type=float, default=0.0,
                           help="evaluation time for the field dump")
    return parser


def _load_doc(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}")
    doc = json.loads(text) if text.strip() else {}
    if not isinstance(doc, dict):
        raise ConfigInvalid("config must be a JSON object")
    return doc


def _apply_overrides(doc: dict, args) -> dict:
    if args.epsilon is not None:
        doc["epsilon"] = args.epsilon
    numeric = dict(doc.get("numerical", {}))
    if args.dt is not None:
        numeric["dt"] = args.dt
    if args.cells is not None:
        numeric["cells"] = args.cells
    if getattr(args, "end_time", None) is not None:
        numeric["end_time"] = args.end_time
    if numeric:
        doc["numerical"] = numeric
    if args.out is not None:
        doc["output_dir"] = args.out
    return doc


def _resolve_kind(doc: dict, command: str) -> dict:
    if command == "wave":
        doc["kind"] = "wave"
    elif command == "sweep":
        doc["kind"] = "sweep"
    elif command == "check":
        doc["kind"] = "check"
    elif command == "simulate":
        kind = str(doc.get("kind", "well_prepared")).strip().lower()
        if kind not in _SIMULATE_KINDS:
            raise ConfigInvalid(
                f"kind: simulate expects one of {', '.join(_SIMULATE_KINDS)}, "
                f"got {kind!r}")
        doc["kind"] = kind
    elif command == "profiles":
        doc["kind"] = "wave"
    return doc


def _run_profiles_dump(cfg, time: float) -> int:
    from .profiles import dump_fields  # local import keeps startup light

    wave = solve_wave(cfg.physical.left, cfg.physical.right,
                      cfg.physical.kappa,
                      WaveSolveOptions(half_width=cfg.wave.half_width,
                                       nodes=cfg.wave.nodes,
                                       newton_tol=cfg.wave.newton_tol,
                                       max_iters=cfg.wave.max_iters,
                                       tail_tol=cfg.wave.tail_tol))
    ps = ProfileSet(wave=wave, mu_tilde=cfg.physical.mu_tilde,
                    epsilon=cfg.epsilon, frame=Frame.LAGRANGIAN)
    from .grids import Grid

    grid = Grid(cfg.numerical.resolved_half_length(), cfg.numerical.cells)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, f"profiles_t{time:g}.csv")
    dump_fields(ps, grid.nodes, time, path)
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = _load_doc(args.config)
        doc = _resolve_kind(doc, args.command)
        doc = _apply_overrides(doc, args)
        cfg = parse_config(json.dumps(doc))
        if args.command == "profiles":
            if args.time < 0.0:
                raise ConfigInvalid("--time must be non-negative")
            return _run_profiles_dump(cfg, args.time)
        report = run_experiment(cfg)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"config error: invalid JSON: {exc}", file=sys.stderr)
        return 2
    except LowmachError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2

    for line in report.lines():
        print(line)
    print(f"outputs in {cfg.output_dir}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
