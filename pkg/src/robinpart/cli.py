"""Command-line entry point: ``robinpart {eig,optimize,verify,honeycomb,cheeger}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure. Errors are reported as one JSON object on stderr; final
answers go to stdout as ``key=value`` lines.
"""
from __future__ import annotations

import argparse
import contextlib
import datetime as dt
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import honeycomb_scaling, worker_count
from .cheeger import cheeger_convex_polygon
from .eigen import assemble, smallest_eigenpair
from .energy import total_energy
from .errors import ConfigError, NumericalError, RobinPartError
from .grid import make_grid, rasterize_ball, rasterize_polygon, regular_polygon
from .io import load_partition, save_eigen_result, save_partition, write_csv, write_pgm, write_trace
from .optimizer import OptimizerConfig, optimize
from .verify import CHECK_HEADER, SUITES, competitors_suite, faber_krahn_suite, probes_suite, scaling_suite

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class CliConfigError(ConfigError):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliConfigError(message)


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


@contextlib.contextmanager
def run_directory(path: Path):
    """Own ``path`` for the duration of a run through an exclusive lock file."""
    path.mkdir(parents=True, exist_ok=True)
    lock = path / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise CliConfigError(f"run directory {path} is locked by another process") from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield path
    finally:
        lock.unlink(missing_ok=True)


def write_manifest(out: Path, command: str, config: dict, started: str, outputs: list[Path]) -> Path:
    manifest = {
        "command": command,
        "config": config,
        "version": __version__,
        "config_hash": config_hash(config),
        "start": started,
        "end": _now(),
        "outputs": sorted(str(p) for p in outputs),
    }
    path = out / "run_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat()


def _emit(**pairs):
    for key, value in pairs.items():
        if isinstance(value, float):
            value = f"{value:.12g}"
        print(f"{key}={value}")


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise CliConfigError(f"missing required option --{name.replace('_', '-')}", field=name)


# commands ----------------------------------------------------------------------------


def cmd_eig(args) -> int:
    _require(args, "beta", "h")
    shape = args.shape
    h = args.h
    if shape == "box":
        _require(args, "side")
        grid = make_grid([args.side] * args.dim, h)
        S = grid.full()
    elif shape == "disk":
        _require(args, "radius")
        grid = make_grid([2 * args.radius + 8 * h] * args.dim, h)
        S = rasterize_ball(grid, [e / 2 for e in grid.extent], args.radius)
    else:
        _require(args, "polygon")
        vertices = np.asarray(json.loads(Path(args.polygon).read_text()), dtype=float)
        lo, hi = vertices.min(axis=0), vertices.max(axis=0)
        shift = 4 * h - lo
        grid = make_grid((hi - lo) + 8 * h, h)
        S = rasterize_polygon(grid, vertices + shift)
    boundary = args.boundary if args.boundary != "auto" else ("staircase" if shape == "box" else "isotropic")
    config = {
        "shape": shape,
        "side": args.side,
        "radius": args.radius,
        "polygon": args.polygon,
        "dim": args.dim,
        "beta": args.beta,
        "h": h,
        "tol": args.tol,
        "boundary": boundary,
    }
    started = _now()
    out = Path(args.out)
    with run_directory(out):
        res = smallest_eigenpair(assemble(grid, S, args.beta, boundary), tol=args.tol)
        outputs = save_eigen_result(res, out / "eig", raster=args.pgm)
        outputs.append(write_manifest(out, "eig", config, started, outputs))
    _emit(**{"lambda": res.lam, "residual": res.residual, "iterations": res.iterations})
    return EXIT_OK


def resolve_optimizer_config(args) -> dict:
    config = OptimizerConfig.from_dict({"extent": [1.0, 1.0]}).to_dict()
    if args.config:
        try:
            config.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise CliConfigError(f"cannot read config file: {exc}", field="config") from None
    overrides = {
        "k": args.k,
        "beta": args.beta,
        "h": args.h,
        "seed": args.seed,
        "max_sweeps": args.max_sweeps,
        "energy_tol": args.energy_tol,
        "min_phase_cells": args.min_phase_cells,
        "eig_tol": args.eig_tol,
        "allow_unassigned": args.allow_unassigned,
    }
    if args.side is not None:
        overrides["extent"] = [args.side, args.side]
    config.update({k: v for k, v in overrides.items() if v is not None})
    # materialize snapped extent so the hash reflects the grid actually used
    return OptimizerConfig.from_dict(config).to_dict()


def cmd_optimize(args) -> int:
    config = resolve_optimizer_config(args)
    started = _now()
    out = Path(args.out)
    with run_directory(out):
        state, trace = optimize(OptimizerConfig.from_dict(config))
        energy = total_energy(state)
        outputs = save_partition(state, out, energy)
        outputs.append(write_trace(trace, state.k, out / "trace.csv"))
        outputs.append(write_manifest(out, "optimize", config, started, outputs))
    _emit(total_energy=energy.total, sweeps=len(trace.records) - 1, k=state.k)
    return EXIT_OK


def _default_state(k: int, beta: float, h: float):
    config = OptimizerConfig(grid=make_grid([1.0, 1.0], h), k=k, beta=beta, seed=42)
    return optimize(config)[0]


def cmd_verify(args) -> int:
    suites = SUITES if args.suite == "all" else (args.suite,)
    if args.suite != "all" and args.suite not in SUITES:
        raise CliConfigError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)} or all", field="suite")
    config = {"suite": args.suite, "state": args.state, "beta": args.beta, "h": args.h}
    started = _now()
    out = Path(args.out)
    checks = []
    with run_directory(out):
        state = load_partition(args.state) if args.state else None
        for suite in suites:
            if suite == "faber-krahn":
                checks += faber_krahn_suite()
            elif suite == "scaling":
                checks += scaling_suite(beta=args.beta)
            elif suite == "probes":
                checks += probes_suite(state or _default_state(4, args.beta, args.h))
            elif suite == "competitors":
                checks += competitors_suite(state or _default_state(2, args.beta, args.h))
        outputs = [write_csv(out / "verdicts.csv", CHECK_HEADER, [c.row() for c in checks])]
        outputs.append(write_manifest(out, "verify", config, started, outputs))
    failed = [c for c in checks if not c.passed]
    for c in failed:
        print(json.dumps({"failed": c.name, "suite": c.suite, "value": c.value, "threshold": c.threshold, "detail": c.detail}), file=sys.stderr)
    _emit(checks=len(checks), failed=len(failed), passed=str(not failed).lower())
    return EXIT_OK if not failed else EXIT_VERIFY


def cmd_honeycomb(args) -> int:
    try:
        k_values = [int(v) for v in args.k.split(",")]
    except ValueError:
        raise CliConfigError(f"--k must be a comma-separated list of integers, got {args.k!r}", field="k") from None
    seeds = list(range(args.seeds))
    config = {"k": k_values, "seeds": seeds, "beta": args.beta, "h": args.h, "side": args.side, "threads": worker_count()}
    started = _now()
    out = Path(args.out)
    with run_directory(out):
        table = honeycomb_scaling(args.beta, args.side, k_values, args.h, seeds)
        rows = [[r.k, r.best_energy, r.scaled, r.ratio_to_limit, r.best_seed] for r in table.rows]
        outputs = [write_csv(out / "honeycomb.csv", ["k", "best_energy", "scaled", "ratio_to_limit", "best_seed"], rows)]
        for (k, seed), state in sorted(table.states.items()):
            outputs.append(write_pgm(out / f"partition_k{k}_seed{seed}.pgm", state.labels() + 1, maxval=max(255, k)))
        outputs.append(write_manifest(out, "honeycomb", config, started, outputs))
    _emit(target=table.target)
    for r in table.rows:
        _emit(**{f"s_{r.k}": r.scaled})
    return EXIT_OK


def cmd_cheeger(args) -> int:
    if args.polygon in ("hexagon", "square", "triangle"):
        sides = {"hexagon": 6, "square": 4, "triangle": 3}[args.polygon]
        vertices = regular_polygon(sides, area=args.area)
    else:
        try:
            vertices = json.loads(Path(args.polygon).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliConfigError(f"cannot read polygon file: {exc}", field="polygon") from None
    value = cheeger_convex_polygon(vertices)
    print(f"h={value:.10f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="robinpart", description="Robin eigenvalue optimal partitions")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("eig", help="first Robin eigenvalue of a rasterized shape")
    p.add_argument("--shape", choices=["box", "disk", "polygon"], default="box")
    p.add_argument("--side", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--polygon", help="JSON file with a list of [x, y] vertices")
    p.add_argument("--dim", type=int, default=2, choices=[1, 2, 3])
    p.add_argument("--beta", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--boundary", choices=["auto", "staircase", "isotropic"], default="auto")
    p.add_argument("--no-pgm", dest="pgm", action="store_false")
    p.add_argument("--out", default="out/eig")
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("optimize", help="minimize the k-phase energy on a square box")
    p.add_argument("--config")
    p.add_argument("--k", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--side", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-sweeps", type=int)
    p.add_argument("--energy-tol", type=float)
    p.add_argument("--min-phase-cells", type=int)
    p.add_argument("--eig-tol", type=float)
    p.add_argument("--allow-unassigned", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--out", default="out/optimize")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", default="all")
    p.add_argument("--state", help="partition bundle directory written by optimize")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--h", type=float, default=1 / 64)
    p.add_argument("--out", default="out/verify")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("honeycomb", help="scaled optimal energies for several k")
    p.add_argument("--k", default="1,4,9,16")
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--h", type=float, default=1 / 64)
    p.add_argument("--side", type=float, default=1.0)
    p.add_argument("--out", default="out/honeycomb")
    p.set_defaults(func=cmd_honeycomb)

    p = sub.add_parser("cheeger", help="Cheeger constant of a convex polygon")
    p.add_argument("--polygon", required=True, help="hexagon | square | triangle | JSON vertex file")
    p.add_argument("--area", type=float, default=1.0)
    p.set_defaults(func=cmd_cheeger)
    return parser


def _error(exc: Exception, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    field = getattr(exc, "field", None)
    if field:
        payload["field"] = field
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise CliConfigError("no command given; choose eig, optimize, verify, honeycomb or cheeger", field="command")
        return args.func(args)
    except NumericalError as exc:
        return _error(exc, EXIT_NUMERIC)
    except (ConfigError, ValueError, OSError) as exc:
        return _error(exc, EXIT_CONFIG)
    except RobinPartError as exc:
        return _error(exc, EXIT_NUMERIC)


if __name__ == "__main__":
    sys.exit(main())
