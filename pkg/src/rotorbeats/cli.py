"""
Command-line driver.

    rotorbeats --mode evolve --j 11 --out theta.csv
    rotorbeats --mode density --j 11 --t0 3.141592653589793 --samples 1 --out dens.csv
    rotorbeats --mode trajectory --j 11 --out traj.csv
    rotorbeats --mode verify --j 11

Every numeric value is written with 17 significant digits so files read back
to the exact in-memory doubles.  Each run also writes ``<out>.meta.json`` with
the full configuration; pass it back with ``--config`` to repeat the run.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import find_critical_points
from .coherent import (
    InadequateTruncationError,
    PhasePoint,
    TOP_SHELL_TOLERANCE,
    _top_shell_fraction,
    adequate_config,
    coherent_coefficients,
    z_from_phase,
)
from .dynamics import (
    Free,
    Rotation,
    SphericalGrid,
    UndefinedPhaseError,
    density_free,
    density_rotation,
    evolve_series,
    trajectory,
)
from .hilbert import RepresentationConfig
from .verify import run_checks

EVOLVE_COLUMNS = [
    "t", "theta", "phi", "phi_unwrapped", "x3_mean", "xplus_re", "xplus_im",
    "j1_mean", "j2_mean", "j3_mean", "clamped",
]


class UsageError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    mode: str = "evolve"
    theta_bar: float = math.pi / 2
    phi_bar: float = 0.0
    l3: float = 11.0
    l_norm: float = math.sqrt(132.0)
    hamiltonian: str = "free"
    omega3: float = 1.0
    t0: float = 0.0
    t1: float = 8 * math.pi
    samples: int = 2000
    n_theta: int = 128
    n_phi: int = 256
    j_max: object = "auto"
    out: str = ""
    format: str = "csv"
    threads: int = 1

    def validate(self):
        if self.mode not in ("evolve", "density", "trajectory", "verify"):
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.hamiltonian not in ("free", "rotation"):
            raise UsageError(f"unknown hamiltonian {self.hamiltonian!r}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.format!r}")
        if self.samples < 1:
            raise UsageError("samples must be positive")
        if self.samples > 1 and not self.t1 > self.t0:
            raise UsageError("t1 must exceed t0")
        if self.n_theta < 16 or self.n_phi < 16:
            raise UsageError("grid dimensions must be at least 16")
        if self.n_phi % 2:
            raise UsageError("the phi dimension of the grid must be even")
        if self.l_norm < abs(self.l3):
            raise UsageError("l_norm must be at least |l3|")
        if self.j_max != "auto" and (not isinstance(self.j_max, int) or self.j_max < 2):
            raise UsageError("jmax must be 'auto' or an integer >= 2")
        if self.threads < 1:
            raise UsageError("threads must be positive")
        return self

    def times(self):
        if self.samples == 1:
            return np.array([self.t0])
        return np.linspace(self.t0, self.t1, self.samples)

    def hamiltonian_obj(self):
        return Free() if self.hamiltonian == "free" else Rotation(np.array([0.0, 0.0, self.omega3]))

    def phase_point(self):
        return PhasePoint.standard(self.l3, self.l_norm, self.theta_bar, self.phi_bar)


def fmt(x):
    """17 significant digits, scientific notation."""
    return format(float(x), ".16e")


def dumps(obj, indent=0):
    """JSON text with every float in :func:`fmt` form."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return fmt(x) if math.isfinite(x) else "null"
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def write_table(path, columns, rows, form):
    path = Path(path)
    if form == "csv":
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    else:
        body = {"columns": columns, "rows": [[int(v) if isinstance(v, str) else float(v) for v in r] for r in rows]}
        path.write_text(dumps(body) + "\n", encoding="utf-8", newline="\n")


def meta_path(out):
    return Path(str(out) + ".meta.json")


def _config_dict(cfg):
    return dataclasses.asdict(cfg)


def _select_config(cfg, z):
    if cfg.j_max == "auto":
        try:
            return adequate_config(z)
        except InadequateTruncationError as exc:
            raise NumericalFailure(str(exc)) from exc
    return RepresentationConfig(cfg.j_max)


def _truncation_report(z, rep):
    tail = _top_shell_fraction(coherent_coefficients(z, rep, check=False, normalize=True))
    return {"j_max": rep.j_max, "tail_mass": tail}


def cmd_evolve(cfg):
    z = z_from_phase(cfg.phase_point())
    rep = _select_config(cfg, z)
    trunc = _truncation_report(z, rep)
    if trunc["tail_mass"] > TOP_SHELL_TOLERANCE:
        raise NumericalFailure(f"j_max={rep.j_max} inadequate, tail mass {trunc['tail_mass']:.3e}")
    ts = evolve_series(z, cfg.times(), cfg.hamiltonian_obj(), rep, cfg.threads)
    unwrapped = ts.phi_unwrapped
    rows = [
        (t, th, ph, pu, x3, xp.real, xp.imag, jm[0], jm[1], jm[2], "1" if cl else "0")
        for t, th, ph, pu, x3, xp, jm, cl in zip(
            ts.times, ts.theta, ts.phi, unwrapped, ts.x3_mean, ts.xplus_mean, ts.j_mean, ts.clamped
        )
    ]
    write_table(cfg.out, EVOLVE_COLUMNS, rows, cfg.format)
    meta = {"config": _config_dict(cfg), **trunc, "clamp_count": ts.clamp_count, "version": __version__}
    meta_path(cfg.out).write_text(dumps(meta) + "\n", encoding="utf-8", newline="\n")
    return 0


def _density_files(out, n):
    out = Path(out)
    if n == 1:
        return [out]
    return [out.with_name(f"{out.stem}_t{k:04d}{out.suffix}") for k in range(n)]


def cmd_density(cfg):
    z = z_from_phase(cfg.phase_point())
    grid = SphericalGrid(cfg.n_theta, cfg.n_phi)
    times = cfg.times()
    files = _density_files(cfg.out, len(times))
    th, ph = np.meshgrid(grid.theta, grid.phi, indexing="ij")
    frames = []
    for t, path in zip(times, files):
        if cfg.hamiltonian == "free":
            field = density_free(z, grid, float(t), cfg.threads)
        else:
            field = density_rotation(z, grid, [0.0, 0.0, cfg.omega3], float(t), cfg.threads)
        rows = zip(th.ravel(), ph.ravel(), field.values.ravel())
        write_table(path, ["theta", "phi", "p"], rows, cfg.format)
        cps = find_critical_points(field)
        frames.append({
            "t": float(t),
            "file": path.name,
            "integral": field.integral(),
            "critical_points": [
                {"kind": c.kind, "i_theta": c.index[0], "i_phi": c.index[1],
                 "theta": c.theta, "phi": c.phi, "value": c.value}
                for c in cps
            ],
        })
    meta = {"config": _config_dict(cfg), "frames": frames, "version": __version__}
    meta_path(cfg.out).write_text(dumps(meta) + "\n", encoding="utf-8", newline="\n")
    return 0


def cmd_trajectory(cfg):
    z = z_from_phase(cfg.phase_point())
    rep = _select_config(cfg, z)
    trunc = _truncation_report(z, rep)
    if trunc["tail_mass"] > TOP_SHELL_TOLERANCE:
        raise NumericalFailure(f"j_max={rep.j_max} inadequate, tail mass {trunc['tail_mass']:.3e}")
    try:
        pts = trajectory(z, cfg.times(), cfg.hamiltonian_obj(), rep, cfg.threads)
    except UndefinedPhaseError as exc:
        raise NumericalFailure("phi undefined at t = " + ", ".join(fmt(t) for t in exc.times)) from exc
    rows = ((t, *p) for t, p in zip(cfg.times(), pts))
    write_table(cfg.out, ["t", "x", "y", "z"], rows, cfg.format)
    meta = {"config": _config_dict(cfg), **trunc, "version": __version__}
    meta_path(cfg.out).write_text(dumps(meta) + "\n", encoding="utf-8", newline="\n")
    return 0


def cmd_verify(cfg):
    z = z_from_phase(cfg.phase_point())
    rep = _select_config(cfg, z)
    checks = run_checks(z, rep, cfg.omega3)
    ok = all(c.passed for c in checks)
    report = {
        "config": _config_dict(cfg),
        "j_max": rep.j_max,
        "checks": [c.as_dict() for c in checks],
        "pass": ok,
        "version": __version__,
    }
    text = dumps(report) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8", newline="\n")
    sys.stdout.write(text)
    return 0 if ok else 1


COMMANDS = {"evolve": cmd_evolve, "density": cmd_density, "trajectory": cmd_trajectory, "verify": cmd_verify}


def _parse_grid(text):
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 128x256, got {text!r}")


def _parse_jmax(text):
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"jmax must be 'auto' or an integer, got {text!r}")


def build_parser():
    p = argparse.ArgumentParser(
        prog="rotorbeats",
        description="Coherent-state dynamics of the quantum rigid rotor.",
    )
    # defaults are None so that --config values survive unless overridden
    p.add_argument("--config", help="JSON sidecar of an earlier run to repeat")
    p.add_argument("--mode", choices=sorted(COMMANDS))
    p.add_argument("--j", type=int, help="shorthand for --l3 J --l-norm sqrt(J(J+1))")
    p.add_argument("--theta-bar", type=float)
    p.add_argument("--phi-bar", type=float)
    p.add_argument("--l3", type=float)
    p.add_argument("--l-norm", type=float)
    p.add_argument("--hamiltonian", choices=["free", "rotation"])
    p.add_argument("--omega3", type=float)
    p.add_argument("--t0", type=float)
    p.add_argument("--t1", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--grid", type=_parse_grid, help="n_theta x n_phi, e.g. 128x256")
    p.add_argument("--jmax", type=_parse_jmax, help="'auto' or a fixed truncation")
    p.add_argument("--out", help="output path (default: <mode>.<format>)")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--threads", type=int)
    return p


def config_from_args(args):
    base = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        base = dict(data.get("config", data))
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(base) - fields
    if unknown:
        raise UsageError(f"unknown config keys {sorted(unknown)}")
    cfg = RunConfig(**base)

    if args.j is not None:
        if args.l3 is not None or args.l_norm is not None:
            raise UsageError("--j cannot be combined with --l3/--l-norm")
        cfg.l3, cfg.l_norm = float(args.j), math.sqrt(args.j * (args.j + 1.0))
    overrides = {
        "mode": args.mode, "theta_bar": args.theta_bar, "phi_bar": args.phi_bar,
        "l3": args.l3, "l_norm": args.l_norm, "hamiltonian": args.hamiltonian,
        "omega3": args.omega3, "t0": args.t0, "t1": args.t1, "samples": args.samples,
        "j_max": args.jmax, "out": args.out, "format": args.format, "threads": args.threads,
    }
    for k, v in overrides.items():
        if v is not None:
            setattr(cfg, k, v)
    if args.grid is not None:
        cfg.n_theta, cfg.n_phi = args.grid
    if not cfg.out and cfg.mode != "verify":
        cfg.out = f"{cfg.mode}.{cfg.format}"
    if isinstance(cfg.j_max, float) and cfg.j_max.is_integer():
        cfg.j_max = int(cfg.j_max)
    return cfg.validate()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rotorbeats: error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[cfg.mode](cfg)
    except (NumericalFailure, InadequateTruncationError) as exc:
        print(f"rotorbeats: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
