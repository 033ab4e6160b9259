"""Command-line experiments.

    freqspiral simulate    lattice run with PPM frames, vortex log and final state
    freqspiral sweep-rate  canonical-spiral (or minimal-model) rotation rate versus omega
    freqspiral branch      minimal-model equilibrium branch and saddle-node points
    freqspiral lindstedt   series-versus-simulation comparison table

Every run writes ``manifest.txt`` (sorted ``key=value`` lines) next to its
outputs. Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .imaging import ColorMapConfig, Representation, atomic_write_bytes, emit_field_image
from .integrator import IntegratorConfig, ProbeKind, ProbeSpec, evolve
from .lattice import (Boundary, GridSpec, build_defector_frequencies, build_normal_frequencies,
                      init_phase_spiral, init_random_phases, rhs, scan_vortices, zero_frequencies)
from .lindstedt import FIELDS, compare_grid, compare_minimal
from .minimal import simulate_minimal, trace_branch
from .observables import average_frequencies, spiral_rotation_rate


class UsageError(Exception):
    pass


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    atomic_write_bytes(path, buf.getvalue().encode("utf-8"))


def write_manifest(out: Path, subcommand: str, args: argparse.Namespace, **extra) -> None:
    entries = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    entries.update(extra)
    entries["subcommand"] = subcommand
    entries["version"] = __version__
    entries["backend"] = kernels.active_backend()
    entries["out"] = str(out)
    lines = [f"{k}={fmt(v) if v is not None else 'none'}" for k, v in sorted(entries.items())]
    atomic_write_bytes(out / "manifest.txt", ("\n".join(lines) + "\n").encode("utf-8"))


# -- flag parsing ---------------------------------------------------------------

def parse_freq(text: str, spec: GridSpec):
    kind, _, rest = text.partition(":")
    try:
        if kind == "zero" and not rest:
            return zero_frequencies(spec), None
        if kind == "normal":
            seed = int(rest)
            return build_normal_frequencies(spec, seed), seed
        if kind == "defector":
            r, c, omega = rest.split(",")
            return build_defector_frequencies(spec, (int(r), int(c)), float(omega)), None
    except ValueError as exc:
        raise UsageError(f"bad --freq {text!r}: {exc}") from None
    raise UsageError(f"bad --freq {text!r}; expected normal:SEED, zero or defector:R,C,OMEGA")


def parse_init(text: str, spec: GridSpec):
    kind, _, rest = text.partition(":")
    try:
        if kind == "random":
            seed = int(rest)
            return init_random_phases(spec, seed), seed
        if kind == "spiral" and not rest:
            return init_phase_spiral(spec), None
    except ValueError as exc:
        raise UsageError(f"bad --init {text!r}: {exc}") from None
    raise UsageError(f"bad --init {text!r}; expected random:SEED or spiral")


def parse_epsilons(text: str) -> list:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"--epsilons must be a comma-separated list of numbers, got {text!r}") from None
    if not values:
        raise UsageError("--epsilons is empty")
    return values


def omega_grid(lo: float, hi: float, step: float) -> list:
    if not step > 0 or hi < lo:
        raise UsageError(f"empty sweep: min={lo}, max={hi}, step={step}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + j * step, 12) for j in range(n)]


def _grid(args) -> GridSpec:
    try:
        return GridSpec(args.rows, args.cols, Boundary(args.boundary))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config(args) -> IntegratorConfig:
    try:
        return IntegratorConfig(args.dt, args.t_transient, args.t_measure)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- subcommands ------------------------------------------------------------------

def cmd_simulate(args) -> int:
    spec = _grid(args)
    config = _config(args)
    freq, freq_seed = parse_freq(args.freq, spec)
    theta, init_seed = parse_init(args.init, spec)
    if args.k < 0:
        raise UsageError("--k must be >= 0")
    if args.frames_every < 0:
        raise UsageError("--frames-every must be >= 0")
    cmap = ColorMapConfig(v_floor=args.v_floor)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out, "simulate", args, seed_freq=freq_seed, seed_init=init_seed)

    every = args.frames_every or max(config.n_measure, 1)
    probes = [ProbeSpec(ProbeKind.PHASE_SNAPSHOT, every)] if config.n_measure > 0 else []
    final, records = evolve(theta, freq, args.k, config, probes)

    if probes:
        snaps = records[0].samples
        vortex_rows = []
        for i, snap in enumerate(snaps):
            vortices = scan_vortices(snap)
            vortex_rows += [(snap.time, v.row, v.col, v.charge) for v in vortices]
            emit_field_image(snap, Representation.PHASE, cmap, out / f"phase_{i:06d}.ppm", vortices)
            emit_field_image(rhs(snap, freq, args.k), Representation.INST_FREQ, cmap,
                             out / f"instfreq_{i:06d}.ppm", vortices)
            if i > 0:
                avg = average_frequencies(snaps[0], snap)
                emit_field_image(avg, Representation.AVG_FREQ, cmap,
                                 out / f"avgfreq_{i:06d}.ppm", vortices)
        write_csv(out / "vortices.csv", ("time", "row", "col", "charge"), vortex_rows)

    rows = ((r, c, final.theta[r, c], freq.omega[r, c])
            for r in range(spec.rows) for c in range(spec.cols))
    write_csv(out / "final_state.csv", ("row", "col", "theta", "omega"), rows)
    return 0


def cmd_sweep_rate(args) -> int:
    omegas = omega_grid(args.omega_min, args.omega_max, args.omega_step)
    config = _config(args)
    if not args.minimal:
        args.boundary = Boundary.FREE.value
        spec = _grid(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out, "sweep-rate", args)
    rows = []
    for omega in omegas:
        if args.minimal:
            m = simulate_minimal(omega, config)
        else:
            m = spiral_rotation_rate(spec, omega, config)
        rows.append((omega, m.rate, m.windings, m.horizon))
    write_csv(out / "rates.csv", ("omega", "rate", "windings", "horizon"), rows)
    return 0


def cmd_branch(args) -> int:
    if args.samples < 16:
        raise UsageError("--samples must be >= 16")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out, "branch", args)
    branch = trace_branch(args.samples)
    write_csv(out / "branch.csv", ("zeta", "omega", "stability"),
              ((s.zeta, s.omega, s.stability.value) for s in branch.samples))
    write_csv(out / "saddle_nodes.csv", ("zeta", "omega"), branch.saddle_nodes)
    return 0


def cmd_lindstedt(args) -> int:
    epsilons = parse_epsilons(args.epsilons)
    for eps in epsilons:
        if not 0 < eps <= 0.5:
            raise UsageError(f"epsilon {eps} outside (0, 0.5]")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out, "lindstedt", args)
    if args.target == "minimal":
        rows = compare_minimal(epsilons)
    else:
        args.boundary, args.cols = Boundary.FREE.value, args.rows
        rows = compare_grid(epsilons, _grid(args))
    write_csv(out / "comparison.csv", FIELDS, ([getattr(r, f) for f in FIELDS] for r in rows))
    return 0


# -- parser -----------------------------------------------------------------------

def _integrator_flags(p, transient: float, measure: float) -> None:
    p.add_argument("--dt", type=float, default=0.125, help="RK4 step (default 0.125)")
    p.add_argument("--t-transient", type=float, default=transient, help="unrecorded time")
    p.add_argument("--t-measure", type=float, default=measure, help="recorded time")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freqspiral", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"freqspiral {__version__}")
    parser.add_argument("--backend", choices=("auto", "compiled", "python"), default="auto",
                        help="RK4 kernel backend (default: compiled if built)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="run a lattice and write frames")
    p.add_argument("--rows", type=int, default=50)
    p.add_argument("--cols", type=int, default=50)
    p.add_argument("--boundary", choices=[b.value for b in Boundary], default="periodic")
    p.add_argument("--k", type=float, default=1.0, help="coupling strength K")
    p.add_argument("--freq", default="normal:1", help="normal:SEED | zero | defector:R,C,OMEGA")
    p.add_argument("--init", default="random:1", help="random:SEED | spiral")
    _integrator_flags(p, 0.0, 100.0)
    p.add_argument("--frames-every", type=int, default=0,
                   help="steps between frames (0: first and last frame only)")
    p.add_argument("--v-floor", type=float, default=1e-4, help="log-colour floor")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep-rate", help="rotation rate versus defector frequency")
    p.add_argument("--rows", type=int, default=49)
    p.add_argument("--cols", type=int, default=49)
    p.add_argument("--omega-min", type=float, required=True)
    p.add_argument("--omega-max", type=float, required=True)
    p.add_argument("--omega-step", type=float, required=True)
    p.add_argument("--minimal", action="store_true", help="sweep the five-oscillator model")
    _integrator_flags(p, 4000.0, 8000.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep_rate)

    p = sub.add_parser("branch", help="minimal-model equilibrium branch")
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_branch)

    p = sub.add_parser("lindstedt", help="series versus simulation")
    p.add_argument("--epsilons", required=True, help="comma-separated, each in (0, 0.5]")
    p.add_argument("--target", choices=("minimal", "grid"), default="minimal")
    p.add_argument("--rows", type=int, default=49, help="odd grid size for --target grid")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lindstedt)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.backend != "auto":
            kernels.use_backend(args.backend)
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except Exception as exc:  # runtime failure: report, exit 1
        print(f"freqspiral {args.subcommand}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
