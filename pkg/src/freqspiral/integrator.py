"""Fixed-step classical RK4 evolution of the lattice with recording probes."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Any

import numpy as np

from . import kernels
from .lattice import FrequencyField, GridSpec, PhaseField, RateField, _check_k, scan_vortices


class DivergenceError(RuntimeError):
    def __init__(self, step: int, time: float):
        super().__init__(f"integration diverged at step {step} (t = {time:g}): "
                         f"non-finite rate or |rate| > 1e6")
        self.step = step
        self.time = time


def steps_for(duration: float, dt: float) -> int:
    """Whole steps in ``duration``, rounded down (1e-9 slack for float noise)."""
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    return int(math.floor(duration / dt + 1e-9))


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size and the transient-then-measure protocol.

    Durations that are not multiples of ``dt`` are rounded down to whole steps.
    """
    dt: float = 0.125
    t_transient: float = 0.0
    t_measure: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.t_transient < 0 or self.t_measure < 0:
            raise ValueError("transient and measurement durations must be >= 0")

    @property
    def n_transient(self) -> int:
        return steps_for(self.t_transient, self.dt)

    @property
    def n_measure(self) -> int:
        return steps_for(self.t_measure, self.dt)


class ProbeKind(str, enum.Enum):
    CELL_PHASE = "cell_phase"
    PHASE_SNAPSHOT = "phase_snapshot"
    RATE_SNAPSHOT = "rate_snapshot"
    VORTEX_SCAN = "vortex_scan"


@dataclass(frozen=True)
class ProbeSpec:
    kind: ProbeKind
    every: int = 1
    cell: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ProbeKind(self.kind))
        if self.every < 1:
            raise ValueError(f"probe interval must be >= 1 step, got {self.every}")
        if self.kind is ProbeKind.CELL_PHASE and self.cell is None:
            raise ValueError("cell_phase probes need a cell")


@dataclass
class TrajectoryRecord:
    probe: ProbeSpec
    times: list[float] = field(default_factory=list)
    samples: list[Any] = field(default_factory=list)

    def values(self) -> np.ndarray:
        return np.asarray(self.samples)


def _run(theta: np.ndarray, freq: FrequencyField, k: float, dt: float, nsteps: int,
         start_step: int, t0: float) -> None:
    failed = kernels.lattice_steps(theta, freq.omega, k, dt, nsteps, freq.spec.periodic)
    if failed >= 0:
        step = start_step + failed
        raise DivergenceError(step, t0 + step * dt)


def rk4_step(theta: PhaseField, freq: FrequencyField, k: float, dt: float) -> PhaseField:
    """One classical RK4 step; time advances by ``dt``."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if theta.spec != freq.spec:
        raise ValueError("phase and frequency fields live on different grids")
    y = np.array(theta.theta, order="C")
    _run(y, freq, _check_k(k), dt, 1, 0, theta.time)
    return PhaseField(theta.spec, y, theta.time + dt)


def _sample(probe: ProbeSpec, spec: GridSpec, y: np.ndarray, freq: FrequencyField,
            k: float, t: float):
    if probe.kind is ProbeKind.CELL_PHASE:
        r, c = probe.cell
        return float(y[r, c])
    if probe.kind is ProbeKind.PHASE_SNAPSHOT:
        return PhaseField(spec, y, t)
    field_ = PhaseField(spec, y, t)
    if probe.kind is ProbeKind.RATE_SNAPSHOT:
        rates = kernels.lattice_rhs(y, freq.omega, k, spec.periodic)
        return RateField(spec, rates, t)
    return scan_vortices(field_)


def evolve(theta: PhaseField, freq: FrequencyField, k: float, config: IntegratorConfig,
           probes=()) -> tuple[PhaseField, list[TrajectoryRecord]]:
    """Integrate ``t_transient`` unrecorded, then ``t_measure`` with probes active.

    Probes sample at the start of the measurement window and every
    ``probe.every`` steps after it; with ``t_measure == 0`` nothing is recorded.
    """
    spec = theta.spec
    if spec != freq.spec:
        raise ValueError("phase and frequency fields live on different grids")
    k = _check_k(k)
    for p in probes:
        if p.cell is not None:
            spec.check_cell(p.cell)
    dt = config.dt
    t0 = theta.time
    y = np.array(theta.theta, order="C")

    n_tr, n_ms = config.n_transient, config.n_measure
    _run(y, freq, k, dt, n_tr, 0, t0)
    records = [TrajectoryRecord(p) for p in probes]

    def record(n):
        t = t0 + (n_tr + n) * dt
        for rec in records:
            if n % rec.probe.every == 0:
                rec.times.append(t)
                rec.samples.append(_sample(rec.probe, spec, y, freq, k, t))

    if n_ms > 0 and records:
        chunk = reduce(math.gcd, (p.every for p in probes))
        record(0)
        done = 0
        while done < n_ms:
            m = min(chunk, n_ms - done)
            _run(y, freq, k, dt, m, n_tr + done, t0)
            done += m
            if done % chunk == 0:
                record(done)
    else:
        _run(y, freq, k, dt, n_ms, n_tr, t0)
    return PhaseField(spec, y, t0 + (n_tr + n_ms) * dt), records
