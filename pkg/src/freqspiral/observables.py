"""Average frequencies, frequency-locked clusters and frequency-spiral diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse, stats
from scipy.sparse.csgraph import connected_components

from .integrator import IntegratorConfig, ProbeKind, ProbeSpec, TrajectoryRecord, evolve
from .lattice import (GridSpec, PhaseField, RateField, Boundary, TWO_PI, build_defector_frequencies,
                      default_defector_cell, init_phase_spiral, scan_vortices)


@dataclass(frozen=True)
class AverageFrequencyField:
    spec: GridSpec
    omega_avg: np.ndarray
    t0: float
    horizon: float

    @property
    def error_bound(self) -> float:
        """Resolution of a finite-horizon average: one unresolved 2pi slip."""
        return TWO_PI / self.horizon


def average_frequencies(theta_start: PhaseField, theta_end: PhaseField,
                        horizon: float | None = None) -> AverageFrequencyField:
    """Finite-horizon average frequency ``(theta_end - theta_start) / horizon``.

    Both fields must come from the same unwrapped trajectory. ``horizon``
    defaults to the difference of the fields' time stamps.
    """
    if theta_start.spec != theta_end.spec:
        raise ValueError("phase fields live on different grids")
    if horizon is None:
        horizon = theta_end.time - theta_start.time
    if not horizon > 0:
        raise ValueError(f"averaging horizon must be > 0, got {horizon}")
    avg = (theta_end.theta - theta_start.theta) / horizon
    return AverageFrequencyField(theta_start.spec, avg, theta_start.time, float(horizon))


@dataclass(frozen=True)
class ClusterLabeling:
    label: np.ndarray
    cluster_means: list
    tolerance: float

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_means)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.label.ravel(), minlength=self.n_clusters)


def _lattice_edges(spec: GridSpec):
    idx = np.arange(spec.size).reshape(spec.shape)
    if spec.periodic:
        right, down = np.roll(idx, -1, axis=1), np.roll(idx, -1, axis=0)
        a = np.concatenate([idx.ravel(), idx.ravel()])
        b = np.concatenate([right.ravel(), down.ravel()])
    else:
        a = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
        b = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    return a, b


def label_clusters(avg: AverageFrequencyField, tolerance: float = 1e-4) -> ClusterLabeling:
    """Join 4-neighbours whose average frequencies differ by at most ``tolerance``.

    Labels are numbered 0, 1, ... in row-major order of each cluster's first cell.
    """
    if not tolerance > 0:
        raise ValueError(f"tolerance must be > 0, got {tolerance}")
    spec = avg.spec
    flat = avg.omega_avg.ravel()
    a, b = _lattice_edges(spec)
    keep = np.abs(flat[a] - flat[b]) <= tolerance
    graph = sparse.coo_matrix((np.ones(int(keep.sum())), (a[keep], b[keep])),
                              shape=(spec.size, spec.size))
    _, raw = connected_components(graph, directed=False)
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    order = np.argsort(first)
    relabel = np.empty_like(order)
    relabel[order] = np.arange(order.size)
    labels = relabel[inverse].reshape(spec.shape)
    means = [float(flat[labels.ravel() == i].mean()) for i in range(order.size)]
    return ClusterLabeling(labels, means, float(tolerance))


@dataclass(frozen=True)
class RotationMeasurement:
    rate: float
    windings: int
    horizon: float

    @property
    def rotating(self) -> bool:
        return self.windings != 0


def measure_rotation_rate(defector_record: TrajectoryRecord,
                          reference_record: TrajectoryRecord) -> RotationMeasurement:
    """Net phase advance of the defector relative to a reference cell per unit time."""
    t_d, t_r = defector_record.times, reference_record.times
    if len(t_d) != len(t_r) or not np.array_equal(t_d, t_r):
        raise ValueError("records must share sampling times")
    for rec in (defector_record, reference_record):
        if rec.probe.kind is not ProbeKind.CELL_PHASE:
            raise ValueError("rotation rate needs cell_phase records")
    if len(t_d) < 2 or t_d[-1] == t_d[0]:
        raise ValueError("rotation rate needs a positive measurement horizon")
    d, r = defector_record.values(), reference_record.values()
    delta = float((d[-1] - r[-1]) - (d[0] - r[0]))
    horizon = float(t_d[-1] - t_d[0])
    return RotationMeasurement(delta / horizon, int(round(delta / TWO_PI)), horizon)


@dataclass(frozen=True)
class DecayFit:
    distances: np.ndarray
    log_amplitudes: np.ndarray
    slope: float
    intercept: float
    r_value: float


def fit_arm_decay(rate_snapshots, core, direction, d_min: int, d_max: int,
                  frame: float | None = None) -> DecayFit:
    """Least-squares line through ``(d, ln amplitude(d))`` along a ray from ``core``.

    amplitude(d) is the maximum over snapshots of ``|thetadot - frame|`` at
    ``core + d * direction``. ``frame`` defaults to the time-mean rate of the
    grid corner farthest from ``core``, the same reference the rotation rate
    uses, so the slow collective drift does not put a floor under the arms.
    """
    snaps = list(rate_snapshots)
    if not snaps:
        raise ValueError("need at least one rate snapshot")
    spec = snaps[0].spec
    dr, dc = direction
    if abs(dr) + abs(dc) != 1:
        raise ValueError(f"direction must be a unit lattice vector, got {direction}")
    if d_min < 1 or d_max < d_min:
        raise ValueError("need 1 <= d_min <= d_max")
    r0, c0 = core
    cells = [(r0 + d * dr, c0 + d * dc) for d in range(d_min, d_max + 1)]
    for cell in cells:
        spec.check_cell(cell)
    stack = np.stack([s.thetadot for s in snaps])
    if frame is None:
        frame = float(stack[(slice(None),) + far_corner(spec, core)].mean())
    rows = np.array([c[0] for c in cells])
    cols = np.array([c[1] for c in cells])
    amp = np.max(np.abs(stack[:, rows, cols] - frame), axis=0)
    if np.any(amp <= 0):
        raise ValueError("zero arm amplitude in the fit range; logarithm undefined")
    d = np.arange(d_min, d_max + 1, dtype=np.float64)
    logs = np.log(amp)
    fit = stats.linregress(d, logs)
    return DecayFit(d, logs, float(fit.slope), float(fit.intercept), float(fit.rvalue))


def track_vortices(theta_snapshots) -> list:
    """``(time, vortices)`` for each snapshot, in order."""
    track = []
    last = -math.inf
    for snap in theta_snapshots:
        if snap.time <= last:
            raise ValueError("snapshots must be strictly time-ordered")
        last = snap.time
        track.append((snap.time, scan_vortices(snap)))
    return track


# -- canonical frequency spiral ----------------------------------------------------

def canonical_spiral(spec: GridSpec, omega: float, cell=None):
    """Phase spiral plus a single defector at a central-plaquette corner.

    Returns ``(phases, frequencies, defector_cell)``.
    """
    if spec.boundary is not Boundary.FREE:
        raise ValueError("the canonical spiral uses free boundaries")
    cell = default_defector_cell(spec) if cell is None else spec.check_cell(cell)
    return init_phase_spiral(spec), build_defector_frequencies(spec, cell, omega), cell


def far_corner(spec: GridSpec, cell) -> tuple[int, int]:
    """The grid corner farthest from ``cell`` (Manhattan distance)."""
    r, c = cell
    return (0 if r >= spec.rows - 1 - r else spec.rows - 1,
            0 if c >= spec.cols - 1 - c else spec.cols - 1)


def spiral_rotation_rate(spec: GridSpec, omega: float, config: IntegratorConfig,
                         k: float = 1.0, sample_every: int = 8) -> RotationMeasurement:
    """Rotation rate of the canonical spiral relative to the far-corner cell."""
    theta, freq, cell = canonical_spiral(spec, omega)
    ref = far_corner(spec, cell)
    probes = [ProbeSpec(ProbeKind.CELL_PHASE, sample_every, cell),
              ProbeSpec(ProbeKind.CELL_PHASE, sample_every, ref)]
    _, (rec_d, rec_r) = evolve(theta, freq, k, config, probes)
    return measure_rotation_rate(rec_d, rec_r)


def bisect_threshold(rotates, lo: float, hi: float, iterations: int):
    """Shrink ``[lo, hi]`` around the onset of rotation.

    ``rotates(omega) -> bool`` must be False at ``lo`` and True at ``hi``;
    returns the final bracket and the list of ``(omega, rotates)`` probes.
    """
    history = [(lo, rotates(lo)), (hi, rotates(hi))]
    if history[0][1] or not history[1][1]:
        raise ValueError(f"[{lo}, {hi}] does not bracket the onset of rotation: {history}")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        moving = rotates(mid)
        history.append((mid, moving))
        if moving:
            hi = mid
        else:
            lo = mid
    return (lo, hi), history
