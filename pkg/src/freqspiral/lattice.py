"""Lattice state, field constructors, the Kuramoto right-hand side and
topological measurements (plaquette curl, vortices, boundary winding).

Conventions
-----------
Cells are indexed ``(row, col)`` with row 0 at the top. Geometric quantities
use Cartesian coordinates ``(x, y) = (col, row)``; "counterclockwise" is the
positive orientation in those coordinates, i.e. a plaquette with top-left
corner ``(r, c)`` is traversed ``(r, c) -> (r, c+1) -> (r+1, c+1) -> (r+1, c)``.
Phases are stored unwrapped; wrapping only happens inside curl/winding and
image output.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .rng import Stream

TWO_PI = 2.0 * math.pi
CURL_SNAP_TOL = 1e-6 * TWO_PI


class LatticeError(ValueError):
    pass


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    FREE = "free"


def _frozen(a, shape=None) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True, order="C")
    if shape is not None and arr.shape != shape:
        raise LatticeError(f"array shape {arr.shape} does not match grid {shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    boundary: Boundary = Boundary.FREE

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if self.rows < 1 or self.cols < 1 or self.rows * self.cols < 2:
            raise LatticeError(f"grid {self.rows}x{self.cols} needs at least two cells")
        if self.periodic and (self.rows < 3 or self.cols < 3):
            raise LatticeError("periodic grids need rows >= 3 and cols >= 3")

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def contains(self, cell) -> bool:
        r, c = cell
        return 0 <= r < self.rows and 0 <= c < self.cols

    def check_cell(self, cell) -> tuple[int, int]:
        if not self.contains(cell):
            raise LatticeError(f"cell {tuple(cell)} outside {self.rows}x{self.cols} grid")
        return int(cell[0]), int(cell[1])


@dataclass(frozen=True)
class FrequencyField:
    spec: GridSpec
    omega: np.ndarray
    provenance: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "omega", _frozen(self.omega, self.spec.shape))


@dataclass(frozen=True)
class PhaseField:
    spec: GridSpec
    theta: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        theta = _frozen(self.theta, self.spec.shape)
        if not np.all(np.isfinite(theta)):
            raise LatticeError("phase field has non-finite entries")
        object.__setattr__(self, "theta", theta)

    def shifted(self, delta) -> PhaseField:
        return PhaseField(self.spec, self.theta + delta, self.time)


@dataclass(frozen=True)
class RateField:
    spec: GridSpec
    thetadot: np.ndarray
    time: float = field(default=0.0)

    def __post_init__(self):
        rates = _frozen(self.thetadot, self.spec.shape)
        if not np.all(np.isfinite(rates)):
            raise LatticeError("rate field has non-finite entries")
        object.__setattr__(self, "thetadot", rates)


class Vortex(NamedTuple):
    row: int
    col: int
    charge: int


# -- neighbourhoods -----------------------------------------------------------

_DIRECTIONS = ((-1, 0), (0, 1), (1, 0), (0, -1))  # N, E, S, W


def neighbors(spec: GridSpec, cell) -> list[tuple[int, int]]:
    """Existing neighbours of ``cell`` in the fixed order North, East, South, West."""
    r, c = spec.check_cell(cell)
    out = []
    for dr, dc in _DIRECTIONS:
        rn, cn = r + dr, c + dc
        if spec.periodic:
            out.append((rn % spec.rows, cn % spec.cols))
        elif 0 <= rn < spec.rows and 0 <= cn < spec.cols:
            out.append((rn, cn))
    return out


def graph_laplacian(spec: GridSpec) -> np.ndarray:
    """Dense graph Laplacian (degree minus adjacency), cells in row-major order."""
    n = spec.size
    lap = np.zeros((n, n))
    for r in range(spec.rows):
        for c in range(spec.cols):
            i = r * spec.cols + c
            for rn, cn in neighbors(spec, (r, c)):
                lap[i, rn * spec.cols + cn] -= 1.0
                lap[i, i] += 1.0
    return lap


# -- dynamics ----------------------------------------------------------------

def _check_k(k: float) -> float:
    k = float(k)
    if not k >= 0.0:
        raise LatticeError(f"coupling strength must be >= 0, got {k}")
    return k


def rhs(theta: PhaseField, freq: FrequencyField, k: float) -> RateField:
    """Kuramoto lattice rates ``omega_i + K * sum_j sin(theta_j - theta_i)``."""
    if theta.spec != freq.spec:
        raise LatticeError("phase and frequency fields live on different grids")
    rates = kernels.lattice_rhs(theta.theta, freq.omega, _check_k(k), theta.spec.periodic)
    return RateField(theta.spec, rates, theta.time)


# -- constructors --------------------------------------------------------------

def init_random_phases(spec: GridSpec, seed: int) -> PhaseField:
    """I.i.d. uniform phases on [0, 2pi) from the pinned PCG64 stream."""
    theta = Stream(seed).uniform(spec.size).reshape(spec.shape) * TWO_PI
    theta[theta >= TWO_PI] = 0.0
    return PhaseField(spec, theta)


def central_plaquette(spec: GridSpec) -> tuple[int, int]:
    """Top-left corner of the plaquette nearest the grid centre."""
    return (max(spec.rows - 2, 0) // 2, max(spec.cols - 2, 0) // 2)


def default_defector_cell(spec: GridSpec) -> tuple[int, int]:
    """Bottom-right corner of the central plaquette; ``(M-1)/2`` on odd grids."""
    r, c = central_plaquette(spec)
    return (min(r + 1, spec.rows - 1), min(c + 1, spec.cols - 1))


def init_phase_spiral(spec: GridSpec, center=None, mirror: bool = False) -> PhaseField:
    """Static phase spiral: theta = angle of (x - cx, y - cy), in [0, 2pi).

    ``center`` is ``(cx, cy)`` in (col, row) units; by default the centre of
    :func:`central_plaquette`. ``mirror`` reflects x -> -x (winding -1).
    """
    if spec.periodic:
        raise LatticeError("a phase spiral has boundary winding 1 and needs free boundaries")
    if center is None:
        pr, pc = central_plaquette(spec)
        center = (pc + 0.5, pr + 0.5)
    cx, cy = center
    y, x = np.mgrid[0:spec.rows, 0:spec.cols].astype(np.float64)
    dx = x - cx
    if mirror:
        dx = -dx
    theta = np.mod(np.arctan2(y - cy, dx), TWO_PI)
    return PhaseField(spec, theta)


def zero_frequencies(spec: GridSpec) -> FrequencyField:
    return FrequencyField(spec, np.zeros(spec.shape), "zero")


def build_defector_frequencies(spec: GridSpec, cell, omega: float) -> FrequencyField:
    """All natural frequencies zero except ``omega`` at ``cell``."""
    r, c = spec.check_cell(cell)
    if omega == 0.0:
        return zero_frequencies(spec)
    field = np.zeros(spec.shape)
    field[r, c] = omega
    return FrequencyField(spec, field, f"defector:{r},{c},{omega!r}")


def build_normal_frequencies(spec: GridSpec, seed: int, mean: float = 0.0,
                             sd: float = 1.0) -> FrequencyField:
    """I.i.d. normal natural frequencies (polar method on the pinned stream)."""
    if sd < 0:
        raise LatticeError(f"standard deviation must be >= 0, got {sd}")
    z = Stream(seed).normal(spec.size).reshape(spec.shape)
    return FrequencyField(spec, mean + sd * z, f"normal:{seed},{mean!r},{sd!r}")


# -- topology ------------------------------------------------------------------

def wrap_phase(d):
    """Map phase differences into (-pi, pi]."""
    w = np.asarray(d, dtype=np.float64)
    w = w - TWO_PI * np.round(w / TWO_PI)
    w = np.where(w <= -math.pi, w + TWO_PI, w)
    w = np.where(w > math.pi, w - TWO_PI, w)
    return w


def _snap(curl: np.ndarray) -> np.ndarray:
    snapped = np.where(np.abs(curl) < CURL_SNAP_TOL, 0.0, np.sign(curl) * TWO_PI)
    bad = np.abs(curl - snapped) >= CURL_SNAP_TOL
    if np.any(bad):
        raise LatticeError(f"lattice curl {curl[bad].flat[0]!r} is not a multiple of 2pi")
    return snapped


def _plaquette_corners(spec: GridSpec):
    """Row/col index arrays of the TL, TR, BR, BL corners of every plaquette."""
    if spec.rows < 2 or spec.cols < 2:
        raise LatticeError("plaquettes need at least a 2x2 grid")
    nr = spec.rows if spec.periodic else spec.rows - 1
    nc = spec.cols if spec.periodic else spec.cols - 1
    r = np.arange(nr)[:, None]
    c = np.arange(nc)[None, :]
    r1 = (r + 1) % spec.rows
    c1 = (c + 1) % spec.cols
    return (r, c), (r, c1), (r1, c1), (r1, c)


def plaquette_curls(theta: PhaseField) -> np.ndarray:
    """Snapped curl of every plaquette, indexed by its top-left corner."""
    th = theta.theta
    tl, tr, br, bl = (th[rc] for rc in _plaquette_corners(theta.spec))
    curl = wrap_phase(tr - tl) + wrap_phase(br - tr) + wrap_phase(bl - br) + wrap_phase(tl - bl)
    return _snap(curl)


def plaquette_curl(theta: PhaseField, plaquette) -> float:
    """Curl of one plaquette: exactly one of -2pi, 0, +2pi."""
    spec = theta.spec
    r, c = plaquette
    limit_r = spec.rows if spec.periodic else spec.rows - 1
    limit_c = spec.cols if spec.periodic else spec.cols - 1
    if not (0 <= r < limit_r and 0 <= c < limit_c):
        raise LatticeError(f"plaquette {tuple(plaquette)} invalid for {spec.rows}x{spec.cols} "
                           f"{spec.boundary.value} grid")
    th = theta.theta
    r1, c1 = (r + 1) % spec.rows, (c + 1) % spec.cols
    path = (th[r, c], th[r, c1], th[r1, c1], th[r1, c], th[r, c])
    total = 0.0
    for a, b in zip(path[:-1], path[1:]):
        total += float(wrap_phase(b - a))
    return float(_snap(np.array(total)))


def scan_vortices(theta: PhaseField) -> tuple[Vortex, ...]:
    """All plaquettes with nonzero curl, in row-major order."""
    curls = plaquette_curls(theta)
    rows, cols = np.nonzero(curls)
    return tuple(Vortex(int(r), int(c), int(round(curls[r, c] / TWO_PI)))
                 for r, c in zip(rows, cols))


def boundary_circuit(spec: GridSpec) -> list[tuple[int, int]]:
    """Counterclockwise closed circuit along the edge of a free grid."""
    R, C = spec.rows - 1, spec.cols - 1
    path = [(0, c) for c in range(C)]
    path += [(r, C) for r in range(R)]
    path += [(R, c) for c in range(C, 0, -1)]
    path += [(r, 0) for r in range(R, 0, -1)]
    return path + [path[0]]


def boundary_winding(theta: PhaseField) -> int:
    """Net number of 2pi turns of the phase around the free-grid boundary."""
    spec = theta.spec
    if spec.periodic:
        raise LatticeError("boundary winding is defined for free boundaries only")
    if spec.rows < 2 or spec.cols < 2:
        raise LatticeError("boundary winding needs at least a 2x2 grid")
    idx = np.array(boundary_circuit(spec))
    values = theta.theta[idx[:, 0], idx[:, 1]]
    total = float(np.sum(wrap_phase(np.diff(values))))
    turns = total / TWO_PI
    n = round(turns)
    if abs(turns - n) > 1e-6:
        raise LatticeError(f"boundary phase sum {total!r} is not a multiple of 2pi")
    return int(n)
