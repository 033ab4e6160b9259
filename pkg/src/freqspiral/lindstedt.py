"""Lindstedt series for the minimal model far above threshold, and
series-versus-simulation comparisons for the minimal model and the full grid.

With ``eps = 1/omega`` the periodic orbit is written in the rescaled time
``tau = Omega * omega * t`` (physical rotation rate ``omega * Omega``)::

    Omega(eps)   = 1 - 2 eps^2 + eps^4 (2 kappa^2 - 7/2) + O(eps^5)
    zeta(tau)    = tau + eps^4 sin(4 tau) / 8 + O(eps^5)
    theta_0(tau) = eps (1 / (2 kappa) - cos tau) + O(eps^2)

and ``theta_i(tau) = theta_0(tau - i pi/2)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .integrator import IntegratorConfig, ProbeKind, ProbeSpec, evolve
from .lattice import GridSpec
from .minimal import KAPPA, minimal_rhs, run_minimal
from .observables import canonical_spiral, far_corner, measure_rotation_rate

EPS_MAX = 0.5
OMEGA4_COEFF = 2 * KAPPA ** 2 - 3.5


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps <= EPS_MAX:
        raise ValueError(f"epsilon = {eps} outside the series regime [0, {EPS_MAX}]")
    return eps


def omega_series(eps: float) -> float:
    """Scaled rotation frequency Omega(eps)."""
    eps = _check_eps(eps)
    return 1.0 - 2.0 * eps ** 2 + OMEGA4_COEFF * eps ** 4


def zeta_series(tau, eps: float):
    eps = _check_eps(eps)
    return tau + eps ** 4 * np.sin(4 * np.asarray(tau)) / 8.0


def theta_series(i: int, tau, eps: float):
    """Neighbour ``i`` deviation; neighbour ``i`` lags neighbour 0 by ``i`` quarter turns
    (``theta_3`` is written ``theta_0(tau + pi/2)``, the same thing mod 2pi)."""
    if i not in (0, 1, 2, 3):
        raise ValueError(f"neighbour index must be 0..3, got {i}")
    eps = _check_eps(eps)
    shift = (0.0, -math.pi / 2, -math.pi, math.pi / 2)[i]
    return eps * (1.0 / (2.0 * KAPPA) - np.cos(np.asarray(tau) + shift))


def series_residuals(eps: float, n_tau: int = 1024) -> tuple[float, float]:
    """Max residual of the truncated series in the rescaled equations
    ``dX/dtau = (eps / Omega) f(X)``: (worst neighbour equation, zeta equation)."""
    eps = _check_eps(eps)
    if eps == 0:
        return 0.0, 0.0
    om = omega_series(eps)
    tau = 2 * math.pi * np.arange(n_tau) / n_tau
    worst_theta = worst_zeta = 0.0
    for t in tau:
        state = np.array([theta_series(i, t, eps) for i in range(4)] + [zeta_series(t, eps)])
        f = minimal_rhs(state, 1.0 / eps) * (eps / om)
        dtheta = eps * np.sin(np.array([t, t - math.pi / 2, t - math.pi, t + math.pi / 2]))
        dzeta = 1.0 + eps ** 4 * math.cos(4 * t) / 2.0
        worst_theta = max(worst_theta, float(np.max(np.abs(dtheta - f[:4]))))
        worst_zeta = max(worst_zeta, abs(dzeta - f[4]))
    return worst_theta, worst_zeta


@dataclass(frozen=True)
class ComparisonRow:
    epsilon: float
    omega_sim: float
    omega_series: float
    theta0_amp_sim: float
    theta0_amp_series: float
    zeta_dev_sim: float
    zeta_dev_series: float

    def as_dict(self) -> dict:
        return asdict(self)


FIELDS = tuple(ComparisonRow.__dataclass_fields__)


def half_peak_to_peak(values) -> float:
    v = np.asarray(values)
    return float((v.max() - v.min()) / 2.0)


def detrended_amplitude(times, values) -> float:
    """Half peak-to-peak of ``values`` after removing a least-squares line."""
    t = np.asarray(times) - times[0]
    v = np.asarray(values)
    slope, intercept = np.polyfit(t, v, 1)
    return half_peak_to_peak(v - (slope * t + intercept))


@dataclass(frozen=True)
class Protocol:
    """Step size and window lengths, in units of eps and rotation periods 2pi*eps."""
    steps_per_eps: int = 50
    transient_periods: float = 500.0
    measure_periods: float = 100.0

    def config(self, eps: float) -> IntegratorConfig:
        period = 2 * math.pi * eps
        return IntegratorConfig(dt=eps / self.steps_per_eps,
                                t_transient=self.transient_periods * period,
                                t_measure=self.measure_periods * period)


def _row(eps, rate, theta0_amp, zeta_dev) -> ComparisonRow:
    return ComparisonRow(eps, rate * eps, omega_series(eps), theta0_amp, eps, zeta_dev, eps ** 4 / 8.0)


def compare_minimal(epsilons, protocol: Protocol = Protocol()) -> list:
    rows = []
    for eps in epsilons:
        eps = _check_eps(eps)
        if eps == 0:
            raise ValueError("epsilon must be > 0 for a simulation")
        traj = run_minimal(1.0 / eps, protocol.config(eps))
        zeta = traj.states[:, 4]
        rate = (zeta[-1] - zeta[0]) / (traj.times[-1] - traj.times[0])
        rows.append(_row(eps, rate, half_peak_to_peak(traj.states[:, 0]),
                         detrended_amplitude(traj.times, zeta)))
    return rows


def compare_grid(epsilons, grid: GridSpec = GridSpec(49, 49), protocol: Protocol = Protocol(),
                 neighbour=(-1, 0)) -> list:
    """Canonical spiral on ``grid``: the defector plays ``zeta`` and its
    neighbour at offset ``neighbour`` (north by default) plays ``theta_0``."""
    if grid.periodic or grid.rows != grid.cols or grid.rows % 2 == 0:
        raise ValueError("compare_grid needs an odd square grid with free boundaries")
    rows = []
    for eps in epsilons:
        eps = _check_eps(eps)
        if eps == 0:
            raise ValueError("epsilon must be > 0 for a simulation")
        theta, freq, cell = canonical_spiral(grid, 1.0 / eps)
        nb = grid.check_cell((cell[0] + neighbour[0], cell[1] + neighbour[1]))
        ref = far_corner(grid, cell)
        probes = [ProbeSpec(ProbeKind.CELL_PHASE, 1, c) for c in (cell, ref, nb)]
        _, (rec_d, rec_r, rec_n) = evolve(theta, freq, 1.0, protocol.config(eps), probes)
        rate = measure_rotation_rate(rec_d, rec_r).rate
        times = np.asarray(rec_d.times)
        ref_phase = rec_r.values()
        rows.append(_row(eps, rate,
                         detrended_amplitude(times, rec_n.values() - ref_phase),
                         detrended_amplitude(times, rec_d.values() - ref_phase)))
    return rows
