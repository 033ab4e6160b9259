"""Five-oscillator minimal model of a frequency spiral.

A central oscillator ``zeta`` with natural frequency ``omega`` sits in a phase
vortex; its four neighbours carry deviations ``theta_i`` from their static
spiral offsets ``i * pi / 2`` and are tied to fixed outer oscillators, which
contributes the restoring term ``-kappa sin(theta_i)`` with
``kappa = 1 + sqrt(2)``::

    theta_i' = sin(zeta - theta_i - i pi/2) - kappa sin(theta_i),  i = 0..3
    zeta'    = omega - sum_i sin(zeta - theta_i - i pi/2)

State vectors are ordered ``(theta_0, theta_1, theta_2, theta_3, zeta)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import kernels
from .integrator import DivergenceError, IntegratorConfig
from .observables import RotationMeasurement

KAPPA = 1.0 + math.sqrt(2.0)
SQRT2 = math.sqrt(2.0)
OFFSETS = np.array([0.0, math.pi / 2, math.pi, 3 * math.pi / 2])
QUARTER_TURN = math.pi / 2


class Stability(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class MinimalState:
    theta: tuple
    zeta: float

    def __post_init__(self):
        theta = tuple(float(v) for v in self.theta)
        if len(theta) != 4:
            raise ValueError("the minimal model has four neighbour phases")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "zeta", float(self.zeta))

    def as_array(self) -> np.ndarray:
        return np.array([*self.theta, self.zeta])

    @classmethod
    def from_array(cls, y) -> MinimalState:
        return cls(tuple(y[:4]), y[4])

    def rotated(self) -> MinimalState:
        """Image under the symmetry zeta -> zeta + pi/2, theta_i -> theta_{i+1}.

        The neighbour that now faces ``zeta`` the way neighbour ``i`` did is
        neighbour ``i + 1``, so the new ``theta_{i+1}`` is the old ``theta_i``.
        """
        t = self.theta
        return MinimalState((t[3], t[0], t[1], t[2]), self.zeta + QUARTER_TURN)


def _as_vector(state) -> np.ndarray:
    if isinstance(state, MinimalState):
        return state.as_array()
    y = np.asarray(state, dtype=np.float64)
    if y.shape != (5,):
        raise ValueError(f"minimal-model state must have 5 entries, got shape {y.shape}")
    return y


def minimal_rhs(state, omega: float) -> np.ndarray:
    y = _as_vector(state)
    d = np.sin(y[4] - y[:4] - OFFSETS)
    out = np.empty(5)
    out[:4] = d - KAPPA * np.sin(y[:4])
    out[4] = omega - d[0] - d[1] - d[2] - d[3]
    return out


def equilibrium_at_zero() -> MinimalState:
    """The stable omega = 0 equilibrium, in closed form."""
    t0 = math.atan(1.0 / (1.0 + SQRT2 * KAPPA))
    t2 = math.atan(1.0 / (1.0 - SQRT2 * KAPPA))
    return MinimalState((t0, -t0, t2, -t2), math.pi / 4)


def omega_of_zeta(zeta):
    """Natural frequency at which ``zeta`` is an equilibrium (principal branch)."""
    z = np.asarray(zeta, dtype=np.float64)
    s, c = np.sin(z), np.cos(z)
    val = (s / np.sqrt(SQRT2 + c) - c / np.sqrt(SQRT2 + s)
           - s / np.sqrt(SQRT2 - c) + c / np.sqrt(SQRT2 - s))
    out = math.sqrt(KAPPA / 2.0) * val
    return float(out) if np.ndim(out) == 0 else out


def domega_dzeta(zeta):
    """Analytic derivative of :func:`omega_of_zeta`."""
    z = np.asarray(zeta, dtype=np.float64)
    s, c = np.sin(z), np.cos(z)

    def term(num, dnum, base, dbase):
        # d/dz [num / sqrt(base)]
        return dnum / np.sqrt(base) - 0.5 * num * dbase / base ** 1.5

    val = (term(s, c, SQRT2 + c, -s) - term(c, -s, SQRT2 + s, c)
           - term(s, c, SQRT2 - c, s) + term(c, -s, SQRT2 - s, -c))
    out = math.sqrt(KAPPA / 2.0) * val
    return float(out) if np.ndim(out) == 0 else out


def jacobian(state, omega: float = 0.0) -> np.ndarray:
    """Analytic Jacobian of :func:`minimal_rhs`; independent of ``omega``."""
    y = _as_vector(state)
    c = np.cos(y[4] - y[:4] - OFFSETS)
    jac = np.zeros((5, 5))
    for i in range(4):
        jac[i, i] = -c[i] - KAPPA * math.cos(y[i])
        jac[i, 4] = c[i]
        jac[4, i] = c[i]
    jac[4, 4] = -(c[0] + c[1] + c[2] + c[3])
    return jac


STABILITY_MARGIN = 1e-6
EQUILIBRIUM_TOL = 1e-8


def classify_stability(state, omega: float | None = None) -> Stability:
    """Linear stability of an equilibrium from the Jacobian's eigenvalues.

    ``omega`` defaults to the value that makes ``zeta' = 0``; the neighbour
    equations must then hold to within 1e-8.
    """
    y = _as_vector(state)
    if omega is None:
        omega = float(np.sum(np.sin(y[4] - y[:4] - OFFSETS)))
    residual = np.max(np.abs(minimal_rhs(y, omega)))
    if residual > EQUILIBRIUM_TOL:
        raise ValueError(f"state is not an equilibrium (|rhs| = {residual:.3g})")
    re = np.linalg.eigvals(jacobian(y)).real
    if np.all(re < -STABILITY_MARGIN):
        return Stability.STABLE
    if np.any(re > STABILITY_MARGIN):
        return Stability.UNSTABLE
    return Stability.MARGINAL


def solve_neighbour(zeta: float, i: int) -> float:
    """Equilibrium deviation of neighbour ``i`` for a given ``zeta``.

    Root of ``sin(zeta - theta - i pi/2) = kappa sin(theta)`` bracketed in
    [-pi/2, pi/2], the branch holding the omega = 0 stable equilibrium
    (kappa > 1 makes the bracket sign-changing for every zeta).
    """
    phi = zeta - OFFSETS[i]

    def f(th):
        return math.sin(phi - th) - KAPPA * math.sin(th)

    lo, hi = -math.pi / 2, math.pi / 2
    try:
        return optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (ValueError, RuntimeError) as exc:
        raise RuntimeError(f"neighbour equilibrium solve failed at zeta = {zeta!r}: {exc}") from exc


def equilibrium_on_branch(zeta: float) -> MinimalState:
    return MinimalState(tuple(solve_neighbour(zeta, i) for i in range(4)), zeta)


@dataclass(frozen=True)
class BranchSample:
    zeta: float
    omega: float
    stability: Stability
    state: MinimalState


@dataclass(frozen=True)
class EquilibriumBranch:
    samples: list
    saddle_nodes: list  # (zeta, omega), sorted by zeta

    def stability_changes(self) -> list:
        """Indices ``j`` where sample ``j`` and ``j+1`` (cyclically) differ in stability."""
        n = len(self.samples)
        return [j for j in range(n)
                if self.samples[j].stability != self.samples[(j + 1) % n].stability]


def _refine_extremum(z_lo: float, z_mid: float, z_hi: float, maximize: bool) -> float:
    sign = -1.0 if maximize else 1.0
    return float(optimize.golden(lambda z: sign * omega_of_zeta(z),
                                 brack=(z_lo, z_mid, z_hi), tol=1e-10))


def _fold_points(zetas: np.ndarray, omegas: np.ndarray) -> list:
    n = zetas.size
    step = 2 * math.pi / n
    folds = []
    for j in range(n):
        prev, nxt = omegas[j - 1], omegas[(j + 1) % n]
        is_max = omegas[j] > prev and omegas[j] >= nxt
        is_min = omegas[j] < prev and omegas[j] <= nxt
        if is_max or is_min:
            z = _refine_extremum(zetas[j] - step, zetas[j], zetas[j] + step, is_max)
            z = z % (2 * math.pi)
            folds.append((z, omega_of_zeta(z)))
    return sorted(folds)


def trace_branch(n_samples: int = 512) -> EquilibriumBranch:
    """Sample the equilibrium branch on a uniform zeta grid over [0, 2pi)."""
    if n_samples < 16:
        raise ValueError("need at least 16 samples")
    zetas = 2 * math.pi * np.arange(n_samples) / n_samples
    samples = []
    for z in zetas:
        st = equilibrium_on_branch(float(z))
        w = omega_of_zeta(float(z))
        samples.append(BranchSample(float(z), w, classify_stability(st, w), st))
    omegas = np.array([s.omega for s in samples])
    return EquilibriumBranch(samples, _fold_points(zetas, omegas))


@dataclass(frozen=True)
class BifurcationResult:
    omega_c: float
    zeta_c_list: list


def find_saddle_node(grid: int = 1024) -> BifurcationResult:
    """Largest omega on the equilibrium branch and the four zeta where it occurs."""
    zetas = 2 * math.pi * np.arange(grid) / grid
    folds = _fold_points(zetas, omega_of_zeta(zetas))
    upper = [f for f in folds if f[1] > 0]
    omega_c = max(w for _, w in upper)
    return BifurcationResult(omega_c, sorted(z for z, _ in upper))


# -- time integration ---------------------------------------------------------------

@dataclass
class MinimalTrajectory:
    times: np.ndarray
    states: np.ndarray  # (n_samples, 5)


def integrate_minimal(state, omega: float, dt: float, nsteps: int, every: int = 1,
                      t0: float = 0.0) -> MinimalTrajectory:
    """RK4 trajectory sampled at step 0 and every ``every`` steps."""
    y = np.array(_as_vector(state), dtype=np.float64)
    times, states = [t0], [y.copy()]
    done = 0
    while done < nsteps:
        m = min(every, nsteps - done)
        failed = kernels.minimal_steps(y, omega, KAPPA, dt, m)
        if failed >= 0:
            raise DivergenceError(done + failed, t0 + (done + failed) * dt)
        done += m
        if done % every == 0:
            times.append(t0 + done * dt)
            states.append(y.copy())
    return MinimalTrajectory(np.array(times), np.array(states))


def _advance(y: np.ndarray, omega: float, dt: float, nsteps: int) -> None:
    failed = kernels.minimal_steps(y, omega, KAPPA, dt, nsteps)
    if failed >= 0:
        raise DivergenceError(failed, failed * dt)


def run_minimal(omega: float, config: IntegratorConfig, every: int = 1,
                initial=None, kick: float = 1e-3) -> MinimalTrajectory:
    """Transient then recorded window, starting from the omega = 0 equilibrium
    with ``zeta`` displaced by ``kick``."""
    if initial is None:
        y = equilibrium_at_zero().as_array()
        y[4] += kick
    else:
        y = np.array(_as_vector(initial), dtype=np.float64)
    _advance(y, omega, config.dt, config.n_transient)
    t_start = config.n_transient * config.dt
    return integrate_minimal(y, omega, config.dt, config.n_measure, every, t_start)


def simulate_minimal(omega: float, config: IntegratorConfig) -> RotationMeasurement:
    """Mean rotation rate of ``zeta`` over the measurement window."""
    if config.n_measure < 1:
        raise ValueError("simulate_minimal needs a positive measurement window")
    traj = run_minimal(omega, config, every=config.n_measure)
    delta = float(traj.states[-1, 4] - traj.states[0, 4])
    horizon = float(traj.times[-1] - traj.times[0])
    return RotationMeasurement(delta / horizon, int(round(delta / (2 * math.pi))), horizon)
