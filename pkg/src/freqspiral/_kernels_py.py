"""Pure-Python/numpy fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures, same arithmetic order; results agree with the compiled
backend to a few ulps (libm vs numpy ``sin``).
"""
import math

import numpy as np

DIVERGENCE_LIMIT = 1e6
_OFFSETS = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)


def lattice_rhs(theta, omega, k, periodic):
    if periodic:
        east = np.sin(np.roll(theta, -1, axis=1) - theta)
        south = np.sin(np.roll(theta, -1, axis=0) - theta)
        north = -np.roll(south, 1, axis=0)
        west = -np.roll(east, 1, axis=1)
    else:
        east = np.zeros_like(theta)
        south = np.zeros_like(theta)
        east[:, :-1] = np.sin(theta[:, 1:] - theta[:, :-1])
        south[:-1, :] = np.sin(theta[1:, :] - theta[:-1, :])
        north = np.zeros_like(theta)
        west = np.zeros_like(theta)
        north[1:, :] = -south[:-1, :]
        west[:, 1:] = -east[:, :-1]
    acc = north + east
    acc += south
    acc += west
    return omega + k * acc


def _bad(rates):
    return not np.all(np.isfinite(rates)) or np.max(np.abs(rates)) > DIVERGENCE_LIMIT


def lattice_steps(theta, omega, k, dt, nsteps, periodic):
    if not theta.flags.c_contiguous or theta.dtype != np.float64:
        raise ValueError("theta must be a C-contiguous float64 array")
    half = 0.5 * dt
    for n in range(nsteps):
        k1 = lattice_rhs(theta, omega, k, periodic)
        if _bad(k1):
            return n
        k2 = lattice_rhs(theta + half * k1, omega, k, periodic)
        k3 = lattice_rhs(theta + half * k2, omega, k, periodic)
        k4 = lattice_rhs(theta + dt * k3, omega, k, periodic)
        theta += dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    return -1


def _minimal_rhs(s, omega, kappa):
    sin = math.sin
    z = s[4]
    d0 = sin(z - s[0] - _OFFSETS[0])
    d1 = sin(z - s[1] - _OFFSETS[1])
    d2 = sin(z - s[2] - _OFFSETS[2])
    d3 = sin(z - s[3] - _OFFSETS[3])
    return [
        d0 - kappa * sin(s[0]),
        d1 - kappa * sin(s[1]),
        d2 - kappa * sin(s[2]),
        d3 - kappa * sin(s[3]),
        omega - d0 - d1 - d2 - d3,
    ]


def minimal_steps(state, omega, kappa, dt, nsteps):
    if not state.flags.c_contiguous or state.dtype != np.float64 or state.shape[0] != 5:
        raise ValueError("state must be a C-contiguous float64 array of length 5")
    y = [float(v) for v in state]
    half = 0.5 * dt
    rhs = _minimal_rhs
    for n in range(nsteps):
        k1 = rhs(y, omega, kappa)
        if any(not math.isfinite(v) or abs(v) > DIVERGENCE_LIMIT for v in k1):
            state[:] = y
            return n
        k2 = rhs([y[i] + half * k1[i] for i in range(5)], omega, kappa)
        k3 = rhs([y[i] + half * k2[i] for i in range(5)], omega, kappa)
        k4 = rhs([y[i] + dt * k3[i] for i in range(5)], omega, kappa)
        y = [y[i] + dt * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0 for i in range(5)]
    state[:] = y
    return -1
