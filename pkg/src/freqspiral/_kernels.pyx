# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 kernels for the lattice and the five-oscillator model.

Mirrors ``_kernels_py`` operation for operation. Each edge sine is computed
once (vectorized over the whole lattice when libmvec is available) and reused with a sign flip for the opposite cell; the per-cell neighbour
sum is accumulated in the fixed order N, E, S, W.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, fabs, isfinite

cnp.import_array()

cdef double DIVERGENCE_LIMIT = 1e6
cdef double HALF_PI = 1.5707963267948966
cdef double PI = 3.141592653589793
cdef double THREE_HALF_PI = 4.71238898038469


cdef extern from "_vsin.h":
    void fs_vsin(const double* x, double* y, Py_ssize_t n) nogil
    int fs_vsin_vectorized() nogil


def vectorized_sin():
    """True when edge sines run through the AVX2 libmvec path."""
    return bool(fs_vsin_vectorized())


cdef int _lattice_rhs(const double[:, ::1] th, const double[:, ::1] om, double k,
                      bint periodic, double[:, ::1] east, double[:, ::1] south,
                      double[:, ::1] out) noexcept nogil:
    """Fill ``out``; return 1 if any rate is non-finite or above the limit.

    ``east``/``south`` are scratch: phase differences along each cell's east
    and south edge (0 where the edge does not exist), then their sines.
    """
    cdef Py_ssize_t rows = th.shape[0], cols = th.shape[1]
    cdef Py_ssize_t r, c, rn, cn, rp, cp
    cdef double acc, v
    cdef int bad = 0

    for r in range(rows):
        for c in range(cols - 1):
            east[r, c] = th[r, c + 1] - th[r, c]
        east[r, cols - 1] = th[r, 0] - th[r, cols - 1] if periodic else 0.0
    for r in range(rows):
        rn = r + 1
        if rn == rows:
            if not periodic:
                for c in range(cols):
                    south[r, c] = 0.0
                continue
            rn = 0
        for c in range(cols):
            south[r, c] = th[rn, c] - th[r, c]
    fs_vsin(&east[0, 0], &east[0, 0], rows * cols)
    fs_vsin(&south[0, 0], &south[0, 0], rows * cols)

    for r in range(rows):
        rp = r - 1
        if rp < 0 and periodic:
            rp = rows - 1
        for c in range(cols):
            cp = c - 1
            if cp < 0 and periodic:
                cp = cols - 1
            acc = 0.0
            if rp >= 0:
                acc = acc + (-south[rp, c])
            if periodic or c + 1 < cols:
                acc = acc + east[r, c]
            if periodic or r + 1 < rows:
                acc = acc + south[r, c]
            if cp >= 0:
                acc = acc + (-east[r, cp])
            v = om[r, c] + k * acc
            out[r, c] = v
            if not isfinite(v) or fabs(v) > DIVERGENCE_LIMIT:
                bad = 1
    return bad


def lattice_rhs(cnp.ndarray theta, cnp.ndarray omega, double k, bint periodic):
    cdef const double[:, ::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef const double[:, ::1] om = np.ascontiguousarray(omega, dtype=np.float64)
    out = np.empty_like(np.asarray(th))
    east = np.empty_like(out)
    south = np.empty_like(out)
    _lattice_rhs(th, om, k, periodic, east, south, out)
    return out


def lattice_steps(cnp.ndarray theta, cnp.ndarray omega, double k, double dt,
                  long nsteps, bint periodic):
    """Advance ``theta`` in place by ``nsteps`` RK4 steps.

    Returns -1 on success, otherwise the 0-based index of the step whose
    stage-1 rates were non-finite or exceeded the divergence limit (the state
    is left at the start of that step).
    """
    if not theta.flags.c_contiguous or theta.dtype != np.float64:
        raise ValueError("theta must be a C-contiguous float64 array")
    cdef double[:, ::1] y = theta
    cdef const double[:, ::1] om = np.ascontiguousarray(omega, dtype=np.float64)
    shape = (y.shape[0], y.shape[1])
    cdef double[:, ::1] k1 = np.empty(shape)
    cdef double[:, ::1] k2 = np.empty(shape)
    cdef double[:, ::1] k3 = np.empty(shape)
    cdef double[:, ::1] k4 = np.empty(shape)
    cdef double[:, ::1] tmp = np.empty(shape)
    cdef double[:, ::1] east = np.empty(shape)
    cdef double[:, ::1] south = np.empty(shape)
    cdef Py_ssize_t rows = y.shape[0], cols = y.shape[1], r, c
    cdef long n
    cdef long failed = -1
    cdef double half = 0.5 * dt
    with nogil:
        for n in range(nsteps):
            if _lattice_rhs(y, om, k, periodic, east, south, k1):
                failed = n
                break
            for r in range(rows):
                for c in range(cols):
                    tmp[r, c] = y[r, c] + half * k1[r, c]
            _lattice_rhs(tmp, om, k, periodic, east, south, k2)
            for r in range(rows):
                for c in range(cols):
                    tmp[r, c] = y[r, c] + half * k2[r, c]
            _lattice_rhs(tmp, om, k, periodic, east, south, k3)
            for r in range(rows):
                for c in range(cols):
                    tmp[r, c] = y[r, c] + dt * k3[r, c]
            _lattice_rhs(tmp, om, k, periodic, east, south, k4)
            for r in range(rows):
                for c in range(cols):
                    y[r, c] = y[r, c] + dt * (k1[r, c] + 2.0 * k2[r, c]
                                              + 2.0 * k3[r, c] + k4[r, c]) / 6.0
    return failed


cdef inline void _minimal_rhs(const double* s, double omega, double kappa,
                              double* out) noexcept nogil:
    cdef double d0 = sin(s[4] - s[0])
    cdef double d1 = sin(s[4] - s[1] - HALF_PI)
    cdef double d2 = sin(s[4] - s[2] - PI)
    cdef double d3 = sin(s[4] - s[3] - THREE_HALF_PI)
    out[0] = d0 - kappa * sin(s[0])
    out[1] = d1 - kappa * sin(s[1])
    out[2] = d2 - kappa * sin(s[2])
    out[3] = d3 - kappa * sin(s[3])
    out[4] = omega - d0 - d1 - d2 - d3


def minimal_steps(cnp.ndarray state, double omega, double kappa, double dt, long nsteps):
    """Advance the 5-vector ``state`` in place; same return convention as lattice_steps."""
    if not state.flags.c_contiguous or state.dtype != np.float64 or state.shape[0] != 5:
        raise ValueError("state must be a C-contiguous float64 array of length 5")
    cdef double[::1] y = state
    cdef double k1[5]
    cdef double k2[5]
    cdef double k3[5]
    cdef double k4[5]
    cdef double tmp[5]
    cdef double half = 0.5 * dt
    cdef long n
    cdef long failed = -1
    cdef int i
    with nogil:
        for n in range(nsteps):
            _minimal_rhs(&y[0], omega, kappa, k1)
            for i in range(5):
                if not isfinite(k1[i]) or fabs(k1[i]) > DIVERGENCE_LIMIT:
                    failed = n
            if failed >= 0:
                break
            for i in range(5):
                tmp[i] = y[i] + half * k1[i]
            _minimal_rhs(tmp, omega, kappa, k2)
            for i in range(5):
                tmp[i] = y[i] + half * k2[i]
            _minimal_rhs(tmp, omega, kappa, k3)
            for i in range(5):
                tmp[i] = y[i] + dt * k3[i]
            _minimal_rhs(tmp, omega, kappa, k4)
            for i in range(5):
                y[i] = y[i] + dt * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0
    return failed
