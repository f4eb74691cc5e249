# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels mirroring ``_pykernels`` for the built-in families."""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport floor, rint, fabs

cnp.import_array()


# Same coefficients and Horner order as _pykernels.SINPI_COEFFS.
cdef double C0 = 3.141592653589793
cdef double C1 = -5.16771278004997
cdef double C2 = 2.5501640398773455
cdef double C3 = -0.5992645293207921
cdef double C4 = 0.08214588661112783
cdef double C5 = -0.00737043094570703
cdef double C6 = 0.000466302805683863
cdef double C7 = -2.191535283115056e-05
cdef double C8 = 7.952024771114935e-07
cdef double C9 = -2.2939806367692774e-08
cdef double C10 = 5.248439361722456e-10


cdef inline double _sinpi_reduced(double r) noexcept nogil:
    cdef double t = r * r
    cdef double p = C10
    p = p * t + C9
    p = p * t + C8
    p = p * t + C7
    p = p * t + C6
    p = p * t + C5
    p = p * t + C4
    p = p * t + C3
    p = p * t + C2
    p = p * t + C1
    p = p * t + C0
    return r * p


cdef inline double _sin2pi(double x) noexcept nogil:
    cdef double u = 2.0 * x
    cdef double n = rint(u)
    # branch-free parity: h - floor(h) is 0 for even n and 1/2 for odd n
    cdef double h = 0.5 * n
    return _sinpi_reduced(u - n) * (1.0 - 4.0 * (h - floor(h)))


DEF LANES = 8


cdef void _shear_block(const double* bases, Py_ssize_t start, Py_ssize_t count,
                       const cnp.int64_t* cps, Py_ssize_t K, Py_ssize_t N,
                       double a, double b, double c1, double c2,
                       double* out) noexcept nogil:
    # LANES independent orbits advance in lockstep so the lane loop vectorizes.
    # The second floor maps a reduced value that rounded up to 1.0 back to 0.
    cdef double x[LANES]
    cdef double y[LANES]
    cdef double x0[LANES]
    cdef double y0[LANES]
    cdef double lx[LANES]
    cdef double ly[LANES]
    cdef Py_ssize_t j, k = 0, i
    cdef cnp.int64_t step = 0, last = cps[K - 1]
    cdef double v, f, g
    for j in range(LANES):
        # idle lanes run a dummy orbit from the origin
        x0[j] = 0.0
        y0[j] = 0.0
    for j in range(count):
        x0[j] = bases[2 * (start + j)]
        y0[j] = bases[2 * (start + j) + 1]
    for j in range(LANES):
        x[j] = x0[j]
        y[j] = y0[j]
        lx[j] = 0.0
        ly[j] = 0.0
    while step < last:
        step += 1
        for j in range(LANES):
            v = x[j] + (a * _sin2pi(y[j]) + c1)
            f = floor(v)
            v = v - f
            g = floor(v)
            x[j] = v - g
            lx[j] += f + g
            v = y[j] + (b * _sin2pi(x[j]) + c2)
            f = floor(v)
            v = v - f
            g = floor(v)
            y[j] = v - g
            ly[j] += f + g
        while k < K and cps[k] == step:
            for j in range(count):
                i = 2 * (k * N + start + j)
                out[i] = (x[j] - x0[j]) + lx[j]
                out[i + 1] = (y[j] - y0[j]) + ly[j]
            k += 1


def shear_orbits(double[:, ::1] bases, cnp.int64_t[::1] checkpoints,
                 double a, double b, double c1, double c2, int threads=1):
    """Compiled twin of ``_pykernels.shear_orbits``; seeds split across OpenMP threads."""
    cdef Py_ssize_t N = bases.shape[0]
    cdef Py_ssize_t K = checkpoints.shape[0]
    out = np.empty((K, N, 2))
    if N == 0 or K == 0:
        return out
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t nblocks = (N + LANES - 1) // LANES
    cdef Py_ssize_t blk, start, count
    if threads < 1:
        threads = 1
    for blk in prange(nblocks, nogil=True, num_threads=threads, schedule="static"):
        start = blk * LANES
        count = N - start
        if count > LANES:
            count = LANES
        _shear_block(&bases[0, 0], start, count, &checkpoints[0], K, N,
                     a, b, c1, c2, &o[0, 0, 0])
    return out


def staircase_float(double dh, double dv, Py_ssize_t max_steps):
    steps = np.empty(max_steps, dtype=np.uint8)
    deltas = np.empty(max_steps)
    cdef unsigned char[::1] s = steps
    cdef double[::1] dl = deltas
    cdef double d = 0.0, h, v
    cdef Py_ssize_t i
    with nogil:
        for i in range(max_steps):
            h = d + dh
            v = d + dv
            if fabs(h) <= fabs(v):
                d = h
                s[i] = 0
            else:
                d = v
                s[i] = 1
            dl[i] = d
    return steps, deltas


def sin2pi_array(double[::1] xs):
    """Elementwise ``sin(2 pi x)`` with the kernel's reduction, for cross-checks."""
    out = np.empty(xs.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(xs.shape[0]):
            o[i] = _sin2pi(xs[i])
    return out
