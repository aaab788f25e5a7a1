# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled time loop for the closed-form flux family.

Operation order mirrors :mod:`wbflux._core_py` so both backends agree to
the last bit on the same input.
"""

from libc.math cimport INFINITY, fabs, isfinite

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef enum:
    FLUX_BURGERS = 0
    FLUX_LINEAR = 1
    SCHEME_WELL_BALANCED = 0
    SCHEME_STANDARD = 1


cdef inline double _max(double a, double b) nogil:
    return a if a > b else b


cdef inline double _min(double a, double b) nogil:
    return a if a < b else b


cdef inline double _g(int kind, double ap, double am, double u, double v) nogil:
    cdef double p, m
    if kind == FLUX_BURGERS:
        p = _max(u, 0.0)
        m = _min(v, 0.0)
        return 0.5 * (p * p) + 0.5 * (m * m)
    return ap * u - am * v + 0.0


def advance(
    double[::1] u,
    const double[::1] ghost_left,
    const double[::1] ghost_right,
    const double[::1] z_ext,
    const double[::1] slopes,
    double lam,
    double dt,
    int flux_kind,
    double speed,
    double b0,
    double b1,
    int scheme,
    double blowup,
    double[::1] max_abs,
):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t nsteps = ghost_left.shape[0]
    cdef Py_ssize_t j, k
    cdef double ap = _max(speed, 0.0)
    cdef double am = _max(-speed, 0.0)
    cdef double gl, gr, ul, ur, um, up, val, peak, zc
    cdef double[::1] work = np.empty(n, dtype=np.float64)
    cdef double[::1] flux = np.empty(n + 1, dtype=np.float64)
    cdef bint ok
    cdef Py_ssize_t done = nsteps

    with nogil:
        for k in range(nsteps):
            gl = ghost_left[k]
            gr = ghost_right[k]
            peak = _max(fabs(gl), fabs(gr))
            ok = True

            if scheme == SCHEME_WELL_BALANCED:
                for j in range(n):
                    ul = u[j - 1] if j > 0 else gl
                    ur = u[j + 1] if j < n - 1 else gr
                    zc = z_ext[j + 1]
                    um = ul + (z_ext[j] - zc)
                    up = ur + (z_ext[j + 2] - zc)
                    val = u[j] - lam * (
                        _g(flux_kind, ap, am, u[j], up) - _g(flux_kind, ap, am, um, u[j])
                    )
                    work[j] = val
                    peak = _max(peak, _max(fabs(val), _max(fabs(um), fabs(up))))
                    if not isfinite(val):
                        ok = False
            else:
                flux[0] = _g(flux_kind, ap, am, gl, u[0])
                for j in range(1, n):
                    flux[j] = _g(flux_kind, ap, am, u[j - 1], u[j])
                flux[n] = _g(flux_kind, ap, am, u[n - 1], gr)
                for j in range(n):
                    val = u[j] - lam * (flux[j + 1] - flux[j]) - dt * slopes[j] * (b0 + b1 * u[j])
                    work[j] = val
                    peak = _max(peak, fabs(val))
                    if not isfinite(val):
                        ok = False

            if not ok or peak > blowup:
                max_abs[k] = peak if ok else INFINITY
                done = k
                break

            for j in range(n):
                u[j] = work[j]
            max_abs[k] = peak

    return done
