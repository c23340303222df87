# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled evaluation kernels.

Same contract as ``_pykernels``: kind codes 0 euclidean, 1 hyperbolic,
2 flat torus; direction tuples (B, n, m) float64.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cosh, fmod, sinh, sqrt

cnp.import_array()


cdef inline double _mink(const double* u, const double* v, Py_ssize_t m) nogil:
    cdef double s = -u[0] * v[0]
    cdef Py_ssize_t i
    for i in range(1, m):
        s += u[i] * v[i]
    return s


cdef inline double _dot(const double* u, const double* v, Py_ssize_t m) nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(m):
        s += u[i] * v[i]
    return s


cdef int _phi_hyperbolic(double a, const double* x, double* D, double* z,
                         Py_ssize_t n, Py_ssize_t m, double r) nogil:
    # D is the (n, m) tuple buffer, mutated in place; z receives the endpoint.
    cdef double ch = cosh(a * r)
    cdef double sh = sinh(a * r)
    cdef double znew[8]
    cdef double shift[8]
    cdef double q, c, cc, nn
    cdef Py_ssize_t k, j, i
    cdef double* dk
    cdef double* dj
    for i in range(m):
        z[i] = x[i]
    for k in range(n):
        dk = D + k * m
        for i in range(m):
            znew[i] = ch * z[i] + (sh / a) * dk[i]
        q = _mink(znew, znew, m)
        q = a * sqrt(-q)
        for i in range(m):
            znew[i] /= q
        for j in range(k + 1, n):
            dj = D + j * m
            c = _mink(dj, dk, m)
            for i in range(m):
                shift[i] = (a * sh) * z[i] + (ch - 1.0) * dk[i]
                dj[i] += c * shift[i]
            cc = _mink(dj, znew, m)
            for i in range(m):
                dj[i] += (a * a) * cc * znew[i]
            nn = sqrt(_mink(dj, dj, m))
            for i in range(m):
                dj[i] /= nn
        for i in range(m):
            z[i] = znew[i]
    return 0


def phi_endpoints(int kind, double a, double[::1] periods, double[::1] x,
                  double[:, :, ::1] dirs, double r):
    """Endpoints of the piecewise-geodesic path for each direction tuple."""
    cdef Py_ssize_t B = dirs.shape[0]
    cdef Py_ssize_t n = dirs.shape[1]
    cdef Py_ssize_t m = dirs.shape[2]
    if m > 8:
        raise ValueError("compiled kernel supports ambient dimension <= 8")
    out_arr = np.empty((B, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[:, ::1] buf_view = np.empty((n, m), dtype=np.float64)
    cdef double s
    cdef Py_ssize_t b, k, i
    if kind == 0 or kind == 2:
        with nogil:
            for b in range(B):
                for i in range(m):
                    s = 0.0
                    for k in range(n):
                        s += dirs[b, k, i]
                    s = x[i] + r * s
                    if kind == 2:
                        s = fmod(s, periods[i])
                        if s < 0:
                            s += periods[i]
                    out[b, i] = s
        return out_arr
    with nogil:
        for b in range(B):
            for k in range(n):
                for i in range(m):
                    buf_view[k, i] = dirs[b, k, i]
            _phi_hyperbolic(a, &x[0], &buf_view[0, 0], &out[b, 0], n, m, r)
    return out_arr


def walk_points(int kind, double a, double[::1] periods, double[::1] x,
                double[:, :, ::1] draws, double r):
    """Random-walk trajectories driven by pre-drawn ambient normals.

    Hyperbolic walks accumulate one Lorentz transvection per step (see the
    pure-python kernel for the conditioning rationale); the flat branches
    advance the point directly.
    """
    cdef Py_ssize_t B = draws.shape[0]
    cdef Py_ssize_t n = draws.shape[1]
    cdef Py_ssize_t m = draws.shape[2]
    if m > 8:
        raise ValueError("compiled kernel supports ambient dimension <= 8")
    out_arr = np.empty((B, n + 1, m), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef double ch = cosh(a * r)
    cdef double sh = sinh(a * r)
    cdef double z[8]
    cdef double u[8]
    cdef double Binit[64]
    cdef double Bmat[64]
    cdef double c0[8]
    cdef double bv[8]
    cdef double t0[8]
    cdef double t1[8]
    cdef double n2, q, s0, ch0, sh0
    cdef Py_ssize_t b, k, i, j
    cdef int degenerate = 0
    if kind != 1:
        with nogil:
            for b in range(B):
                for i in range(m):
                    z[i] = x[i]
                    out[b, 0, i] = z[i]
                for k in range(n):
                    for i in range(m):
                        u[i] = draws[b, k, i]
                    n2 = _dot(u, u, m)
                    if n2 < 1e-24:
                        degenerate = 1
                        break
                    n2 = sqrt(n2)
                    for i in range(m):
                        u[i] /= n2
                    if kind == 0:
                        for i in range(m):
                            z[i] += r * u[i]
                    else:
                        for i in range(m):
                            z[i] = fmod(z[i] + r * u[i], periods[i])
                            if z[i] < 0:
                                z[i] += periods[i]
                    for i in range(m):
                        out[b, k + 1, i] = z[i]
                if degenerate:
                    break
        if degenerate:
            raise RuntimeError("degenerate tangent draw (all components ~ 0)")
        return out_arr
    with nogil:
        # Transvection carrying the model origin e0/a to the start point.
        for i in range(m):
            for j in range(m):
                Binit[i * m + j] = 1.0 if i == j else 0.0
        s0 = 0.0
        for i in range(1, m):
            s0 += x[i] * x[i]
        s0 = sqrt(s0)
        if s0 >= 1e-300:
            sh0 = a * s0
            ch0 = a * x[0]
            u[0] = 0.0
            for i in range(1, m):
                u[i] = x[i] / s0
            for j in range(m):
                t0[j] = (ch0 - 1.0) * (1.0 if j == 0 else 0.0) + sh0 * u[j]
                t1[j] = (ch0 - 1.0) * u[j] + sh0 * (1.0 if j == 0 else 0.0)
            for i in range(m):
                for j in range(m):
                    Binit[i * m + j] += (1.0 if i == 0 else 0.0) * t0[j] + u[i] * t1[j]
        for b in range(B):
            for i in range(m):
                out[b, 0, i] = x[i]
                for j in range(m):
                    Bmat[i * m + j] = Binit[i * m + j]
            for k in range(n):
                u[0] = 0.0
                n2 = 0.0
                for i in range(1, m):
                    u[i] = draws[b, k, i]
                    n2 += u[i] * u[i]
                if n2 < 1e-24:
                    degenerate = 1
                    break
                n2 = sqrt(n2)
                for i in range(1, m):
                    u[i] /= n2
                for i in range(m):
                    c0[i] = Bmat[i * m]
                    bv[i] = _dot(&Bmat[i * m], u, m)
                for j in range(m):
                    t0[j] = (ch - 1.0) * (1.0 if j == 0 else 0.0) + sh * u[j]
                    t1[j] = (ch - 1.0) * u[j] + sh * (1.0 if j == 0 else 0.0)
                for i in range(m):
                    for j in range(m):
                        Bmat[i * m + j] += c0[i] * t0[j] + bv[i] * t1[j]
                for i in range(m):
                    out[b, k + 1, i] = Bmat[i * m] / a
            if degenerate:
                break
    if degenerate:
        raise RuntimeError("degenerate tangent draw (all components ~ 0)")
    return out_arr
