# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Dormand-Prince 5(4) integrator for i dy/dt = H(t) y.

Mirrors ``_rkpy.dopri_integrate`` step for step.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt, pow, isfinite
from libc.string cimport memset

cnp.import_array()

ctypedef double complex cplx

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40

cdef double SAFETY = 0.9, FAC_MIN = 0.2, FAC_MAX = 5.0


class IntegrationError(RuntimeError):
    pass


cdef struct Kern:
    Py_ssize_t dim
    Py_ssize_t nnz
    Py_ssize_t ncomp
    const long long* rows
    const long long* cols
    const cplx* vals
    const long long* comp
    const double* gc
    const double* gr
    const double* ga
    const double* gx
    double* env


cdef inline void rhs(Kern* k, double t, const cplx* y, cplx* dy) noexcept nogil:
    cdef Py_ssize_t i, c
    cdef double x
    cdef cplx acc
    for i in range(k.ncomp):
        x = t - k.gc[i]
        if fabs(x) > k.gx[i]:
            k.env[i] = 0.0
        else:
            k.env[i] = k.ga[i] * exp(-k.gr[i] * x * x)
    memset(dy, 0, k.dim * sizeof(cplx))
    for i in range(k.nnz):
        c = k.comp[i]
        if c < 0:
            dy[k.rows[i]] += k.vals[i] * y[k.cols[i]]
        else:
            dy[k.rows[i]] += k.vals[i] * k.env[c] * y[k.cols[i]]
    for i in range(k.dim):
        acc = dy[i]
        dy[i] = acc.imag - 1j * acc.real


cdef inline double max2(double a, double b) noexcept nogil:
    return a if a > b else b


cdef inline double min2(double a, double b) noexcept nogil:
    return a if a < b else b


def dopri_integrate(kd, y0, t_out, double tol, double h0=0.0, long long max_steps=50_000_000):
    """Integrate from ``t_out[0]`` through every time in ``t_out``.

    Returns ``(states, n_accepted, n_rejected)`` with one row per output time.
    """
    cdef cnp.ndarray[long long, ndim=1, mode="c"] rows = np.ascontiguousarray(kd.rows, dtype=np.int64)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] cols = np.ascontiguousarray(kd.cols, dtype=np.int64)
    cdef cnp.ndarray[cplx, ndim=1, mode="c"] vals = np.ascontiguousarray(kd.vals, dtype=np.complex128)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] comp = np.ascontiguousarray(kd.comp, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] gc = np.ascontiguousarray(kd.g_center, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] gr = np.ascontiguousarray(kd.g_rate, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] ga = np.ascontiguousarray(kd.g_amp, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] gx = np.ascontiguousarray(kd.g_cut, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] env = np.zeros(max(len(gc), 1))
    cdef cnp.ndarray[double, ndim=1, mode="c"] tout = np.ascontiguousarray(t_out, dtype=np.float64)
    cdef Py_ssize_t dim = kd.dim
    cdef Py_ssize_t n_out = tout.shape[0]
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] states = np.empty((n_out, dim), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] work = np.zeros((10, dim), dtype=np.complex128)
    cdef cplx* y = &work[0, 0]
    cdef cplx* k1 = &work[1, 0]
    cdef cplx* k2 = &work[2, 0]
    cdef cplx* k3 = &work[3, 0]
    cdef cplx* k4 = &work[4, 0]
    cdef cplx* k5 = &work[5, 0]
    cdef cplx* k6 = &work[6, 0]
    cdef cplx* k7 = &work[7, 0]
    cdef cplx* ynew = &work[8, 0]
    cdef cplx* tmp = &work[9, 0]
    cdef Kern k
    cdef Py_ssize_t i, j
    cdef double t, target, remaining, hs, hh, h, tnew, direction, span, scale, en, fac, sc, a, b, s
    cdef long long n_acc = 0, n_rej = 0
    cdef bint last
    cdef cplx e

    if len(rows) != len(cols) or len(rows) != len(vals) or len(rows) != len(comp):
        raise ValueError("inconsistent kernel arrays")
    y0a = np.ascontiguousarray(y0, dtype=np.complex128)
    if y0a.shape[0] != dim:
        raise ValueError("initial state has wrong dimension")
    k.dim = dim
    k.nnz = rows.shape[0]
    k.ncomp = gc.shape[0]
    k.rows = &rows[0] if k.nnz else NULL
    k.cols = &cols[0] if k.nnz else NULL
    k.vals = &vals[0] if k.nnz else NULL
    k.comp = &comp[0] if k.nnz else NULL
    k.gc = &gc[0] if k.ncomp else NULL
    k.gr = &gr[0] if k.ncomp else NULL
    k.ga = &ga[0] if k.ncomp else NULL
    k.gx = &gx[0] if k.ncomp else NULL
    k.env = &env[0]

    for i in range(dim):
        y[i] = y0a[i]
        states[0, i] = y[i]
    if n_out == 1:
        return states, 0, 0
    direction = 1.0 if tout[n_out - 1] > tout[0] else -1.0
    t = tout[0]
    span = fabs(tout[n_out - 1] - tout[0])
    rhs(&k, t, y, k1)
    if h0 <= 0.0:
        scale = 0.0
        for i in range(dim):
            scale = max2(scale, sqrt(k1[i].real * k1[i].real + k1[i].imag * k1[i].imag))
        scale += 1.0
        h0 = min2(0.01 * span, 0.1 * pow(tol, 0.2) / scale)
    h = h0

    for j in range(1, n_out):
        target = tout[j]
        while direction * (target - t) > 0.0:
            remaining = fabs(target - t)
            if remaining <= 1e-15 * max2(1.0, fabs(t)):
                t = target  # round-off remainder
                break
            last = h >= remaining
            hs = remaining if last else h
            hh = direction * hs
            if h < 1e-14 * max2(1.0, fabs(t)):
                raise IntegrationError(f"step size underflow at t={t}")
            if n_acc + n_rej >= max_steps:
                raise IntegrationError(f"maximum number of steps exceeded at t={t}")
            with nogil:
                for i in range(dim):
                    tmp[i] = y[i] + hh * (A21 * k1[i])
                rhs(&k, t + C2 * hh, tmp, k2)
                for i in range(dim):
                    tmp[i] = y[i] + hh * (A31 * k1[i] + A32 * k2[i])
                rhs(&k, t + C3 * hh, tmp, k3)
                for i in range(dim):
                    tmp[i] = y[i] + hh * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
                rhs(&k, t + C4 * hh, tmp, k4)
                for i in range(dim):
                    tmp[i] = y[i] + hh * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
                rhs(&k, t + C5 * hh, tmp, k5)
                for i in range(dim):
                    tmp[i] = y[i] + hh * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
                rhs(&k, t + hh, tmp, k6)
                for i in range(dim):
                    ynew[i] = y[i] + hh * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
                tnew = target if last else t + hh
                rhs(&k, tnew, ynew, k7)
                s = 0.0
                for i in range(dim):
                    e = hh * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
                    a = sqrt(y[i].real * y[i].real + y[i].imag * y[i].imag)
                    b = sqrt(ynew[i].real * ynew[i].real + ynew[i].imag * ynew[i].imag)
                    sc = tol + tol * max2(a, b)
                    s += (e.real * e.real + e.imag * e.imag) / (sc * sc)
                en = sqrt(s / dim)
            if not isfinite(en):
                raise IntegrationError(f"non-finite error estimate at t={t}")
            if en <= 1.0:
                if en == 0.0:
                    fac = FAC_MAX
                else:
                    fac = min2(FAC_MAX, max2(FAC_MIN, SAFETY * pow(en, -0.2)))
                t = tnew
                for i in range(dim):
                    y[i] = ynew[i]
                    k1[i] = k7[i]
                n_acc += 1
                h = max2(h, hs * fac) if last else hs * fac
            else:
                h = hs * max2(FAC_MIN, SAFETY * pow(en, -0.2))
                n_rej += 1
        for i in range(dim):
            states[j, i] = y[i]
    return states, n_acc, n_rej
