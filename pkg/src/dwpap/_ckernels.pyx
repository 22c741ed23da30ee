# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, sqrt

cnp.import_array()

ctypedef fused scalar:
    double
    double complex


def trig_eval(t, freqs, coefs):
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef double[::1] fv = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef double complex[:, ::1] cv = np.ascontiguousarray(coefs, dtype=np.complex128)
    cdef Py_ssize_t n = tv.shape[0], K = fv.shape[0], d = cv.shape[1]
    out = np.zeros((n, d), dtype=np.complex128)
    cdef double complex[:, ::1] ov = out
    cdef Py_ssize_t i, k, j
    cdef double ph
    cdef double complex e
    with nogil:
        for i in range(n):
            for k in range(K):
                ph = fv[k] * tv[i]
                e = cos(ph) + 1j * sin(ph)
                for j in range(d):
                    ov[i, j] = ov[i, j] + cv[k, j] * e
    return out


def horner(coeffs, x):
    cdef double[::1] cv = np.ascontiguousarray(coeffs, dtype=np.float64)
    xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] xv = xa.reshape(-1)
    out = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, k, m = cv.shape[0]
    cdef double acc
    with nogil:
        for i in range(xv.shape[0]):
            acc = 0.0
            for k in range(m - 1, -1, -1):
                acc = acc * xv[i] + cv[k]
            ov[i] = acc
    return out.reshape(xa.shape)


def _refine(scalar[:, :, ::1] F, double[::1] width, scalar[:, ::1] rich,
            double[::1] err, double[::1] mag):
    cdef Py_ssize_t p = F.shape[0], d = F.shape[2], i, j
    cdef double w, e, m, a, b  # e, m hold squared magnitudes
    cdef scalar s1, s2, s4, b1, b2, diff
    with nogil:
        for i in range(p):
            w = width[i]
            e = 0.0
            m = 0.0
            for j in range(d):
                s1 = w / 6.0 * (F[i, 0, j] + 4.0 * F[i, 4, j] + F[i, 8, j])
                s2 = w / 12.0 * (F[i, 0, j] + 4.0 * F[i, 2, j] + 2.0 * F[i, 4, j]
                                 + 4.0 * F[i, 6, j] + F[i, 8, j])
                s4 = w / 24.0 * (F[i, 0, j] + 4.0 * (F[i, 1, j] + F[i, 3, j] + F[i, 5, j] + F[i, 7, j])
                                 + 2.0 * (F[i, 2, j] + F[i, 4, j] + F[i, 6, j]) + F[i, 8, j])
                b1 = s2 + (s2 - s1) / 15.0
                b2 = s4 + (s4 - s2) / 15.0
                diff = b2 - b1
                rich[i, j] = b2 + diff / 63.0
                if scalar is double:
                    a = diff * diff
                    b = b2 * b2
                else:
                    a = diff.real * diff.real + diff.imag * diff.imag
                    b = b2.real * b2.real + b2.imag * b2.imag
                if a > e:
                    e = a
                if b > m:
                    m = b
            err[i] = sqrt(e) / 63.0
            mag[i] = sqrt(m)


def romberg_refine(F, width):
    dt = np.complex128 if np.iscomplexobj(F) else np.float64
    Fc = np.ascontiguousarray(F, dtype=dt)
    wv = np.ascontiguousarray(width, dtype=np.float64)
    p, d = Fc.shape[0], Fc.shape[2]
    rich = np.empty((p, d), dtype=dt)
    err = np.empty(p, dtype=np.float64)
    mag = np.empty(p, dtype=np.float64)
    _refine(Fc, wv, rich, err, mag)
    return rich, err, mag
