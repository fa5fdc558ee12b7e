# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``; same signatures."""
import numpy as np

cdef extern from "complex.h" nogil:
    double complex conj(double complex)
    double creal(double complex)
    double cimag(double complex)

from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport zgemm


def rearrange(double complex[:, ::1] m, Py_ssize_t p, Py_ssize_t q):
    out = np.empty((p * p, q * q), dtype=np.complex128)
    cdef double complex[:, ::1] r = out
    cdef Py_ssize_t i, j, mm, nn
    with nogil:
        for i in range(p):
            for j in range(p):
                for nn in range(q):
                    for mm in range(q):
                        r[i * p + j, nn * q + mm] = m[i * q + mm, j * q + nn]
    return out


def rearrange_inv(double complex[:, ::1] r, Py_ssize_t p, Py_ssize_t q):
    out = np.empty((p * q, p * q), dtype=np.complex128)
    cdef double complex[:, ::1] m = out
    cdef Py_ssize_t i, j, mm, nn
    with nogil:
        for i in range(p):
            for mm in range(q):
                for j in range(p):
                    for nn in range(q):
                        m[i * q + mm, j * q + nn] = r[i * p + j, nn * q + mm]
    return out


def contract_for_b(double complex[:, ::1] s, double complex[:, ::1] a,
                   Py_ssize_t p, Py_ssize_t q):
    out = np.zeros((q, q), dtype=np.complex128)
    cdef double complex[:, ::1] acc = out
    cdef double complex c
    cdef Py_ssize_t i, j, mm, nn
    with nogil:
        for i in range(p):
            for j in range(p):
                c = conj(a[i, j])
                if c == 0:
                    continue
                for mm in range(q):
                    for nn in range(q):
                        acc[mm, nn] = acc[mm, nn] + c * s[i * q + mm, j * q + nn]
    return out


def contract_for_a(double complex[:, ::1] s, double complex[:, ::1] b,
                   Py_ssize_t p, Py_ssize_t q):
    out = np.empty((p, p), dtype=np.complex128)
    cdef double complex[:, ::1] res = out
    cdef double complex acc
    cdef Py_ssize_t i, j, mm, nn
    with nogil:
        for i in range(p):
            for j in range(p):
                acc = 0
                for mm in range(q):
                    for nn in range(q):
                        acc = acc + conj(b[mm, nn]) * s[i * q + mm, j * q + nn]
                res[i, j] = acc
    return out


def kron_residual_sq(double complex[:, ::1] s, double complex[:, ::1] a,
                     double complex[:, ::1] b):
    cdef Py_ssize_t p = a.shape[0], q = b.shape[0]
    cdef Py_ssize_t i, j, mm, nn
    cdef double complex d, aij
    cdef double total = 0.0
    with nogil:
        for i in range(p):
            for j in range(p):
                aij = a[i, j]
                for mm in range(q):
                    for nn in range(q):
                        d = s[i * q + mm, j * q + nn] - aij * b[mm, nn]
                        total += creal(d) * creal(d) + cimag(d) * cimag(d)
    return total


cdef void _times_transpose(double complex[:, ::1] x, double complex[:, ::1] r,
                          double complex[:, ::1] out) noexcept nogil:
    """``out = x @ r.T`` for row-major ``x (m, k)``, ``r (c, k)`` via zgemm."""
    cdef int m = <int>x.shape[0], k = <int>x.shape[1], c = <int>r.shape[0]
    cdef double complex one = 1.0, zero = 0.0
    if m == 0 or c == 0:
        return
    # column-major view: out^T (c, m) = r (c, k) @ x^T (k, m)
    zgemm(b"T", b"N", &c, &m, &k, &one, &r[0, 0], &k, &x[0, 0], &k, &zero, &out[0, 0], &c)


cdef void _left_multiply(double complex[:, :, ::1] x, double complex[:, ::1] left,
                         double complex[:, :, ::1] y) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0], p = x.shape[1], q = x.shape[2]
    cdef Py_ssize_t k, a, i, mm
    cdef double complex c
    for k in range(n):
        for a in range(p):
            for mm in range(q):
                y[k, a, mm] = 0
            for i in range(p):
                c = left[a, i]
                for mm in range(q):
                    y[k, a, mm] = y[k, a, mm] + c * x[k, i, mm]


def kron_apply(double complex[:, :, ::1] x, double complex[:, ::1] left,
               double complex[:, ::1] right):
    cdef Py_ssize_t n = x.shape[0], p = x.shape[1], q = x.shape[2]
    out = np.empty((n, p, q), dtype=np.complex128)
    tmp = np.empty((n, p, q), dtype=np.complex128)
    cdef double complex[:, :, ::1] t3 = tmp
    cdef double complex[:, ::1] x2 = np.asarray(x).reshape(n * p, q)
    cdef double complex[:, ::1] t2 = tmp.reshape(n * p, q)
    cdef double complex[:, :, ::1] y = out
    with nogil:
        _times_transpose(x2, right, t2)
        _left_multiply(t3, left, y)
    return out


def left_apply(double complex[:, :, ::1] x, double complex[:, ::1] left):
    out = np.empty((x.shape[0], x.shape[1], x.shape[2]), dtype=np.complex128)
    cdef double complex[:, :, ::1] y = out
    with nogil:
        _left_multiply(x, left, y)
    return out


def detection_stats(double complex[:, :, ::1] y, double complex[:, ::1] temporal):
    cdef Py_ssize_t n = y.shape[0], p = y.shape[1], q = y.shape[2]
    cdef Py_ssize_t nb = temporal.shape[0]
    out = np.empty((n, nb), dtype=np.float64)
    cdef double[:, ::1] res = out
    cdef double complex[:, ::1] tc = np.ascontiguousarray(np.conj(temporal))
    z_arr = np.empty((n * p, nb), dtype=np.complex128)
    cdef double complex[:, ::1] z = z_arr
    cdef double complex[:, ::1] y2 = np.asarray(y).reshape(n * p, q)
    cdef Py_ssize_t k, t, a
    cdef double complex v
    with nogil:
        _times_transpose(y2, tc, z)
        for k in range(n):
            for t in range(nb):
                res[k, t] = 0.0
            for a in range(p):
                for t in range(nb):
                    v = z[k * p + a, t]
                    res[k, t] += creal(v) * creal(v) + cimag(v) * cimag(v)
            for t in range(nb):
                res[k, t] = sqrt(res[k, t])
    return out
