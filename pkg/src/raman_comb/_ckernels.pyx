# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``."""
from libc.math cimport fabs, sqrt

import numpy as np

cdef double RESCALE_AT = 1e200
cdef double RESCALE_BY = 1e-200
cdef double SMALL_X = 1e-3


cdef inline int _miller_start(int nmax, double x) noexcept nogil:
    cdef int top = nmax if nmax > <int>x + 1 else <int>x + 1
    cdef int m = top + 20 + <int>sqrt(60.0 * top)
    return m + (m & 1)


def miller_start(int nmax, double x):
    return _miller_start(nmax, x)


cdef void _miller_row(double x, int nmax, double[:] row) noexcept nogil:
    cdef int m, k, n, i
    cdef double jp, j, jm, norm, ax = fabs(x)
    cdef double h, q, t
    if ax < SMALL_X:
        h = 0.5 * ax
        q = h * h
        t = 1.0
        for i in range(nmax + 1):
            row[i] = t * (1.0 - q / (i + 1) + q * q / (2.0 * (i + 1) * (i + 2)))
            if x < 0 and i % 2 == 1:
                row[i] = -row[i]
            t *= h / (i + 1)
        return
    for i in range(nmax + 1):
        row[i] = 0.0
    m = _miller_start(nmax, ax)
    jp = 0.0
    j = 1.0
    norm = 2.0
    for k in range(m, 0, -1):
        jm = (2.0 * k / ax) * j - jp
        jp = j
        j = jm
        if fabs(j) > RESCALE_AT:
            j *= RESCALE_BY
            jp *= RESCALE_BY
            norm *= RESCALE_BY
            for i in range(nmax + 1):
                row[i] *= RESCALE_BY
        n = k - 1
        if n <= nmax:
            row[n] = j
        if n > 0 and n % 2 == 0:
            norm += 2.0 * j
    norm += j
    for i in range(nmax + 1):
        row[i] /= norm
        if x < 0 and i % 2 == 1:
            row[i] = -row[i]


def bessel_table(x, int nmax):
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if xa.ndim != 1:
        raise ValueError("x must be one-dimensional")
    if nmax < 0:
        raise ValueError("nmax must be non-negative")
    out = np.zeros((xa.shape[0], nmax + 1))
    cdef const double[:] xv = xa
    cdef double[:, :] ov = out
    cdef Py_ssize_t r
    with nogil:
        for r in range(xv.shape[0]):
            _miller_row(xv[r], nmax, ov[r])
    return out


cdef inline double _signed(const double[:] jpos, int n) noexcept nogil:
    cdef int a = n if n >= 0 else -n
    if a >= jpos.shape[0]:
        return 0.0
    if n < 0 and a % 2 == 1:
        return -jpos[a]
    return jpos[a]


def cavity_triple_sum(jpos_in, double delta):
    cdef const double[:] jpos = np.ascontiguousarray(jpos_in, dtype=float)
    cdef int big_n = jpos.shape[0] - 1
    cdef int n, m, l
    cdef double complex f1, f2, g1, g2, a, b, total = 0.0
    cdef double complex one = 1.0
    with nogil:
        for n in range(-2 * big_n, 2 * big_n + 1):
            a = 0.0
            for m in range(-big_n, big_n + 1):
                if n - m < -big_n or n - m > big_n:
                    continue
                f1 = _signed(jpos, n - m) / (one - 2j * (n - m) * delta)
                f2 = _signed(jpos, m) / (one - 2j * m * delta)
                a += f1 * f2
            b = 0.0
            for l in range(-big_n, big_n + 1):
                if n + 2 - l < -big_n or n + 2 - l > big_n:
                    continue
                g1 = _signed(jpos, n + 2 - l) / (one + 2j * (n + 2 - l) * delta)
                g2 = _signed(jpos, l) / (one + 2j * l * delta)
                b += g1 * g2
            total += a * b
    return complex(total.real, total.imag)


cdef inline double _pterm(const double[:] jpos, int k, int p) noexcept nogil:
    cdef int idx = 2 * k + p
    cdef int big_n = jpos.shape[0] - 1
    if idx < -big_n or idx > big_n:
        return 0.0
    return _signed(jpos, idx)


def parity_triple_sum(jpos_in, int parity):
    cdef const double[:] jpos = np.ascontiguousarray(jpos_in, dtype=float)
    cdef int big_n = jpos.shape[0] - 1
    cdef int half = (big_n + 1) // 2 + 1
    cdef int n, m, l
    cdef double a, b, total = 0.0
    with nogil:
        for n in range(-2 * half, 2 * half + 1):
            a = 0.0
            for m in range(-half, half + 1):
                a += _pterm(jpos, n - m, parity) * _pterm(jpos, m, parity)
            b = 0.0
            for l in range(-half, half + 1):
                b += _pterm(jpos, n + 1 - l, parity) * _pterm(jpos, l, parity)
            total += a * b
    return total
