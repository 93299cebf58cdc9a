"""Pure numpy implementations of the numerical kernels.

These mirror ``_ckernels.pyx`` function for function and are used whenever
the compiled extension is unavailable (or ``RAMAN_COMB_PURE_PYTHON`` is set).
"""
import math

import numpy as np

_RESCALE_AT = 1e200
_RESCALE_BY = 1e-200
# below this the recurrence step factor 2k/x can overflow; use the power series
SMALL_X = 1e-3


def miller_start(nmax, x):
    """Even starting order for the downward recurrence."""
    top = max(nmax, int(x) + 1)
    m = top + 20 + int(math.sqrt(60.0 * top))
    return m + (m & 1)


def _series_row(x, nmax):
    """Three-term power series, relative error below (x/2)^6 / 6."""
    row = np.zeros(nmax + 1)
    h = 0.5 * abs(x)
    q = h * h
    t = 1.0
    for n in range(nmax + 1):
        row[n] = t * (1.0 - q / (n + 1) + q * q / (2.0 * (n + 1) * (n + 2)))
        t *= h / (n + 1)
    if x < 0:
        row[1::2] *= -1.0
    return row


def bessel_table(x, nmax):
    """J_0..J_nmax at each abscissa in `x` by Miller's downward recurrence.

    The recurrence J_{k-1} = (2k/x) J_k - J_{k+1} is started far above
    `nmax` from an arbitrary seed and normalized with
    J_0 + 2 sum_k J_{2k} = 1. Negative abscissae use J_n(-x) = (-1)^n J_n(x).

    Abscissae with |x| < 1e-3 use the power series instead.

    Returns an array of shape (len(x), nmax + 1).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ValueError("x must be one-dimensional")
    nmax = int(nmax)
    if nmax < 0:
        raise ValueError("nmax must be non-negative")
    out = np.zeros((x.size, nmax + 1))
    if x.size == 0:
        return out
    ax = np.abs(x)
    small = ax < SMALL_X
    for i in np.nonzero(small)[0]:
        out[i] = _series_row(x[i], nmax)
    live = ~small
    if not live.any():
        return out
    xl = ax[live]
    rows = np.zeros((xl.size, nmax + 1))
    m = miller_start(nmax, float(xl.max()))
    two_over_x = 2.0 / xl
    jp = np.zeros(xl.size)   # J_{k+1}
    j = np.ones(xl.size)     # J_k, starting at k = m
    norm = 2.0 * j           # m is even
    for k in range(m, 0, -1):
        jm = k * two_over_x * j - jp
        jp, j = j, jm
        # j now holds J_{k-1}
        big = np.abs(j) > _RESCALE_AT
        if big.any():
            j[big] *= _RESCALE_BY
            jp[big] *= _RESCALE_BY
            norm[big] *= _RESCALE_BY
            rows[big] *= _RESCALE_BY
        n = k - 1
        if n <= nmax:
            rows[:, n] = j
        if n > 0 and n % 2 == 0:
            norm += 2.0 * j
    norm += j
    rows /= norm[:, None]
    neg = x[live] < 0
    if neg.any():
        rows[neg, 1::2] *= -1.0
    out[live] = rows
    return out


def _signed(jpos, n):
    """J_n from a table of non-negative orders (0 outside the table)."""
    n = np.asarray(n)
    a = np.abs(n)
    inside = a < jpos.size
    vals = np.where(inside, jpos[np.minimum(a, jpos.size - 1)], 0.0)
    return np.where((n < 0) & (a % 2 == 1), -vals, vals)


def cavity_triple_sum(jpos, delta):
    """Direct sum over (n, m, l) of the four filtered Bessel factors.

    `jpos` holds J_0..J_N of the pre-doubling comb; every Bessel index is
    restricted to [-N, N]. Returns the sum without any prefactor.
    """
    jpos = np.asarray(jpos, dtype=float)
    big_n = jpos.size - 1
    idx = np.arange(-big_n, big_n + 1)
    f = _signed(jpos, idx) / (1.0 - 2j * idx * delta)
    g = np.conj(f)
    total = 0.0 + 0.0j
    for n in range(-2 * big_n, 2 * big_n + 1):
        m = idx[np.abs(n - idx) <= big_n]
        a = np.sum(f[n - m + big_n] * f[m + big_n])
        l = idx[np.abs(n + 2 - idx) <= big_n]
        b = np.sum(g[n + 2 - l + big_n] * g[l + big_n])
        total += a * b
    return complex(total)


def parity_triple_sum(jpos, parity):
    """Direct sum over (n, m, l) of four parity-selected Bessel factors.

    parity 0 uses J_{2(n-m)} J_{2m} J_{2(n+1-l)} J_{2l}; parity 1 adds one to
    every Bessel index. Indices outside [-N, N] are dropped.
    """
    jpos = np.asarray(jpos, dtype=float)
    big_n = jpos.size - 1
    half = (big_n + 1) // 2 + 1
    idx = np.arange(-half, half + 1)
    p = int(parity)

    def term(k):
        return _signed(jpos, 2 * k + p) * (np.abs(2 * k + p) <= big_n)

    total = 0.0
    for n in range(-2 * half, 2 * half + 1):
        a = np.sum(term(n - idx) * term(idx))
        b = np.sum(term(n + 1 - idx) * term(idx))
        total += a * b
    return float(total)
