# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Every function here has a twin in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p

cnp.import_array()


def window_counts(const cnp.int64_t[:] digits, int k, cnp.int64_t N, Py_ssize_t n_starts):
    cdef Py_ssize_t size = 1
    cdef int i
    for i in range(k):
        size *= N
    counts = np.zeros(size, dtype=np.int64)
    cdef cnp.int64_t[:] c = counts
    cdef cnp.int64_t top = size // N
    cdef cnp.int64_t code = 0
    cdef cnp.int64_t overflow = 0
    cdef Py_ssize_t last_bad = -1
    cdef Py_ssize_t pos, start
    cdef cnp.int64_t d
    if n_starts <= 0:
        return counts, 0
    for pos in range(n_starts + k - 1):
        d = digits[pos]
        if d < 1 or d > N:
            last_bad = pos
            d = 1
        code = (code % top) * N + (d - 1)
        start = pos - k + 1
        if start >= 0:
            if last_bad >= start:
                overflow += 1
            else:
                c[code] += 1
    return counts, overflow


def row_window_counts(const cnp.int64_t[:, :] words, int j, cnp.int64_t N):
    cdef Py_ssize_t m = words.shape[0]
    cdef Py_ssize_t L = words.shape[1]
    cdef Py_ssize_t size = 1
    cdef int i
    for i in range(j):
        size *= N
    counts = np.zeros((m, size), dtype=np.int64)
    overflow = np.zeros(m, dtype=np.int64)
    cdef cnp.int64_t[:, :] c = counts
    cdef cnp.int64_t[:] ov = overflow
    cdef cnp.int64_t top = size // N
    cdef cnp.int64_t code, d
    cdef Py_ssize_t row, pos, last_bad
    for row in range(m):
        code = 0
        last_bad = -1
        for pos in range(L):
            d = words[row, pos]
            if d < 1 or d > N:
                last_bad = pos
                d = 1
            code = (code % top) * N + (d - 1)
            if pos >= j - 1:
                if last_bad >= pos - j + 1:
                    ov[row] += 1
                else:
                    c[row, code] += 1
    return counts, overflow


def markov_walk(const double[:, :] cum, const cnp.int64_t[:, :] nxt,
                cnp.int64_t start, const double[:] u):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t m = cum.shape[1]
    out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[:] o = out
    cdef cnp.int64_t s = start
    cdef Py_ssize_t i, a
    cdef double x
    for i in range(n):
        x = u[i]
        a = 0
        while a < m - 1 and cum[s, a] <= x:
            a += 1
        o[i] = a
        s = nxt[s, a]
    return out, s


def log_continuants(const double[:] log_digits):
    cdef Py_ssize_t n = log_digits.shape[0]
    logq = np.empty(n, dtype=np.float64)
    ratio = np.empty(n, dtype=np.float64)
    cdef double[:] lq = logq
    cdef double[:] rr = ratio
    cdef double L = 0.0
    cdef double r = 0.0
    cdef double la, step
    cdef Py_ssize_t i
    for i in range(n):
        la = log_digits[i]
        step = la + log1p(r * exp(-la))
        L += step
        r = exp(-step)
        lq[i] = L
        rr[i] = r
    return logq, ratio
