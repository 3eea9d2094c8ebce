"""Pure-Python/numpy versions of the compiled kernels (same signatures)."""

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _codes(windows, N):
    powers = N ** np.arange(windows.shape[-1] - 1, -1, -1, dtype=np.int64)
    bad = ((windows < 1) | (windows > N)).any(axis=-1)
    codes = ((np.clip(windows, 1, N) - 1) * powers).sum(axis=-1)
    return codes, bad


def window_counts(digits, k, N, n_starts):
    size = N**k
    if n_starts <= 0:
        return np.zeros(size, dtype=np.int64), 0
    digits = np.asarray(digits, dtype=np.int64)[: n_starts + k - 1]
    codes, bad = _codes(sliding_window_view(digits, k), N)
    counts = np.bincount(codes[~bad], minlength=size).astype(np.int64)
    return counts, int(bad.sum())


def row_window_counts(words, j, N):
    words = np.asarray(words, dtype=np.int64)
    m = words.shape[0]
    size = N**j
    codes, bad = _codes(sliding_window_view(words, j, axis=1), N)
    counts = np.zeros((m, size), dtype=np.int64)
    rows = np.broadcast_to(np.arange(m)[:, None], codes.shape)
    np.add.at(counts, (rows[~bad], codes[~bad]), 1)
    return counts, bad.sum(axis=1).astype(np.int64)


def markov_walk(cum, nxt, start, u):
    out = np.empty(len(u), dtype=np.int64)
    m = cum.shape[1]
    s = int(start)
    for i, x in enumerate(u):
        row = cum[s]
        a = 0
        while a < m - 1 and row[a] <= x:
            a += 1
        out[i] = a
        s = int(nxt[s, a])
    return out, s


def log_continuants(log_digits):
    n = len(log_digits)
    logq = np.empty(n)
    ratio = np.empty(n)
    L = 0.0
    r = 0.0
    for i, la in enumerate(log_digits):
        step = la + math.log1p(r * math.exp(-la))
        L += step
        r = math.exp(-step)
        logq[i] = L
        ratio[i] = r
    return logq, ratio
