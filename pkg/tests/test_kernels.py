import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from genericdim import kernels
from genericdim.kernels import compiled_backend, python_backend

needs_ext = pytest.mark.skipif(compiled_backend is None, reason="compiled extension not built")

digit_lists = st.lists(st.integers(1, 6), min_size=1, max_size=200)


def both(name):
    return getattr(python_backend, name), getattr(compiled_backend, name)


@needs_ext
@given(digit_lists, st.integers(1, 4), st.integers(1, 5))
def test_window_counts_parity(digits, k, N):
    d = np.asarray(digits, dtype=np.int64)
    starts = max(len(d) - k + 1, 0)
    py, cy = both("window_counts")
    c1, o1 = py(d, k, N, starts)
    c2, o2 = cy(d, k, N, starts)
    assert np.array_equal(np.asarray(c1), np.asarray(c2)) and o1 == o2


@needs_ext
@given(st.integers(1, 3), st.integers(1, 6), st.integers(2, 3), st.integers(0, 2**31))
def test_row_window_counts_parity(j, length, N, seed):
    rng = np.random.default_rng(seed)
    words = rng.integers(1, N + 2, size=(17, length + j - 1)).astype(np.int64)
    py, cy = both("row_window_counts")
    c1, o1 = py(words, j, N)
    c2, o2 = cy(words, j, N)
    assert np.array_equal(np.asarray(c1), np.asarray(c2))
    assert np.array_equal(np.asarray(o1), np.asarray(o2))


@needs_ext
@given(st.integers(0, 2**31), st.integers(1, 300))
def test_markov_walk_parity(seed, n):
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(3), size=3)
    cum = np.ascontiguousarray(np.cumsum(P, axis=1))
    cum[:, -1] = 1.0 + 1e-12
    nxt = np.ascontiguousarray(np.tile(np.arange(3, dtype=np.int64), (3, 1)))
    u = rng.random(n)
    py, cy = both("markov_walk")
    i1, s1 = py(cum, nxt, 1, u)
    i2, s2 = cy(cum, nxt, 1, u)
    assert np.array_equal(np.asarray(i1), np.asarray(i2)) and s1 == s2


@needs_ext
@given(st.lists(st.floats(0.0, 50.0), min_size=1, max_size=100))
def test_log_continuants_parity(logs):
    py, cy = both("log_continuants")
    a = np.asarray(logs)
    q1, r1 = py(a)
    q2, r2 = cy(a)
    assert np.allclose(q1, q2, rtol=1e-13, atol=1e-13)
    assert np.allclose(r1, r2, rtol=1e-13, atol=1e-13)


def test_window_counts_hand_example():
    # 1212121212: nine 2-windows, five (1,2) and four (2,1)
    d = np.tile([1, 2], 5).astype(np.int64)
    counts, over = kernels.window_counts(d, 2, 2, 9)
    assert list(np.asarray(counts)) == [0, 5, 4, 0] and over == 0


def test_window_counts_overflow_is_counted():
    d = np.asarray([1, 7, 2, 1], dtype=np.int64)
    counts, over = kernels.window_counts(d, 1, 2, 4)
    assert np.asarray(counts).sum() + over == 4 and over == 1


def test_log_continuants_against_exact_integers():
    digits = [3, 1, 4, 1, 5, 9, 2, 6]
    logq, ratio = kernels.log_continuants(np.log(np.asarray(digits, dtype=float)))
    q, qp = 1, 0
    for i, a in enumerate(digits):
        q, qp = a * q + qp, q
        assert logq[i] == pytest.approx(math.log(q), rel=1e-14)
        assert ratio[i] == pytest.approx(qp / q, rel=1e-13)


def test_pure_python_selected_by_environment():
    code = "from genericdim import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, GENERICDIM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
