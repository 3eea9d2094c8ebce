"""Finite words over the positive integers and the cylinder weight scheme.

Words are plain tuples of positive ints. The weight of a nonempty word is

    a(w) = 2**(-len(w)) * prod(6 / (pi**2 * w_i**2))

so that the weights of all words of length n sum to 2**(-n) and the weights
of all nonempty words sum to 1. Both tails (in depth and in alphabet) are
available in closed form.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np
from scipy.special import polygamma

Word = tuple[int, ...]

ZETA2_INV = 6.0 / math.pi**2
# largest single-letter weight ratio a(wv)/a(w) for |v| = 1
MAX_LETTER_WEIGHT = ZETA2_INV / 2.0


def as_word(digits: Iterable[int]) -> Word:
    w = tuple(int(d) for d in digits)
    if any(d < 1 for d in w):
        raise ValueError(f"word digits must be >= 1, got {w}")
    return w


def parse_word(text: str) -> Word:
    """Parse ``"1,2,3"``; the empty string is the empty word."""
    text = text.strip()
    if not text:
        return ()
    return as_word(int(tok) for tok in text.split(","))


def format_word(w: Sequence[int]) -> str:
    return ",".join(str(int(d)) for d in w)


def all_words(k: int, N: int) -> np.ndarray:
    """All words of length k over {1..N} in lexicographic order, shape (N**k, k)."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((N,) * k).reshape(k, -1).T
    return grids.astype(np.int64) + 1


def word_code(w: Sequence[int], N: int) -> int:
    """Lexicographic index of ``w`` among words of its length over {1..N}."""
    code = 0
    for d in w:
        code = code * N + (int(d) - 1)
    return code


def letter_weights(N: int) -> np.ndarray:
    a = np.arange(1, N + 1, dtype=float)
    return ZETA2_INV / (2.0 * a * a)


def weight(w: Sequence[int]) -> float:
    if len(w) == 0:
        return 0.0
    out = 1.0
    for d in w:
        if d < 1:
            raise ValueError(f"word digits must be >= 1, got {tuple(w)}")
        out *= ZETA2_INV / (2.0 * float(d) ** 2)
    return out


def level_weights(k: int, N: int) -> np.ndarray:
    """Weights of all words in Sigma_N^k, lexicographic order."""
    out = np.ones(1)
    lw = letter_weights(N)
    for _ in range(k):
        out = np.outer(out, lw).ravel()
    return out


def letter_mass_sum(N: int) -> float:
    """(6/pi^2) * sum_{m<=N} 1/m^2, i.e. the in-cap share of one letter."""
    if N <= 0:
        return 0.0
    if N <= 10_000:
        m = np.arange(1, N + 1, dtype=float)
        return float(ZETA2_INV * np.sum(1.0 / (m * m)[::-1]))
    # 1 - (6/pi^2) * psi_1(N+1)
    return float(1.0 - ZETA2_INV * polygamma(1, N + 1))


def excluded_weight(depth_cap: int, alphabet_cap: int) -> float:
    """Total weight of nonempty words not in the family {Sigma_N^k : 1 <= k <= depth_cap}."""
    s = letter_mass_sum(alphabet_cap)
    inside = sum(0.5**n * s**n for n in range(1, depth_cap + 1))
    return max(0.0, 1.0 - inside)


def depth_tail(j: int) -> float:
    """Weight of all words of length > j."""
    return 0.5**j
