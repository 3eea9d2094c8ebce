"""Orbit accumulators, empirical measures and the weighted cylinder distance d*.

d*(mu, lam) = sum over nonempty words w of a(w) * |mu[w] - lam[w]|. It is
evaluated on the family {Sigma_N^k : k <= depth_cap} and returned as an
interval: the excluded words carry total weight ``tail`` and each of their
terms is at most a(w), so the true distance lies in [value, value + tail].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from genericdim.kernels import window_counts
from genericdim.measures import CylinderMeasure, MassRangeError
from genericdim.streams import StreamExhausted, as_stream
from genericdim.words import excluded_weight, format_word, letter_weights, parse_word, word_code

# levels with at most this many words are evaluated as whole arrays
DENSE_LIMIT = 1 << 21
MASS_TOL = 1e-12


class CapMismatchError(ValueError):
    pass


class DStar(NamedTuple):
    value: float
    tail: float

    @property
    def upper(self) -> float:
        return self.value + self.tail


@dataclass
class OrbitAccumulator:
    """Window counts of a digit sequence for window lengths 1..k_max.

    ``counts[k]`` has length N**k in lexicographic word order; ``windows[k]``
    is the number of window positions counted at length k, so that
    ``counts[k].sum() + overflow[k] == windows[k]``.
    """

    n: int
    k_max: int
    N: int
    counts: dict[int, np.ndarray] = field(default_factory=dict)
    overflow: dict[int, int] = field(default_factory=dict)
    windows: dict[int, int] = field(default_factory=dict)
    lookahead: bool = False

    def frequencies(self, k: int) -> np.ndarray:
        return self.counts[k] / self.windows[k] if self.windows[k] else np.zeros_like(self.counts[k], dtype=float)

    def count(self, w) -> int:
        k = len(w)
        if any(d > self.N for d in w):
            return 0
        return int(self.counts[k][word_code(w, self.N)])

    def __add__(self, other: "OrbitAccumulator") -> "OrbitAccumulator":
        """Merge accumulators of disjoint streams (counts add)."""
        if (self.k_max, self.N, self.lookahead) != (other.k_max, other.N, other.lookahead):
            raise CapMismatchError("accumulators built with different caps")
        return OrbitAccumulator(
            n=self.n + other.n,
            k_max=self.k_max,
            N=self.N,
            counts={k: self.counts[k] + other.counts[k] for k in self.counts},
            overflow={k: self.overflow[k] + other.overflow[k] for k in self.overflow},
            windows={k: self.windows[k] + other.windows[k] for k in self.windows},
            lookahead=self.lookahead,
        )

    def measure(self) -> "EmpiricalMeasure":
        return EmpiricalMeasure(self)

    def dumps(self) -> str:
        lines = [f"# n={self.n} k_max={self.k_max} N={self.N} lookahead={int(self.lookahead)}"]
        for k in range(1, self.k_max + 1):
            lines.append(f"# k={k} windows={self.windows[k]} overflow={self.overflow[k]}")
        lines.append("word\tcount")
        for k in range(1, self.k_max + 1):
            nz = np.nonzero(self.counts[k])[0]
            for code in nz:
                lines.append(f"{format_word(_decode(int(code), k, self.N))}\t{int(self.counts[k][code])}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "OrbitAccumulator":
        rows = text.splitlines()
        head = dict(kv.split("=") for kv in rows[0][1:].split())
        acc = cls(int(head["n"]), int(head["k_max"]), int(head["N"]), lookahead=bool(int(head["lookahead"])))
        i = 1
        while rows[i].startswith("#"):
            meta = dict(kv.split("=") for kv in rows[i][1:].split())
            k = int(meta["k"])
            acc.windows[k] = int(meta["windows"])
            acc.overflow[k] = int(meta["overflow"])
            acc.counts[k] = np.zeros(acc.N**k, dtype=np.int64)
            i += 1
        for line in rows[i + 1 :]:
            if line.strip():
                w, c = line.split("\t")
                word = parse_word(w)
                acc.counts[len(word)][word_code(word, acc.N)] = int(c)
        return acc


def _decode(code: int, k: int, N: int) -> tuple[int, ...]:
    out = []
    for _ in range(k):
        code, r = divmod(code, N)
        out.append(r + 1)
    return tuple(reversed(out))


def accumulate_orbit(x, n: int, k_max: int, N: int, lookahead: bool = False) -> OrbitAccumulator:
    """Count length-k windows of the digit stream ``x`` for k = 1..k_max.

    By default only windows lying inside the first n digits are counted
    (n - k + 1 of them). With ``lookahead=True`` every window starting at
    positions 1..n is counted, reading n + k_max - 1 digits; those are the
    frequencies of the orbit measure (1/n) sum_{i<n} delta_{T^i x}.
    """
    if n < 1 or k_max < 1 or N < 1:
        raise ValueError("n, k_max and N must be positive")
    stream = as_stream(x)
    need = n + k_max - 1 if lookahead else n
    try:
        digits = np.ascontiguousarray(stream.prefix(need), dtype=np.int64)
    except StreamExhausted as exc:
        raise StreamExhausted(f"stream ended before horizon {need}: {exc}") from None
    if len(digits) < need:
        raise StreamExhausted(f"stream ended after {len(digits)} digits, horizon needs {need}")
    acc = OrbitAccumulator(n, k_max, N, lookahead=lookahead)
    for k in range(1, k_max + 1):
        starts = n if lookahead else max(n - k + 1, 0)
        counts, over = window_counts(digits, k, N, starts)
        acc.counts[k] = np.asarray(counts)
        acc.overflow[k] = int(over)
        acc.windows[k] = starts
    return acc


class EmpiricalMeasure(CylinderMeasure):
    """Window frequencies of an accumulator read as cylinder masses."""

    exact = False
    invariant = False

    def __init__(self, acc: OrbitAccumulator):
        self.acc = acc
        self.alphabet = acc.N
        self.max_depth = acc.k_max
        self.name = "empirical"

    def mass(self, w):
        if len(w) == 0:
            return 1.0
        if len(w) > self.acc.k_max:
            raise ValueError(f"accumulator holds windows up to length {self.acc.k_max}")
        win = self.acc.windows[len(w)]
        return self.acc.count(w) / win if win else 0.0

    def child_masses(self, w, N):
        k = len(w) + 1
        if k > self.acc.k_max:
            raise ValueError(f"accumulator holds windows up to length {self.acc.k_max}")
        out = np.zeros(N)
        if any(d > self.acc.N for d in w) or not self.acc.windows[k]:
            return out
        base = word_code(w, self.acc.N) * self.acc.N
        m = min(N, self.acc.N)
        out[:m] = self.acc.counts[k][base : base + m] / self.acc.windows[k]
        return out

    def level_masses(self, k, N):
        if N == self.acc.N:
            return self.acc.frequencies(k)
        return super().level_masses(k, N)


def _check_range(m: np.ndarray, who: str) -> None:
    if m.size and (m.min() < -MASS_TOL or m.max() > 1 + MASS_TOL):
        bad = m.min() if m.min() < -MASS_TOL else m.max()
        raise MassRangeError(f"{who} returned cylinder mass {bad!r} outside [0, 1]")


def _check_depth(mu: CylinderMeasure, depth_cap: int) -> None:
    if mu.max_depth is not None and mu.max_depth < depth_cap:
        raise ValueError(f"{mu.name} is only evaluable to depth {mu.max_depth}, asked for {depth_cap}")


def d_star(mu: CylinderMeasure, lam: CylinderMeasure, depth_cap: int, alphabet_cap: int,
           max_nodes: int = 10_000_000) -> DStar:
    """Truncated d* with a closed-form bound on the excluded weight."""
    if depth_cap < 1 or alphabet_cap < 1:
        raise ValueError("caps must be positive")
    _check_depth(mu, depth_cap)
    _check_depth(lam, depth_cap)
    N = alphabet_cap
    tail = excluded_weight(depth_cap, N)
    if mu is lam:
        return DStar(0.0, tail)
    if sum(N**k for k in range(1, depth_cap + 1)) <= DENSE_LIMIT:
        total = 0.0
        for k in range(1, depth_cap + 1):
            a = mu.level_masses(k, N)
            b = lam.level_masses(k, N)
            _check_range(a, mu.name)
            _check_range(b, lam.name)
            w = np.ones(1)
            lw = letter_weights(N)
            for _ in range(k):
                w = np.outer(w, lw).ravel()
            total += float(np.dot(w, np.abs(a - b)))
        return DStar(total, tail)
    return DStar(_d_star_sparse(mu, lam, depth_cap, N, max_nodes), tail)


def _d_star_sparse(mu, lam, depth_cap, N, max_nodes):
    """Depth-first over the union of supports; subtrees where both measures
    vanish contribute exactly zero and are skipped."""
    lw = letter_weights(N)
    total = 0.0
    visited = 0
    stack = [((), 1.0)]
    while stack:
        w, a = stack.pop()
        ka = mu.child_masses(w, N)
        kb = lam.child_masses(w, N)
        _check_range(ka, mu.name)
        _check_range(kb, lam.name)
        weights = a * lw
        total += float(np.dot(weights, np.abs(ka - kb)))
        if len(w) + 1 == depth_cap:
            continue
        live = np.nonzero((ka > 0) | (kb > 0))[0]
        visited += len(live)
        if visited > max_nodes:
            raise ValueError(
                f"d* enumeration exceeded {max_nodes} cylinders; lower depth_cap or alphabet_cap")
        for i in live[::-1]:
            stack.append((w + (int(i) + 1,), float(weights[i])))
    return total


def d_star_orbit_vs_measure(acc: OrbitAccumulator, mu: CylinderMeasure, depth_cap: int | None = None,
                            alphabet_cap: int | None = None) -> DStar:
    """d* between the accumulator's empirical measure and ``mu`` on the
    accumulator's own cylinder family."""
    if depth_cap is not None and depth_cap != acc.k_max:
        raise CapMismatchError(f"accumulator has k_max={acc.k_max}, asked for depth {depth_cap}")
    if alphabet_cap is not None and alphabet_cap != acc.N:
        raise CapMismatchError(f"accumulator has N={acc.N}, asked for cap {alphabet_cap}")
    return d_star(EmpiricalMeasure(acc), mu, acc.k_max, acc.N)


def bowen_bound(n: int, n0: int) -> float:
    """Bound on d*(Delta_{x,n}, Delta_{y,n}) when x and y share their first n digits."""
    if not 0 <= n0 < n:
        raise ValueError("need 0 <= n0 < n")
    return (n - n0) / n * 2.0 ** -(n0 + 1) + n0 / n

