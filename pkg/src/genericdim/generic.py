"""Constructing generic points and Cantor-type witness sets.

* ``typical_word`` draws words from a finite Markov measure by rejection until
  the word's window frequencies are d*-close to the measure.
* ``build_seed`` concatenates repeated typical words of the Markov
  approximations mu_1, mu_2, ... into a digit stream that respects
  digit caps a_n.
* ``sample_F`` and ``sample_Ystar`` produce points of the two Cantor sets used
  for dimension lower bounds, together with the reference measures whose local
  dimension is then measured.
* ``verify_generic`` tracks d*(orbit measure, mu) along a stream.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from genericdim.dimension import SupportMismatchError
from genericdim.measures import CylinderMeasure, MarkovMeasure, markov_approximation
from genericdim.streams import ArrayStream, DigitStream, MarkovStream, as_stream
from genericdim.symbolic import accumulate_orbit, d_star_orbit_vs_measure
from genericdim.words import Word, format_word, parse_word


class TypicalWordError(RuntimeError):
    """No trial within the budget passed every acceptance test."""

    def __init__(self, message: str, best: Word, deficit: float):
        super().__init__(message)
        self.best = best
        self.deficit = deficit


class CapsTooTight(ValueError):
    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class RankIntervalEmpty(ValueError):
    pass


class InfiniteRelativeEntropy(ValueError):
    pass


# -- typical words ---------------------------------------------------------------------------


@dataclass
class BirkhoffTest:
    """|mean of ``values(word)`` - target| must stay below ``tol``."""

    name: str
    values: Callable[[np.ndarray], np.ndarray]
    target: float
    tol: float

    def deficit(self, word: np.ndarray) -> float:
        return abs(float(np.mean(self.values(word))) - self.target) - self.tol


def letter_test(name: str, f: Callable[[np.ndarray], np.ndarray], mu: MarkovMeasure, tol: float) -> BirkhoffTest:
    """Birkhoff test for a function of the first digit, targeting its mu-integral."""
    letters = np.asarray(mu.letters, dtype=np.int64)
    target = float(np.dot(mu.letter_masses(int(letters.max()))[letters - 1], f(letters)))
    return BirkhoffTest(name, f, target, tol)


@dataclass
class TypicalWord:
    word: Word
    d_star: float
    trial: int


def _max_letter(mu: MarkovMeasure) -> int:
    return int(max(mu.letters))


def _score(digits: np.ndarray, mu: MarkovMeasure, eps: float, tests: Sequence[BirkhoffTest], depth: int) -> tuple[float, float]:
    # the word is scored as a cycle: the seed repeats it, so wrapped windows are the ones that occur
    k = min(depth, len(digits))
    wrapped = np.concatenate([digits, digits[: k - 1]])
    acc = accumulate_orbit(wrapped, len(digits), k, _max_letter(mu), lookahead=True)
    d = d_star_orbit_vs_measure(acc, mu).value
    deficit = d - eps
    for t in tests:
        deficit = max(deficit, t.deficit(digits))
    return d, deficit


def typical_word(mu: MarkovMeasure, n: int, eps: float, tests: Sequence[BirkhoffTest] = (), budget: int = 50,
                 seed: int = 0, key: str = "typical", depth: int = 3) -> TypicalWord:
    """A length-n sample of ``mu`` whose window measure is within ``eps`` of
    ``mu`` in truncated d* (windows of length <= depth) and which passes
    ``tests``. Trials run in order; the first accepted one is returned."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    best, best_deficit = None, math.inf
    for trial in range(budget):
        digits = MarkovStream(mu, seed, f"{key}:{trial}").prefix(n)
        d, deficit = _score(digits, mu, eps, tests, depth)
        if deficit <= 0:
            return TypicalWord(tuple(int(a) for a in digits), d, trial)
        if deficit < best_deficit:
            best, best_deficit = tuple(int(a) for a in digits), deficit
    raise TypicalWordError(f"no accepted word of length {n} in {budget} trials (best deficit {best_deficit:.3g})",
                           best, best_deficit)


def acceptance_rate(mu: MarkovMeasure, n: int, eps: float, trials: int = 20, seed: int = 0, key: str = "rate",
                    depth: int = 3, tests: Sequence[BirkhoffTest] = ()) -> float:
    hits = 0
    for trial in range(trials):
        digits = MarkovStream(mu, seed, f"{key}:{n}:{trial}").prefix(n)
        hits += _score(digits, mu, eps, tests, depth)[1] <= 0
    return hits / trials


def discover_length(mu: MarkovMeasure, eps: float, n_min: int = 64, n_max: int = 1 << 20, trials: int = 20,
                    seed: int = 0, key: str = "length", depth: int = 3) -> int:
    """Smallest n = n_min * 2^i whose acceptance rate over ``trials`` exceeds 1/2."""
    n = n_min
    while n <= n_max:
        if acceptance_rate(mu, n, eps, trials, seed, key, depth) > 0.5:
            return n
        n *= 2
    raise TypicalWordError(f"acceptance rate stayed <= 1/2 up to n = {n_max} at eps = {eps:g}", (), math.inf)


# -- digit caps -------------------------------------------------------------------------------


class Caps:
    """A nondecreasing cap sequence a_1, a_2, ... given by a function or an array."""

    def __init__(self, caps: Callable[[int], int] | Sequence[int] | None):
        self._fn = None
        self._arr = None
        if caps is None:
            pass
        elif callable(caps):
            self._fn = caps
        else:
            self._arr = np.asarray(caps, dtype=np.int64)
        self.bounded = caps is not None

    def __call__(self, n: int) -> float:
        if self._fn is not None:
            return self._fn(n)
        if self._arr is not None:
            if n > len(self._arr):
                raise CapsTooTight(f"cap sequence has only {len(self._arr)} entries", n)
            return int(self._arr[n - 1])
        return math.inf

    def array(self, n: int) -> np.ndarray:
        if self._arr is not None:
            if n > len(self._arr):
                raise CapsTooTight(f"cap sequence has only {len(self._arr)} entries", n)
            return self._arr[:n]
        if self._fn is None:
            return np.full(n, np.iinfo(np.int64).max)
        try:
            return np.asarray(self._fn(np.arange(1, n + 1)), dtype=np.int64)
        except Exception:
            return np.asarray([self._fn(i) for i in range(1, n + 1)], dtype=np.int64)

    def first_index_reaching(self, s: int, start: int, limit: int) -> int:
        """Smallest m >= start with a_{m+1} >= s (caps are nondecreasing)."""
        if self(start + 1) >= s:
            return start
        lo, hi = start, max(start, 1)
        while self(hi + 1) < s:
            lo, hi = hi, hi * 2
            if hi > limit:
                raise CapsTooTight(f"caps never reach digit {s} below index {limit}", limit)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self(mid + 1) >= s:
                hi = mid
            else:
                lo = mid
        return hi


# -- seed construction ---------------------------------------------------------------------------


@dataclass
class SeedSchedule:
    """Level j contributes the block W_j = word_j repeated t_j times; a run of
    ``pad`` ones precedes level 1. ``N[j]`` is the end index of W_j (N[0] = pad)."""

    n: list[int]
    t: list[int]
    N: list[int]
    eps: list[float]
    words: list[Word]
    pad: int = 0
    caps: str = "none"

    @property
    def levels(self) -> int:
        return len(self.n)

    @property
    def s(self) -> list[int]:
        return [max(w) for w in self.words]

    def check(self) -> None:
        """Raise ValueError unless every schedule invariant holds."""
        J = self.levels
        if len(self.N) != J + 1 or self.N[0] != self.pad:
            raise ValueError("cumulative lengths do not match the levels")
        for j in range(1, J + 1):
            if self.N[j] != self.N[j - 1] + self.t[j - 1] * self.n[j - 1]:
                raise ValueError(f"N_{j} is not N_{j - 1} + t_{j} n_{j}")
            if self.N[j] <= self.N[j - 1]:
                raise ValueError(f"N_{j} does not increase")
        for j in range(1, J):
            need = max(self.N[j - 1] ** 2 if j > 1 else 0, self.s[j])
            if self.N[j] < need:
                raise ValueError(f"N_{j} = {self.N[j]} below max(N_{j-1}^2, s_{j+1}) = {need}")
        if any(b >= a for a, b in zip(self.eps, self.eps[1:])) or any(e <= 0 for e in self.eps):
            raise ValueError("tolerances must decrease strictly and stay positive")

    def dumps(self) -> str:
        lines = [f"levels={self.levels}", f"pad={self.pad}", f"caps={self.caps}"]
        for j in range(self.levels):
            lines.append(f"level={j + 1} n={self.n[j]} t={self.t[j]} N={self.N[j + 1]} eps={self.eps[j]!r}")
            lines.append(f"word={format_word(self.words[j])}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "SeedSchedule":
        rows = [r for r in text.splitlines() if r.strip()]
        head = dict(r.split("=", 1) for r in rows[:3])
        pad = int(head["pad"])
        n, t, N, eps, words = [], [], [pad], [], []
        for row in rows[3:]:
            if row.startswith("word="):
                words.append(parse_word(row[5:]))
                continue
            f = dict(kv.split("=", 1) for kv in row.split())
            n.append(int(f["n"]))
            t.append(int(f["t"]))
            N.append(int(f["N"]))
            eps.append(float(f["eps"]))
        return cls(n, t, N, eps, words, pad, head["caps"])


class GenericPoint(DigitStream):
    """1^pad W_1 W_2 ... W_J followed by word_J repeated forever."""

    def __init__(self, schedule: SeedSchedule, seed: int, target: str, caps: Caps | None = None):
        self.schedule = schedule
        self.seed = seed
        self.target = target
        self.caps = caps
        self.name = f"seed:{target}"
        self._words = [np.asarray(w, dtype=np.int64) for w in schedule.words]

    def prefix(self, n):
        sch = self.schedule
        parts = [np.ones(min(sch.pad, n), dtype=np.int64)]
        have = len(parts[0])
        for j, w in enumerate(self._words):
            if have >= n:
                break
            last = j == sch.levels - 1
            length = n - have if last else min(sch.t[j] * len(w), n - have)
            reps = -(-length // len(w))
            parts.append(np.tile(w, reps)[:length])
            have += length
        return np.concatenate(parts)

    def cap_violation(self, n: int) -> int | None:
        """First index <= n with z_i > a_i, or None."""
        if self.caps is None or not self.caps.bounded:
            return None
        bad = np.nonzero(self.prefix(n) > self.caps.array(n))[0]
        return int(bad[0]) + 1 if len(bad) else None

    def provenance(self):
        return {"stream": self.name, "seed": self.seed, "levels": self.schedule.levels,
                "N": " ".join(map(str, self.schedule.N))}


def _alphabet_cap(mu: CylinderMeasure, j: int, alphabet_cap: Callable[[int], int] | int | None) -> int:
    if alphabet_cap is not None:
        return alphabet_cap(j) if callable(alphabet_cap) else int(alphabet_cap)
    return mu.alphabet if mu.alphabet is not None else 4 * 2**j


def build_seed(mu: CylinderMeasure, caps: Callable[[int], int] | Sequence[int] | None = None, levels: int = 3, *,
               eps_scale: float = 1.0, seed: int = 0, depth: int = 3,
               alphabet_cap: Callable[[int], int] | int | None = None, n_min: int = 64, n_max: int = 1 << 20,
               budget: int = 50, max_length: int = 1 << 62) -> GenericPoint:
    """Concatenate repeated typical words of mu_1, ..., mu_J under digit caps.

    Level j uses a word of mu_j = markov_approximation(mu, j) with tolerance
    eps_scale * 4^-j; its length is the smallest doubling of ``n_min`` that
    is accepted in more than half of 20 trials. Repetition counts make
    N_j >= max(N_{j-1}^2, s_{j+1}) and push N_j far enough that the caps admit
    every digit of level j+1. Ones are prepended until the caps admit level 1.
    """
    cap = Caps(caps)
    eps = [eps_scale * 4.0**-j for j in range(1, levels + 1)]
    words, ns = [], []
    for j in range(1, levels + 1):
        mu_j = markov_approximation(mu, j, _alphabet_cap(mu, j, alphabet_cap))
        n_j = discover_length(mu_j, eps[j - 1], n_min=n_min, n_max=n_max, seed=seed, key=f"len:{j}", depth=depth)
        words.append(typical_word(mu_j, n_j, eps[j - 1], budget=budget, seed=seed, key=f"word:{j}", depth=depth).word)
        ns.append(n_j)
    s = [max(w) for w in words]
    pad = cap.first_index_reaching(s[0], 0, max_length) if cap.bounded else 0
    N, t = [pad], []
    for j in range(1, levels + 1):
        prev = N[-1]
        need = prev + ns[j - 1]
        if j < levels:
            need = max(need, s[j], prev**2 if j > 1 else 0)
            if cap.bounded:
                need = max(need, cap.first_index_reaching(s[j], prev, max_length))
        t_j = max(1, -(-(need - prev) // ns[j - 1]))
        if prev + t_j * ns[j - 1] > max_length:
            raise CapsTooTight(f"level {j} would end past index {max_length}", max_length)
        t.append(t_j)
        N.append(prev + t_j * ns[j - 1])
    schedule = SeedSchedule(ns, t, N, eps, words, pad, caps="none" if caps is None else "given")
    schedule.check()
    return GenericPoint(schedule, seed, mu.name, cap)


# -- genericity check -------------------------------------------------------------------------------


@dataclass
class GenericityTrajectory:
    horizons: list[int]
    values: list[float]
    tails: list[float]
    decreasing: bool
    envelope_decreasing: bool

    def to_csv(self) -> str:
        rows = ["horizon,d_star,tail"] + [f"{n},{v!r},{t!r}" for n, v, t in zip(self.horizons, self.values, self.tails)]
        return "\n".join(rows) + "\n"


def verify_generic(x, mu: CylinderMeasure, horizons: Sequence[int], *, k_max: int = 3, N: int | None = None,
                   lookahead: bool = False) -> GenericityTrajectory:
    """d*(orbit measure of x up to n, mu) for n in ``horizons``.

    ``decreasing`` means strictly decreasing values; ``envelope_decreasing``
    means the running upper envelope max(values[i:]) ends lower than it starts.
    """
    horizons = sorted(int(n) for n in horizons)
    stream = as_stream(x)
    if N is None:
        N = mu.alphabet if mu.alphabet is not None else int(stream.prefix(horizons[-1]).max())
    values, tails = [], []
    for n in horizons:
        d = d_star_orbit_vs_measure(accumulate_orbit(stream, n, k_max, N, lookahead=lookahead), mu)
        values.append(d.value)
        tails.append(d.tail)
    env = [max(values[i:]) for i in range(len(values))]
    decreasing = all(b < a for a, b in zip(values, values[1:]))
    return GenericityTrajectory(horizons, values, tails, decreasing, env[-1] < env[0])


# -- Cantor sets -------------------------------------------------------------------------------------


class RankTable:
    """Letters sorted by decreasing nu-mass (ties broken by the smaller letter)."""

    def __init__(self, nu: CylinderMeasure, size: int):
        logm = nu.log_letter_masses(size)
        self.letters = (np.argsort(-logm, kind="stable") + 1).astype(np.int64)
        self.rank_of = np.empty(size + 1, dtype=np.int64)
        self.rank_of[self.letters] = np.arange(1, size + 1)
        self.size = size


@dataclass
class CantorLevel:
    position: int
    lo: int  # ranks lo..hi inclusive
    hi: int

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1


class CantorMeasure(CylinderMeasure):
    """Off the scheduled positions the digit is fixed; at each scheduled
    position it is uniform over the allowed letters."""

    exact = True
    invariant = False

    def __init__(self, fixed: np.ndarray, choices: dict[int, np.ndarray], name: str = "cantor"):
        self.fixed = np.asarray(fixed, dtype=np.int64)
        self.choices = choices  # position (1-based) -> sorted allowed letters
        self.name = name

    def _log_step(self, i: int, a: int) -> float:
        allowed = self.choices.get(i)
        if allowed is None:
            return 0.0 if a == self.fixed[i - 1] else -math.inf
        k = np.searchsorted(allowed, a)
        return -math.log(len(allowed)) if k < len(allowed) and allowed[k] == a else -math.inf

    def mass(self, w):
        return math.exp(sum(self._log_step(i, int(a)) for i, a in enumerate(w, start=1)))

    def child_masses(self, w, N):
        base = self.mass(w)
        out = np.zeros(N)
        i = len(w) + 1
        allowed = self.choices.get(i)
        if allowed is None:
            if self.fixed[i - 1] <= N:
                out[self.fixed[i - 1] - 1] = base
        else:
            ok = allowed[allowed <= N]
            out[ok - 1] = base / len(allowed)
        return out

    def log_prefix_masses(self, x):
        steps = np.array([self._log_step(i, int(a)) for i, a in enumerate(x, start=1)])
        return np.cumsum(steps)


@dataclass
class FSample:
    stream: ArrayStream
    levels: list[CantorLevel]


@dataclass
class FSet:
    samples: list[FSample]
    reference: CantorMeasure
    levels: list[CantorLevel]
    table: RankTable


def cantor_levels(depth: int, delta: float, rank_limit: int) -> list[CantorLevel]:
    """Rank intervals (s_k - s_k^delta, s_k] at positions k^2 with s_k = min(2^(k^2), rank_limit)."""
    out = []
    for k in range(1, math.isqrt(depth) + 1):
        s_k = rank_limit if k * k >= 62 else min(1 << (k * k), rank_limit)
        lo = math.floor(s_k - s_k**delta) + 1
        if lo > s_k:
            raise RankIntervalEmpty(f"rank interval empty at level {k} (s_k = {s_k}, delta = {delta})")
        out.append(CantorLevel(k * k, max(lo, 1), s_k))
    return out


def sample_F(z, nu: CylinderMeasure, eps: float, delta: float, count: int, depth: int, *, seed: int = 0,
             rank_limit: int = 100_000) -> FSet:
    """Points agreeing with z off the square positions; at position k^2 the
    digit has nu-mass rank uniform in (s_k - s_k^delta, s_k].

    ``eps`` does not change the sampling at this scale (s_k is fixed to
    2^(k^2) capped at ``rank_limit``); it enters the lower bound
    alpha (1 - eps) delta / (1 + eps) that the samples are checked against.
    """
    if not 0 < delta <= 1 or not 0 < eps < 1:
        raise ValueError("need 0 < delta <= 1 and 0 < eps < 1")
    from genericdim.streams import make_rng

    table = RankTable(nu, rank_limit)
    levels = cantor_levels(depth, delta, rank_limit)
    base = np.asarray(as_stream(z).prefix(depth), dtype=np.int64)
    choices = {lv.position: np.sort(table.letters[lv.lo - 1 : lv.hi]) for lv in levels}
    samples = []
    for c in range(count):
        rng = make_rng(seed, "F", c)
        x = base.copy()
        for lv in levels:
            x[lv.position - 1] = table.letters[int(rng.integers(lv.lo, lv.hi + 1)) - 1]
        samples.append(FSample(ArrayStream(x, name=f"F:{c}"), levels))
    return FSet(samples, CantorMeasure(base, choices, name="F-reference"), levels, table)


class ProductBlockMeasure(CylinderMeasure):
    """mu*[x_1..x_n] = prod over complete blocks of mu_k[block] times
    mu_{j+1}[partial block]; blocks beyond the listed ones repeat the last
    (length, measure) pair."""

    exact = True
    invariant = False

    def __init__(self, lengths: Sequence[int], measures: Sequence[CylinderMeasure], name: str = "ystar"):
        self.lengths = list(lengths)
        self.measures = list(measures)
        self.name = name

    def _blocks(self, n: int):
        start, b = 0, 0
        while start < n:
            j = min(b, len(self.lengths) - 1)
            end = start + self.lengths[j]
            yield start, min(end, n), self.measures[j]
            start, b = end, b + 1

    def _block_at(self, pos: int):
        start, b = 0, 0
        while True:
            j = min(b, len(self.lengths) - 1)
            if pos < start + self.lengths[j]:
                return start, self.measures[j]
            start, b = start + self.lengths[j], b + 1

    def mass(self, w):
        m = 1.0
        for a, b, mu in self._blocks(len(w)):
            m *= mu.mass(tuple(w[a:b]))
            if m == 0:
                return 0.0
        return m

    def child_masses(self, w, N):
        start, mu = self._block_at(len(w))
        piece = tuple(w[start:])
        pm = mu.mass(piece)
        if pm == 0:
            return np.zeros(N)
        return self.mass(w) * mu.child_masses(piece, N) / pm

    def log_prefix_masses(self, x):
        x = np.asarray(x, dtype=np.int64)
        out = np.empty(len(x))
        base = 0.0
        for a, b, mu in self._blocks(len(x)):
            lp = mu.log_prefix_masses(x[a:b])
            out[a:b] = base + lp
            base += lp[-1]
        return out


@dataclass
class YStarSet:
    streams: list[ArrayStream]
    reference: ProductBlockMeasure
    lengths: list[int]
    eps: list[float]


def sample_Ystar(mu: CylinderMeasure, nu: CylinderMeasure, levels: int = 2, count: int = 10, depth: int = 10_000, *,
                 eps_scale: float = 1.0, seed: int = 0, test_depth: int = 3,
                 alphabet_cap: Callable[[int], int] | int | None = None, n_min: int = 64, budget: int = 50,
                 h_rel: float | None = None, workers: int = 1) -> YStarSet:
    """Streams of independent typical words of mu_1, mu_2, ..., mu_J, continued
    with fresh mu_J words, realized to ``depth`` digits.

    Level lengths satisfy n_j >= max(m_j, N_{j-1}^2) where m_j is the
    discovered acceptance length and N_{j-1} the total length of the earlier
    levels. The reference measure is the product of the mu_j over the blocks.
    """
    if h_rel is not None and not math.isfinite(h_rel):
        raise InfiniteRelativeEntropy("h(nu|mu) is infinite; the product construction needs it finite")
    eps = [eps_scale * 4.0**-j for j in range(1, levels + 1)]
    approx, lengths = [], []
    total = 0
    for j in range(1, levels + 1):
        mu_j = markov_approximation(mu, j, _alphabet_cap(mu, j, alphabet_cap))
        letters = np.asarray(mu_j.letters, dtype=np.int64)
        if np.any(nu.letter_masses(int(letters.max()))[letters - 1] <= 0):
            raise SupportMismatchError(f"{nu.name} gives zero mass to a letter charged by {mu.name}")
        m_j = discover_length(mu_j, eps[j - 1], n_min=n_min, seed=seed, key=f"ylen:{j}", depth=test_depth)
        n_j = max(m_j, total**2 if j > 1 else 0)
        approx.append(mu_j)
        lengths.append(n_j)
        total += n_j

    def one(c: int) -> ArrayStream:
        parts, have, b = [], 0, 0
        while have < depth:
            j = min(b, levels - 1)
            w = typical_word(approx[j], lengths[j], eps[j], budget=budget, seed=seed, key=f"y:{c}:{b}",
                             depth=test_depth).word
            parts.append(np.asarray(w, dtype=np.int64))
            have += len(w)
            b += 1
        return ArrayStream(np.concatenate(parts)[:depth], name=f"ystar:{c}")

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            streams = list(pool.map(one, range(count)))
    else:
        streams = [one(c) for c in range(count)]
    return YStarSet(streams, ProductBlockMeasure(lengths, approx), lengths, eps)
