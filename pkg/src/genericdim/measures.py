"""Shift-invariant measures on the full shift over the positive integers.

Every measure is presented through its cylinder masses. ``child_masses`` is
the workhorse: it returns the masses of ``w + (a,)`` for ``a = 1..N`` as one
array, which lets enumeration over Sigma_N^k stay vectorized per prefix.
"""

from __future__ import annotations

import json
import math
from typing import Callable, Iterator, Sequence

import numpy as np

from genericdim.kernels import markov_walk
from genericdim.words import Word, all_words, as_word, format_word, parse_word


class MassRangeError(ValueError):
    """A cylinder mass fell outside [0, 1]."""


class CylinderMeasure:
    """Base class: subclasses implement ``mass`` and usually ``child_masses``."""

    #: letters are confined to 1..alphabet when not None
    alphabet: int | None = None
    #: False for table-backed or truncated measures
    exact: bool = True
    invariant: bool = True
    #: deepest cylinder length the measure can evaluate (None = unbounded)
    max_depth: int | None = None
    name: str = "measure"

    def mass(self, w: Sequence[int]) -> float:
        raise NotImplementedError

    def child_masses(self, w: Sequence[int], N: int) -> np.ndarray:
        w = tuple(w)
        return np.array([self.mass(w + (a,)) for a in range(1, N + 1)], dtype=float)

    def level_masses(self, k: int, N: int) -> np.ndarray:
        """Masses of all of Sigma_N^k in lexicographic order."""
        if k == 0:
            return np.ones(1)
        level = [()]
        masses = np.ones(1)
        for depth in range(k):
            nxt = np.zeros(len(level) * N)
            for i, (w, m) in enumerate(zip(level, masses)):
                if m > 0:
                    nxt[i * N : (i + 1) * N] = self.child_masses(w, N)
            masses = nxt
            if depth + 1 < k:
                level = [w + (a,) for w in level for a in range(1, N + 1)]
        return masses

    def letter_masses(self, N: int) -> np.ndarray:
        return self.child_masses((), N)

    def log_letter_masses(self, N: int) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.letter_masses(N))

    def letter_tail(self, N: int) -> float:
        """Mass of letters above N (the per-level truncation defect)."""
        if self.alphabet is not None and N >= self.alphabet:
            return 0.0
        return max(0.0, 1.0 - math.fsum(self.letter_masses(N)))

    def child_tail(self, w: Sequence[int], N: int) -> float:
        """Mass of the children of ``w`` with last letter above N."""
        return self.mass(w) * self.letter_tail(N)

    def log_prefix_masses(self, x: Sequence[int]) -> np.ndarray:
        """``ln mass(x[:n])`` for n = 1..len(x)."""
        out = np.empty(len(x))
        w: tuple[int, ...] = ()
        for i, d in enumerate(x):
            w = w + (int(d),)
            m = self.mass(w)
            out[i] = math.log(m) if m > 0 else -math.inf
        return out

    def log_masses_batch(self, W: np.ndarray) -> np.ndarray:
        """``ln mass`` of each row of an integer matrix of equal-length words."""
        out = np.empty(len(W))
        for i, row in enumerate(np.asarray(W)):
            m = self.mass(tuple(int(d) for d in row))
            out[i] = math.log(m) if m > 0 else -math.inf
        return out

    def iter_level(self, k: int, N: int) -> Iterator[tuple[Word, np.ndarray]]:
        """Yield ``(prefix, child_masses(prefix, N))`` for every prefix in
        Sigma_N^(k-1) of positive mass. Zero-mass subtrees are skipped."""
        if k < 1:
            raise ValueError("k must be >= 1")
        stack: list[Word] = [()]
        while stack:
            w = stack.pop()
            kids = self.child_masses(w, N)
            if len(w) == k - 1:
                yield w, kids
                continue
            for a in np.nonzero(kids > 0)[0][::-1]:
                stack.append(w + (int(a) + 1,))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} does not support sampling")


# -- Bernoulli -----------------------------------------------------------------


class BernoulliMeasure(CylinderMeasure):
    """Product measure. Either a finite probability vector ``p`` (letters
    1..len(p)) or a vectorized ``letter_mass`` function on the whole of N."""

    def __init__(
        self,
        p: Sequence[float] | None = None,
        *,
        letter_mass: Callable[[np.ndarray], np.ndarray] | None = None,
        log_letter_mass: Callable[[np.ndarray], np.ndarray] | None = None,
        name: str | None = None,
    ):
        if (p is None) == (letter_mass is None and log_letter_mass is None):
            raise ValueError("give exactly one of p or letter_mass")
        if p is not None:
            p = np.asarray(p, dtype=float)
            if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
                raise ValueError(f"not a probability vector: {p}")
            self.p = p
            self.alphabet = len(p)
            self._fn = None
            self._logfn = None
        else:
            self.p = None
            self._fn = letter_mass
            self._logfn = log_letter_mass
        self.name = name or ("bernoulli" if p is not None else "bernoulli-countable")

    @classmethod
    def zeta(cls, s: float = 2.0) -> "BernoulliMeasure":
        """Letter masses n**(-s) / zeta(s); ``zeta(2)`` gives 6/(pi^2 n^2)."""
        from scipy.special import zeta as _zeta

        z = float(_zeta(s))
        return cls(
            letter_mass=lambda n: np.asarray(n, dtype=float) ** (-s) / z,
            log_letter_mass=lambda n: -s * np.log(np.asarray(n, dtype=float)) - math.log(z),
            name=f"zeta:{s:g}",
        )

    def _letters(self, digits: np.ndarray) -> np.ndarray:
        digits = np.asarray(digits, dtype=np.int64)
        if self.p is not None:
            out = np.zeros(digits.shape)
            ok = (digits >= 1) & (digits <= len(self.p))
            out[ok] = self.p[digits[ok] - 1]
            return out
        if self._fn is not None:
            return self._fn(digits)
        return np.exp(self._logfn(digits))

    def _log_letters(self, digits: np.ndarray) -> np.ndarray:
        if self._logfn is not None:
            return self._logfn(np.asarray(digits, dtype=np.int64))
        with np.errstate(divide="ignore"):
            return np.log(self._letters(digits))

    def mass(self, w):
        if len(w) == 0:
            return 1.0
        return float(np.prod(self._letters(np.asarray(w))))

    def child_masses(self, w, N):
        return self.mass(w) * self._letters(np.arange(1, N + 1))

    def level_masses(self, k, N):
        p = self._letters(np.arange(1, N + 1))
        out = np.ones(1)
        for _ in range(k):
            out = np.outer(out, p).ravel()
        return out

    def log_letter_masses(self, N):
        return self._log_letters(np.arange(1, N + 1))

    def log_prefix_masses(self, x):
        return np.cumsum(self._log_letters(np.asarray(x)))

    def log_masses_batch(self, W):
        W = np.asarray(W, dtype=np.int64)
        return self._log_letters(W).sum(axis=1) if W.shape[1] else np.zeros(len(W))

    def sample(self, n, rng):
        if self.p is None:
            raise NotImplementedError("sampling needs a finite probability vector")
        return rng.choice(len(self.p), size=n, p=self.p).astype(np.int64) + 1

    def entropy(self) -> float:
        if self.p is None:
            raise NotImplementedError
        p = self.p[self.p > 0]
        return float(-(p * np.log(p)).sum())


# -- Markov ----------------------------------------------------------------------


def stationary_vector(P: np.ndarray) -> np.ndarray:
    """Left Perron vector of a row-stochastic matrix, normalized to sum 1."""
    S = P.shape[0]
    A = np.vstack([P.T - np.eye(S), np.ones((1, S))])
    b = np.zeros(S + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


class MarkovMeasure(CylinderMeasure):
    """Stationary l-step Markov measure on a finite sub-alphabet.

    States are words of length ``order``; a transition from state ``s`` to
    state ``t`` is allowed only when ``t`` is ``s`` shifted by one letter.
    """

    def __init__(
        self,
        order: int,
        states: Sequence[Sequence[int]],
        transitions: np.ndarray,
        stationary: np.ndarray | None = None,
        *,
        name: str = "markov",
        check: bool = True,
    ):
        if order < 1:
            raise ValueError("order must be >= 1")
        self.order = order
        self.states = [as_word(s) for s in states]
        if any(len(s) != order for s in self.states):
            raise ValueError("every state must have length `order`")
        self.index = {s: i for i, s in enumerate(self.states)}
        if len(self.index) != len(self.states):
            raise ValueError("duplicate states")
        P = np.asarray(transitions, dtype=float)
        S = len(self.states)
        if P.shape != (S, S):
            raise ValueError(f"transition matrix must be {S}x{S}")
        self.letters = tuple(sorted({d for s in self.states for d in s}))
        self.alphabet = max(self.letters)
        self.letter_index = {a: i for i, a in enumerate(self.letters)}
        m = len(self.letters)
        self.step_prob = np.zeros((S, m))
        self.step_next = np.zeros((S, m), dtype=np.int64)
        for i, s in enumerate(self.states):
            for j in np.nonzero(P[i])[0]:
                t = self.states[j]
                if t[:-1] != s[1:]:
                    raise ValueError(f"transition {s} -> {t} is not a shift")
                a = self.letter_index[t[-1]]
                self.step_prob[i, a] = P[i, j]
                self.step_next[i, a] = j
        self.P = P
        if check and np.max(np.abs(P.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("transition rows must sum to 1")
        self.pi = stationary_vector(P) if stationary is None else np.asarray(stationary, dtype=float)
        if check:
            resid = np.max(np.abs(self.pi @ P - self.pi))
            if resid > 1e-10 or abs(self.pi.sum() - 1.0) > 1e-10:
                raise ValueError(f"stationary vector not invariant (residual {resid:.2e})")
        self._prefix: dict[Word, float] = {}
        for s, p in zip(self.states, self.pi):
            for n in range(order + 1):
                self._prefix[s[:n]] = self._prefix.get(s[:n], 0.0) + p
        self.name = name

    @classmethod
    def from_matrix(cls, P, letters: Sequence[int] | None = None, stationary=None, **kw):
        """Order-1 chain; ``P[i, j]`` is the probability of letter j after letter i."""
        P = np.asarray(P, dtype=float)
        letters = tuple(range(1, P.shape[0] + 1)) if letters is None else tuple(letters)
        return cls(1, [(a,) for a in letters], P, stationary, **kw)

    @classmethod
    def bernoulli(cls, p: Sequence[float], **kw) -> "MarkovMeasure":
        """Order-1 chain with identical rows (how the j = 1 approximation is stored)."""
        p = np.asarray(p, dtype=float)
        return cls.from_matrix(np.tile(p, (len(p), 1)), stationary=p, **kw)

    def _state_of(self, w: Sequence[int]) -> int | None:
        return self.index.get(tuple(w[-self.order :]))

    def mass(self, w):
        w = tuple(w)
        n = len(w)
        if n <= self.order:
            return self._prefix.get(w, 0.0)
        s = self.index.get(w[: self.order])
        if s is None:
            return 0.0
        m = self.pi[s]
        for d in w[self.order :]:
            a = self.letter_index.get(d)
            if a is None:
                return 0.0
            m *= self.step_prob[s, a]
            if m == 0.0:
                return 0.0
            s = self.step_next[s, a]
        return float(m)

    def child_masses(self, w, N):
        w = tuple(w)
        out = np.zeros(N)
        if len(w) < self.order:
            for a in self.letters:
                if a <= N:
                    out[a - 1] = self._prefix.get(w + (a,), 0.0)
            return out
        m = self.mass(w)
        if m == 0.0:
            return out
        s = self._state_of(w)
        for i, a in enumerate(self.letters):
            if a <= N:
                out[a - 1] = m * self.step_prob[s, i]
        return out

    def _code_table(self, N: int) -> np.ndarray:
        """Next-letter probabilities indexed by the code of the last ``order`` letters."""
        l = self.order
        Q = np.zeros((N**l, N))
        for s, i in self.index.items():
            if max(s) > N:
                continue
            code = 0
            for d in s:
                code = code * N + d - 1
            for j, a in enumerate(self.letters):
                if a <= N:
                    Q[code, a - 1] = self.step_prob[i, j]
        return Q

    def level_masses(self, k, N):
        l = self.order
        if k <= l:
            return super().level_masses(k, N)
        masses = super().level_masses(l, N)
        Q = self._code_table(N)
        top = N**l
        for _ in range(k - l):
            codes = np.arange(len(masses)) % top
            masses = (masses[:, None] * Q[codes]).ravel()
        return masses

    def log_prefix_masses(self, x):
        x = np.asarray(x, dtype=np.int64)
        n = len(x)
        l = self.order
        out = np.empty(n)
        head = min(n, l)
        for i in range(head):
            m = self._prefix.get(tuple(int(d) for d in x[: i + 1]), 0.0)
            out[i] = math.log(m) if m > 0 else -math.inf
        if n <= l:
            return out
        N = self.alphabet
        if x.max() > N or x.min() < 1:
            return super().log_prefix_masses(x)
        lookup = np.full(N**l, -1, dtype=np.int64)
        for s, i in self.index.items():
            code = 0
            for d in s:
                code = code * N + d - 1
            lookup[code] = i
        windows = np.lib.stride_tricks.sliding_window_view(x[:-1] - 1, l)
        codes = (windows * (N ** np.arange(l - 1, -1, -1))).sum(axis=1)
        states = lookup[codes]
        letter_idx = np.full(N + 1, -1, dtype=np.int64)
        for a, i in self.letter_index.items():
            letter_idx[a] = i
        nxt = letter_idx[x[l:]]
        bad = (states < 0) | (nxt < 0)
        with np.errstate(divide="ignore"):
            steps = np.where(bad, -np.inf, np.log(self.step_prob[np.maximum(states, 0), np.maximum(nxt, 0)]))
        out[l:] = out[l - 1] + np.cumsum(steps)
        return out

    def log_masses_batch(self, W):
        W = np.asarray(W, dtype=np.int64)
        m, k = W.shape
        l = self.order
        N = self.alphabet
        if k <= l or W.min(initial=1) < 1 or W.max(initial=1) > N:
            return super().log_masses_batch(W)
        pw = N ** np.arange(l - 1, -1, -1, dtype=np.int64)
        log_pi = np.full(N**l, -np.inf)
        logQ = np.full((N**l, N), -np.inf)
        with np.errstate(divide="ignore"):
            for s, i in self.index.items():
                code = int(np.dot(np.asarray(s) - 1, pw))
                log_pi[code] = math.log(self.pi[i]) if self.pi[i] > 0 else -math.inf
                for j, a in enumerate(self.letters):
                    logQ[code, a - 1] = np.log(self.step_prob[i, j])
        out = log_pi[(W[:, :l] - 1) @ pw]
        for j in range(k - l):
            out = out + logQ[(W[:, j : j + l] - 1) @ pw, W[:, j + l] - 1]
        return out

    def sample(self, n, rng):
        l = self.order
        s0 = int(rng.choice(len(self.states), p=self.pi))
        head = np.array(self.states[s0], dtype=np.int64)
        if n <= l:
            return head[:n].copy()
        cum = np.cumsum(self.step_prob, axis=1)
        u = rng.random(n - l) * cum[:, -1].min()
        idx, _ = markov_walk(cum, self.step_next, s0, u)
        letters = np.asarray(self.letters, dtype=np.int64)
        return np.concatenate([head, letters[idx]])

    def transition_graph_primitive(self) -> bool:
        """Primitivity of the transition support (Wielandt bound on the exponent)."""
        S = len(self.states)
        A = (self.P > 0).astype(float)
        support = self.pi > 0
        A = A[np.ix_(support, support)]
        S = A.shape[0]
        if S == 0:
            return False
        M = A.copy()
        for _ in range((S - 1) ** 2 + 1):
            if np.all(M > 0):
                return True
            M = np.minimum(M @ A, 1.0)
        return bool(np.all(M > 0))

    def to_dict(self) -> dict:
        return {
            "kind": "markov",
            "order": self.order,
            "states": [format_word(s) for s in self.states],
            "transitions": self.P.ravel().tolist(),
            "stationary": self.pi.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MarkovMeasure":
        states = [parse_word(s) for s in d["states"]]
        S = len(states)
        P = np.asarray(d["transitions"], dtype=float).reshape(S, S)
        return cls(int(d["order"]), states, P, np.asarray(d["stationary"], dtype=float))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "MarkovMeasure":
        return cls.from_dict(json.loads(text))


def entropy_markov(mu: MarkovMeasure) -> float:
    """Exact entropy: sum_s pi_s * H(step distribution of s)."""
    P = mu.step_prob
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, -P * np.log(P), 0.0)
    return float(mu.pi @ terms.sum(axis=1))


# -- periodic orbits -------------------------------------------------------------


class PeriodicOrbitMeasure(CylinderMeasure):
    """Uniform measure on the orbit of ``w^infinity``."""

    def __init__(self, w: Sequence[int]):
        self.word = as_word(w)
        if not self.word:
            raise ValueError("period word must be nonempty")
        self.period = len(self.word)
        self.alphabet = max(self.word)
        self.name = f"periodic:{format_word(self.word)}"

    def _rotation_digit(self, start: int, offset: int) -> int:
        return self.word[(start + offset) % self.period]

    def mass(self, w):
        w = tuple(w)
        hits = 0
        for i in range(self.period):
            if all(self._rotation_digit(i, t) == d for t, d in enumerate(w)):
                hits += 1
        return hits / self.period

    def child_masses(self, w, N):
        w = tuple(w)
        out = np.zeros(N)
        n = len(w)
        for i in range(self.period):
            if all(self._rotation_digit(i, t) == d for t, d in enumerate(w)):
                a = self._rotation_digit(i, n)
                if a <= N:
                    out[a - 1] += 1.0 / self.period
        return out

    def log_prefix_masses(self, x):
        x = np.asarray(x, dtype=np.int64)
        out = np.full(len(x), -np.inf)
        for i in range(self.period):
            rot = np.array([self._rotation_digit(i, t) for t in range(len(x))]) if len(x) else x
            match = np.cumprod(rot == x).astype(bool)
            out[match] = np.logaddexp(out[match], -math.log(self.period))
        return out

    def log_masses_batch(self, W):
        W = np.asarray(W, dtype=np.int64)
        k = W.shape[1]
        hits = np.zeros(len(W))
        for i in range(self.period):
            rot = np.array([self._rotation_digit(i, t) for t in range(k)], dtype=np.int64)
            hits += np.all(W == rot, axis=1)
        with np.errstate(divide="ignore"):
            return np.log(hits / self.period)

    def as_markov(self) -> MarkovMeasure:
        """Deterministic chain whose states are the rotations of the period word."""
        p = self.period
        rots = []
        for i in range(p):
            r = self.word[i:] + self.word[:i]
            if r not in rots:
                rots.append(r)
        S = len(rots)
        P = np.zeros((S, S))
        for i, r in enumerate(rots):
            P[i, rots.index(r[1:] + r[:1])] = 1.0
        return MarkovMeasure(p, rots, P, np.full(S, 1.0 / S), name=self.name)

    def sample(self, n, rng):
        start = int(rng.integers(self.period))
        return np.array([self._rotation_digit(start, t) for t in range(n)], dtype=np.int64)


# -- hidden Markov (deterministic emission) ---------------------------------------


class HiddenMarkovMeasure(CylinderMeasure):
    """Image of a stationary Markov chain under a letter-valued state map.

    Such measures are shift-invariant but in general not Markov of any finite
    order, which makes them the natural test bed for Markov approximation.
    """

    def __init__(self, P, emission: Sequence[int], name: str = "hidden-markov"):
        self.P = np.asarray(P, dtype=float)
        self.emission = np.asarray(emission, dtype=np.int64)
        if self.P.shape[0] != len(self.emission):
            raise ValueError("one emitted letter per hidden state")
        self.pi = stationary_vector(self.P)
        self.alphabet = int(self.emission.max())
        self.name = name

    def _forward(self, w) -> np.ndarray | None:
        alpha = None
        for d in w:
            base = self.pi if alpha is None else alpha @ self.P
            alpha = np.where(self.emission == d, base, 0.0)
            if not alpha.any():
                return alpha
        return alpha

    def mass(self, w):
        if len(w) == 0:
            return 1.0
        return float(self._forward(w).sum())

    def child_masses(self, w, N):
        alpha = self._forward(w)
        nxt = self.pi if alpha is None else alpha @ self.P
        out = np.zeros(N)
        ok = self.emission <= N
        np.add.at(out, self.emission[ok] - 1, nxt[ok])
        return out

    def sample(self, n, rng):
        chain = MarkovMeasure.from_matrix(self.P, stationary=self.pi, check=False)
        hidden = chain.sample(n, rng)
        return self.emission[hidden - 1]


# -- tables and mixtures ------------------------------------------------------------


class TableMeasure(CylinderMeasure):
    """Cylinder masses read from a table up to a fixed depth.

    ``defects[k]`` is 1 minus the tabulated mass at depth k (mass outside the
    tabulated alphabet); downstream sums report it.
    """

    exact = False

    def __init__(self, table: dict, depth: int, defects: dict | None = None, invariant: bool = True,
                 name: str = "table"):
        self.table = {as_word(w): float(m) for w, m in table.items()}
        self.depth = depth
        self.max_depth = depth
        self.invariant = invariant
        self.alphabet = max((max(w) for w in self.table if w), default=1)
        self.defects = dict(defects or {})
        self.name = name

    @classmethod
    def from_measure(cls, mu: CylinderMeasure, depth: int, N: int, name: str | None = None) -> "TableMeasure":
        table: dict[Word, float] = {}
        defects = {}
        frontier: list[Word] = [()]
        for k in range(1, depth + 1):
            nxt = []
            total = 0.0
            for w in frontier:
                kids = mu.child_masses(w, N)
                for a in np.nonzero(kids > 0)[0]:
                    v = w + (int(a) + 1,)
                    table[v] = float(kids[a])
                    total += kids[a]
                    nxt.append(v)
            defects[k] = max(0.0, 1.0 - float(total))
            frontier = nxt
        return cls(table, depth, defects, invariant=mu.invariant, name=name or f"table({mu.name})")

    def mass(self, w):
        w = tuple(w)
        if len(w) == 0:
            return 1.0
        if len(w) > self.depth:
            raise ValueError(f"table depth is {self.depth}, asked for length {len(w)}")
        return self.table.get(w, 0.0)

    def dumps(self) -> str:
        lines = [f"# depth={self.depth}"]
        for k, v in sorted(self.defects.items()):
            lines.append(f"# defect[{k}]={float(v)!r}")
        for w in sorted(self.table, key=lambda w: (len(w), w)):
            lines.append(f"{format_word(w)}\t{self.table[w]!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "TableMeasure":
        table = {}
        depth = 0
        defects = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                if key == "depth":
                    depth = int(val)
                elif key.startswith("defect["):
                    defects[int(key[7:-1])] = float(val)
                continue
            w, m = line.split("\t")
            table[parse_word(w)] = float(m)
        return cls(table, depth, defects)


class MixtureMeasure(CylinderMeasure):
    """Convex combination sum_i c_i mu_i."""

    def __init__(self, weights: Sequence[float], components: Sequence[CylinderMeasure]):
        self.weights = np.asarray(weights, dtype=float)
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must be a probability vector")
        self.components = list(components)
        alph = [c.alphabet for c in self.components]
        self.alphabet = None if any(a is None for a in alph) else max(alph)
        self.exact = all(c.exact for c in self.components)
        self.invariant = all(c.invariant for c in self.components)
        self.name = "mixture"

    def mass(self, w):
        return float(sum(c * m.mass(w) for c, m in zip(self.weights, self.components)))

    def child_masses(self, w, N):
        return sum(c * m.child_masses(w, N) for c, m in zip(self.weights, self.components))

    def child_tail(self, w, N):
        return sum(c * m.child_tail(w, N) for c, m in zip(self.weights, self.components))


def full_support_mix(mu: CylinderMeasure, eps: float) -> MixtureMeasure:
    """(1 - eps) mu + eps * Bernoulli(6/(pi^2 n^2)): every cylinder gets positive mass."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return MixtureMeasure([1.0 - eps, eps], [mu, BernoulliMeasure.zeta(2.0)])


# -- entropy -------------------------------------------------------------------------


TABLE_LIMIT = 1 << 21


def level_table(mu: CylinderMeasure, k: int, N: int, limit: int = TABLE_LIMIT):
    """(words, log masses) of the mu-positive words in Sigma_N^k, or None when
    the words over mu's letters are too many to tabulate at once."""
    letters = np.nonzero(mu.letter_masses(N) > 0)[0] + 1
    if len(letters) == 0:
        return np.zeros((0, k), dtype=np.int64), np.zeros(0)
    if float(len(letters)) ** k > limit:
        return None
    W = letters[all_words(k, len(letters)) - 1]
    lm = mu.log_masses_batch(W)
    keep = np.isfinite(lm)
    return W[keep], lm[keep]


def block_entropy(mu: CylinderMeasure, k: int, N: int) -> tuple[float, float]:
    """(H_k, defect): H_k = sum over Sigma_N^k of -m ln m, defect = 1 - sum m."""
    if k == 0:
        return 0.0, 0.0
    table = level_table(mu, k, N)
    if table is not None:
        lm = table[1]
        m = np.exp(lm)
        return float(-(m * lm).sum()), max(0.0, 1.0 - float(m.sum()))
    H = 0.0
    total = 0.0
    for _, kids in mu.iter_level(k, N):
        if np.any(kids < -1e-15):
            raise MassRangeError("negative cylinder mass")
        m = kids[kids > 0]
        H += float(-(m * np.log(m)).sum())
        total += float(m.sum())
    return H, max(0.0, 1.0 - total)


def entropy_cylinder(mu: CylinderMeasure, k: int, N: int) -> tuple[float, float]:
    """(1/k) * sum_{w in Sigma_N^k} -mu[w] ln mu[w], with the mass defect."""
    H, defect = block_entropy(mu, k, N)
    return H / k, defect


def entropy_conditional(mu: CylinderMeasure, k: int, N: int) -> float:
    """H_k - H_(k-1): entropy of the k-th letter given the previous k-1."""
    return block_entropy(mu, k, N)[0] - block_entropy(mu, k - 1, N)[0]


def consistency_defect(mu: CylinderMeasure, k: int, N: int) -> float:
    """max over words of length < k of |mu[w] - sum_a mu[wa]| minus the declared child tail."""
    worst = 0.0
    for n in range(k):
        for w in map(tuple, all_words(n, N)):
            gap = abs(mu.mass(w) - float(mu.child_masses(w, N).sum())) - mu.child_tail(w, N)
            worst = max(worst, gap)
    return worst


def invariance_defect(mu: CylinderMeasure, k: int, N: int) -> float:
    """max over words of length <= k of |mu[w] - sum_a mu[aw]| minus the declared tail."""
    worst = 0.0
    tail = mu.letter_tail(N)
    for n in range(1, k + 1):
        for w in map(tuple, all_words(n, N)):
            pre = math.fsum(mu.mass((a,) + w) for a in range(1, N + 1))
            worst = max(worst, abs(mu.mass(w) - pre) - tail)
    return worst


# -- Markov approximation ------------------------------------------------------------


class InconsistentMeasureError(ValueError):
    pass


def _support_level(mu: CylinderMeasure, k: int, N: int) -> Iterator[tuple[Word, np.ndarray]]:
    """Like ``iter_level``, but every zero-mass child met on the way must have
    no positive extension of length <= k."""
    stack: list[Word] = [()]
    while stack:
        w = stack.pop()
        kids = mu.child_masses(w, N)
        if len(w) == k - 1:
            yield w, kids
            continue
        for a in range(N, 0, -1):
            v = w + (a,)
            if kids[a - 1] > 0:
                stack.append(v)
            elif len(v) < k and np.any(mu.child_masses(v, N) > 0):
                raise InconsistentMeasureError(f"zero mass prefix {v} has positive extensions")


def markov_approximation(mu: CylinderMeasure, j: int, N: int) -> MarkovMeasure:
    """The Markov measure of order max(j-1, 1) that agrees with ``mu`` on all
    cylinders of length <= j (letters capped at N)."""
    if j < 1:
        raise ValueError("j must be >= 1")
    if j == 1:
        p = mu.letter_masses(N)
        support = np.nonzero(p > 0)[0]
        p = p[support] / p[support].sum()
        letters = tuple(int(a) + 1 for a in support)
        P = np.tile(p, (len(p), 1))
        return MarkovMeasure.from_matrix(P, letters=letters, stationary=p, name=f"markov-approx-1({mu.name})")
    l = j - 1
    states: list[Word] = []
    rows: list[np.ndarray] = []
    masses: list[float] = []
    for w, kids in _support_level(mu, j, N):
        m = mu.mass(w)
        states.append(w)
        rows.append(kids / m)
        masses.append(m)
    index = {s: i for i, s in enumerate(states)}
    S = len(states)
    P = np.zeros((S, S))
    for i, (s, row) in enumerate(zip(states, rows)):
        for a in np.nonzero(row > 0)[0]:
            t = s[1:] + (int(a) + 1,)
            if t not in index:
                raise InconsistentMeasureError(f"word {s + (int(a) + 1,)} has positive mass but its suffix {t} has none")
            P[i, index[t]] = row[a]
    P /= P.sum(axis=1, keepdims=True)
    pi = np.asarray(masses)
    pi /= pi.sum()
    return MarkovMeasure(l, states, P, pi, name=f"markov-approx-{j}({mu.name})")
