"""Deterministic, replayable digit streams.

A stream is an immutable description of an infinite (or finite) digit
sequence. ``prefix(n)`` regenerates the first n digits from scratch, and
``chunks`` pulls them in bounded pieces. Random streams draw from
counter-keyed generators, so the digits depend only on (seed, key, index).
"""

from __future__ import annotations

import zlib
from typing import Iterator, Sequence

import numpy as np

from genericdim.kernels import markov_walk
from genericdim.words import as_word, format_word

CHUNK = 1 << 16


class StreamExhausted(ValueError):
    """A finite stream was asked for more digits than it holds."""


def make_rng(seed: int, *key: int | str) -> np.random.Generator:
    """Generator keyed by (seed, key...); string keys are hashed with CRC32."""
    spawn = tuple(zlib.crc32(k.encode()) if isinstance(k, str) else int(k) for k in key)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=spawn))


class DigitStream:
    name = "stream"
    length: int | None = None  # None = infinite

    def prefix(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def chunks(self, n: int, size: int = CHUNK) -> Iterator[np.ndarray]:
        """The first n digits in pieces of at most ``size``."""
        data = self.prefix(n)
        for i in range(0, n, size):
            yield data[i : i + size]

    def _check(self, n: int) -> None:
        if self.length is not None and n > self.length:
            raise StreamExhausted(f"{self.name} holds {self.length} digits, asked for {n}")

    def provenance(self) -> dict:
        return {"stream": self.name}


class ArrayStream(DigitStream):
    def __init__(self, digits: Sequence[int], name: str = "array"):
        self.digits = np.ascontiguousarray(digits, dtype=np.int64)
        if self.digits.size and self.digits.min() < 1:
            raise ValueError("digits must be >= 1")
        self.length = len(self.digits)
        self.name = name

    def prefix(self, n):
        self._check(n)
        return self.digits[:n].copy()


class PeriodicStream(DigitStream):
    """w w w ... (``1^infinity`` is ``PeriodicStream((1,))``)."""

    def __init__(self, word: Sequence[int]):
        self.word = np.asarray(as_word(word), dtype=np.int64)
        if not len(self.word):
            raise ValueError("empty period word")
        self.name = f"periodic:{format_word(self.word)}"

    def prefix(self, n):
        reps = -(-n // len(self.word))
        return np.tile(self.word, reps)[:n]


class MarkovStream(DigitStream):
    """Sample path of a MarkovMeasure, generated in fixed-size keyed chunks."""

    def __init__(self, mu, seed: int, key: int | str = 0, chunk: int = CHUNK, emission: np.ndarray | None = None):
        self.mu = mu
        self.seed = int(seed)
        self.key = key
        self.chunk = chunk
        self.emission = emission
        self.name = f"sample:{mu.name}"
        self._cum = np.ascontiguousarray(np.cumsum(mu.step_prob, axis=1))
        self._cum[:, -1] = 1.0 + 1e-12
        self._next = np.ascontiguousarray(mu.step_next)
        self._letters = np.asarray(mu.letters, dtype=np.int64)

    def chunks(self, n, size=None):
        """Yields the initial state block, then one block per internal chunk."""
        if n <= 0:
            return
        mu = self.mu
        rng0 = make_rng(self.seed, self.key, "init")
        s = int(rng0.choice(len(mu.states), p=mu.pi))
        head = np.asarray(mu.states[s], dtype=np.int64)[:n]
        yield self._emit(head)
        produced = len(head)
        c = 0
        while produced < n:
            take = min(self.chunk, n - produced)
            u = make_rng(self.seed, self.key, c).random(self.chunk)[:take]
            idx, s = markov_walk(self._cum, self._next, s, u)
            yield self._emit(self._letters[idx])
            produced += take
            c += 1

    def _emit(self, block):
        return block if self.emission is None else self.emission[block - 1]

    def prefix(self, n):
        parts = list(self.chunks(n))
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    def provenance(self):
        return {"stream": self.name, "seed": self.seed, "key": str(self.key)}


def sample_stream(mu, seed: int, key: int | str = 0) -> DigitStream:
    """Replayable sample path of any measure with a finite Markov presentation."""
    from genericdim.measures import BernoulliMeasure, HiddenMarkovMeasure, MarkovMeasure, PeriodicOrbitMeasure

    if isinstance(mu, MarkovMeasure):
        return MarkovStream(mu, seed, key)
    if isinstance(mu, BernoulliMeasure) and mu.p is not None:
        support = np.nonzero(mu.p > 0)[0]
        p = mu.p[support]
        chain = MarkovMeasure.bernoulli(p / p.sum())
        return MarkovStream(chain, seed, key, emission=(support + 1).astype(np.int64))
    if isinstance(mu, PeriodicOrbitMeasure):
        return MarkovStream(mu.as_markov(), seed, key)
    if isinstance(mu, HiddenMarkovMeasure):
        chain = MarkovMeasure.from_matrix(mu.P, stationary=mu.pi, check=False)
        return MarkovStream(chain, seed, key, emission=mu.emission)
    raise TypeError(f"no sampler for {type(mu).__name__}")


def as_stream(x) -> DigitStream:
    if isinstance(x, DigitStream):
        return x
    return ArrayStream(x)


def stream_to_text(stream: DigitStream, n: int, header: dict | None = None) -> str:
    meta = dict(stream.provenance())
    meta.update(header or {})
    meta["length"] = n
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    lines.extend(str(int(d)) for d in stream.prefix(n))
    return "\n".join(lines) + "\n"


def stream_from_text(text: str) -> tuple[ArrayStream, dict]:
    meta = {}
    digits = []
    for line in text.splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].partition(":")
            meta[k.strip()] = v.strip()
        elif line.strip():
            digits.append(int(line))
    return ArrayStream(digits, name=meta.get("stream", "array")), meta
