"""Compiled vs pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is run on identical inputs through both backends; outputs are
compared before timing so a speedup is never reported for a wrong answer.
"""

import argparse
import time

import numpy as np

from genericdim.kernels import compiled_backend, python_backend
from genericdim.words import all_words


def cases(rng: np.random.Generator) -> dict:
    digits = rng.integers(1, 5, size=1_000_000).astype(np.int64)
    P = np.array([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.2, 0.5]])
    cum = np.ascontiguousarray(np.cumsum(P, axis=1))
    cum[:, -1] = 1.0 + 1e-12
    nxt = np.ascontiguousarray(np.tile(np.arange(3, dtype=np.int64), (3, 1)))
    return {
        "window_counts k=4 n=1e6": ("window_counts", (digits, 4, 4, len(digits) - 3)),
        "row_window_counts 2^16 words": ("row_window_counts", (np.ascontiguousarray(all_words(16, 2)), 1, 2)),
        "markov_walk n=1e6": ("markov_walk", (cum, nxt, 0, rng.random(1_000_000))),
        "log_continuants n=1e6": ("log_continuants", (np.log(digits.astype(float)),)),
    }


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(np.asarray(a), np.asarray(b), rtol=1e-12, atol=0)


def best_of(fn, args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if compiled_backend is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}")
    for label, (name, kargs) in cases(rng).items():
        py, cy = getattr(python_backend, name), getattr(compiled_backend, name)
        if not _same(py(*kargs), cy(*kargs)):
            raise SystemExit(f"{label}: backends disagree")
        tp, tc = best_of(py, kargs, args.repeat), best_of(cy, kargs, args.repeat)
        print(f"{label:32s} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
