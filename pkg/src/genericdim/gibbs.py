"""Potentials, truncated transfer operators and their Gibbs measures.

A potential is evaluated on a finite word by extending the word with its last
digit repeated forever (the canonical tail). The depth-d transfer matrix on
d-blocks over {1..N} has entries

    M[u -> u[1:] c] = exp(phi(u c c c ...))

and its Perron data (lambda, l, r) define a stationary d-step Markov measure

    P(u -> v) = M[u -> v] r(v) / (lambda r(u)),    pi(u) = l(u) r(u) / <l, r>,

which is exactly consistent and shift-invariant on Sigma_N. ``ln lambda`` is
the truncated pressure estimate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from genericdim.measures import CylinderMeasure
from genericdim.words import all_words, as_word, word_code


class ConvergenceError(RuntimeError):
    """Power iteration did not converge within its budget."""


class NonFinitePotentialError(ValueError):
    pass


class DigitAboveCapError(ValueError):
    pass


# -- potentials -------------------------------------------------------------------


class Potential:
    """phi evaluated on cylinder representatives ``w + (w[-1],) * inf``."""

    id = "potential"
    #: number of leading digits phi depends on (None: depends on the whole tail)
    depth: int | None = None

    @property
    def params(self) -> dict:
        return {}

    def evaluate_batch(self, W: np.ndarray) -> np.ndarray:
        """phi on each row of an integer matrix (rows = equal-length words)."""
        raise NotImplementedError

    def evaluate(self, w: Sequence[int]) -> float:
        w = as_word(w)
        if not w:
            raise ValueError("potential needs a nonempty word")
        return float(self.evaluate_batch(np.asarray([w], dtype=np.int64))[0])

    def variation(self, n: int) -> float:
        """Upper bound for sup |phi(x) - phi(y)| over x, y sharing n leading digits."""
        raise NotImplementedError

    def variation_sum(self, n: int) -> float:
        return math.fsum(self.variation(m) for m in range(1, n + 1))

    def to_dict(self) -> dict:
        return {"id": self.id, **self.params}


class ConstantPotential(Potential):
    id = "constant"
    depth = 0

    def __init__(self, c: float):
        self.c = float(c)

    @property
    def params(self):
        return {"c": self.c}

    def evaluate_batch(self, W):
        return np.full(len(W), self.c)

    def variation(self, n):
        return 0.0


class LocallyConstantPotential(Potential):
    """phi(x) = f(x_1). ``values`` is the finite table f(1..m) (letters beyond
    m get -inf, i.e. are forbidden) or a vectorized function of the digit."""

    id = "locally_constant"
    depth = 1

    def __init__(self, values: Sequence[float] | None = None, fn: Callable[[np.ndarray], np.ndarray] | None = None):
        if (values is None) == (fn is None):
            raise ValueError("give exactly one of values or fn")
        self.values = None if values is None else np.asarray(values, dtype=float)
        self.fn = fn

    @property
    def params(self):
        if self.values is None:
            raise ValueError("function-backed potentials are not serializable")
        return {"values": self.values.tolist()}

    def letter_values(self, N: int) -> np.ndarray:
        digits = np.arange(1, N + 1)
        return self._f(digits)

    def _f(self, digits: np.ndarray) -> np.ndarray:
        if self.fn is not None:
            return np.asarray(self.fn(digits), dtype=float)
        out = np.full(digits.shape, -np.inf)
        ok = digits <= len(self.values)
        out[ok] = self.values[digits[ok] - 1]
        return out

    def evaluate_batch(self, W):
        return self._f(np.asarray(W)[:, 0])

    def variation(self, n):
        return 0.0


class BernoulliPotential(LocallyConstantPotential):
    """phi(x) = ln p_{x_1}."""

    id = "bernoulli"

    def __init__(self, p: Sequence[float]):
        p = np.asarray(p, dtype=float)
        if np.any(p <= 0):
            raise ValueError("Bernoulli potential needs positive weights")
        self.p = p
        super().__init__(values=np.log(p))

    @property
    def params(self):
        return {"p": self.p.tolist()}


def _golden_tail(c: np.ndarray) -> np.ndarray:
    """[0; c, c, c, ...] = (sqrt(c^2 + 4) - c) / 2, written to avoid cancellation."""
    c = np.asarray(c, dtype=float)
    return 2.0 / (np.sqrt(c * c + 4.0) + c)


def fibonacci(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


class GaussPotential(Potential):
    """phi_s(x) = 2 s ln kappa(x), kappa(a_1 a_2 ...) = [0; a_1, a_2, ...].

    With the canonical tail the word w = (a_1..a_n) represents
    [0; a_1, ..., a_n + y] where y = [0; a_n, a_n, ...].
    """

    id = "gauss"

    def __init__(self, s: float = 1.0):
        if not s > 0.5:
            raise ValueError(f"s must exceed 1/2 (pressure is infinite for s <= 1/2), got {s}")
        self.s = float(s)

    @property
    def params(self):
        return {"s": self.s}

    def tail_coordinate(self, c: np.ndarray) -> np.ndarray:
        return _golden_tail(c)

    coordinate_domain = (0.0, float(_golden_tail(1)))

    def eval_coordinate(self, prefix: np.ndarray, y: np.ndarray | float) -> np.ndarray:
        """phi on words ``prefix`` (rows) followed by a tail with coordinate y."""
        prefix = np.asarray(prefix)
        x = np.broadcast_to(np.asarray(y, dtype=float), (prefix.shape[0],)).copy()
        for j in range(prefix.shape[1] - 1, -1, -1):
            x = 1.0 / (prefix[:, j] + x)
        return 2.0 * self.s * np.log(x)

    def evaluate_batch(self, W):
        W = np.asarray(W, dtype=np.int64)
        if W.size and W.min() < 1:
            raise ValueError("digits must be >= 1")
        return self.eval_coordinate(W, self.tail_coordinate(W[:, -1]))

    def variation(self, n):
        if n < 1:
            raise ValueError("n >= 1")
        if n == 1:
            return 2.0 * self.s * math.log(2.0)
        return 2.0 * self.s / (fibonacci(n) * fibonacci(n + 1))

    def variation_total(self) -> float:
        """Closed-form-ish bound for sum_{n>=2} var_n (series converges geometrically)."""
        return math.fsum(self.variation(n) for n in range(2, 80))


class ShiftedPotential(Potential):
    """phi - c, used to normalize pressure to zero."""

    def __init__(self, base: Potential, shift: float):
        self.base = base
        self.shift = float(shift)
        self.depth = base.depth
        self.id = base.id

    @property
    def params(self):
        return {**self.base.params, "shift": self.shift}

    def evaluate_batch(self, W):
        return self.base.evaluate_batch(W) - self.shift

    def variation(self, n):
        return self.base.variation(n)


POTENTIALS = {
    "gauss": lambda d: GaussPotential(d["s"]),
    "bernoulli": lambda d: BernoulliPotential(d["p"]),
    "locally_constant": lambda d: LocallyConstantPotential(values=d["values"]),
    "constant": lambda d: ConstantPotential(d["c"]),
}


def potential_from_dict(d: dict) -> Potential:
    try:
        base = POTENTIALS[d["id"]](d)
    except KeyError as exc:
        raise ValueError(f"unknown potential {d.get('id')!r}") from exc
    return ShiftedPotential(base, d["shift"]) if "shift" in d else base


def birkhoff_sum(phi: Potential, w: Sequence[int]) -> tuple[float, float]:
    """(S_n phi at the representative of w, error bound sum_{m<=n} var_m)."""
    w = as_word(w)
    n = len(w)
    if n == 0:
        return 0.0, 0.0
    total = math.fsum(phi.evaluate(w[i:]) for i in range(n))
    return total, phi.variation_sum(n)


def birkhoff_sums_batch(phi: Potential, W: np.ndarray) -> np.ndarray:
    """S_n phi for every row of W (all suffixes, canonical tails)."""
    W = np.asarray(W, dtype=np.int64)
    out = np.zeros(W.shape[0])
    for i in range(W.shape[1]):
        out += phi.evaluate_batch(W[:, i:])
    return out


# -- transfer operator --------------------------------------------------------------

DENSE_ENTRIES = 1 << 22
CHEB_NODES = 16


def _cheb_interpolation(y: np.ndarray, lo: float, hi: float, K: int) -> tuple[np.ndarray, np.ndarray]:
    """First-kind Chebyshev nodes on [lo, hi] and the barycentric matrix L[c, k] = ell_k(y_c)."""
    theta = (2 * np.arange(K) + 1) * np.pi / (2 * K)
    nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(theta)
    bw = (-1.0) ** np.arange(K) * np.sin(theta)
    diff = y[:, None] - nodes[None, :]
    exact = diff == 0
    diff[exact] = 1.0
    terms = bw / diff
    L = terms / terms.sum(axis=1, keepdims=True)
    rows = exact.any(axis=1)
    L[rows] = exact[rows].astype(float)
    return nodes, L


class _DenseOperator:
    def __init__(self, phi: Potential, N: int, d: int):
        words = all_words(d + 1, N)
        vals = phi.evaluate_batch(words)
        if not np.all(np.isfinite(vals) | (vals == -np.inf)) or np.any(vals == np.inf):
            raise NonFinitePotentialError("potential is not finite on the truncated grid")
        self.W = np.exp(vals).reshape(N, N ** (d - 1), N)

    def right(self, r: np.ndarray) -> np.ndarray:
        N, V, _ = self.W.shape
        return np.einsum("avc,vc->av", self.W, r.reshape(V, N)).ravel()

    def left(self, l: np.ndarray) -> np.ndarray:
        N, V, _ = self.W.shape
        return np.einsum("av,avc->vc", l.reshape(N, V), self.W).ravel()


class _ChebyshevOperator:
    """Matrix-free operator for potentials that depend on the tail through one
    real coordinate: exp(phi(u, y)) is interpolated in y at K Chebyshev nodes."""

    def __init__(self, phi: Potential, N: int, d: int, K: int = CHEB_NODES):
        lo, hi = phi.coordinate_domain
        y = phi.tail_coordinate(np.arange(1, N + 1))
        nodes, self.L = _cheb_interpolation(y, lo, hi, K)
        blocks = all_words(d, N)
        V = N ** (d - 1)
        self.F = np.empty((N * V, K))
        for k, yk in enumerate(nodes):
            vals = phi.eval_coordinate(blocks, yk)
            if not np.all(np.isfinite(vals)):
                raise NonFinitePotentialError("potential is not finite on the truncated grid")
            self.F[:, k] = np.exp(vals)
        self.F = self.F.reshape(N, V, K)
        self.N, self.V = N, V

    def right(self, r):
        G = r.reshape(self.V, self.N) @ self.L
        return np.einsum("avk,vk->av", self.F, G).ravel()

    def left(self, l):
        H = np.einsum("av,avk->vk", l.reshape(self.N, self.V), self.F)
        return (H @ self.L.T).ravel()


def _power(apply, size: int, tol: float, max_iter: int) -> tuple[float, np.ndarray, float, int]:
    v = np.full(size, 1.0 / size)
    lam = 0.0
    for it in range(1, max_iter + 1):
        w = apply(v)
        s = w.sum()
        if not np.isfinite(s) or s <= 0:
            raise ConvergenceError("power iteration produced a non-positive vector")
        lam_new = s / v.sum()
        w /= s
        delta = np.abs(w - v).sum()
        v = w
        if delta < tol and abs(lam_new - lam) <= tol * lam_new:
            lam = lam_new
            break
        lam = lam_new
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} steps (delta {delta:.2e})")
    resid = np.abs(apply(v) - lam * v).max() / (lam * v.max())
    return lam, v, float(resid), it


@dataclass
class PressureRecord:
    N: int
    d: int
    value: float
    trend: list[tuple[int, int, float]] = field(default_factory=list)
    periodic: list[tuple[int, float]] = field(default_factory=list)
    periodic_cap: int = 0
    periodic_reference: float = float("nan")
    residual: float = 0.0
    iterations: int = 0


# -- model --------------------------------------------------------------------------


class GibbsModel(CylinderMeasure):
    """Stationary d-step Markov measure built from transfer-operator Perron data."""

    exact = False
    invariant = True

    def __init__(self, phi: Potential, N: int, d: int, lam: float, r: np.ndarray, l: np.ndarray,
                 record: PressureRecord | None = None):
        self.phi = phi
        self.N = N
        self.alphabet = N
        self.d = d
        self.lam = float(lam)
        self.P_hat = math.log(lam)
        self.r = np.asarray(r, dtype=float)
        self.l = np.asarray(l, dtype=float)
        self.pi = self.l * self.r
        self.pi /= math.fsum(self.pi)
        with np.errstate(divide="ignore"):  # forbidden letters have r = 0
            self.log_r = np.log(self.r)
        self.record = record or PressureRecord(N, d, self.P_hat)
        self._marginals = {d: self.pi}
        for k in range(d - 1, 0, -1):
            self._marginals[k] = self._marginals[k + 1].reshape(N**k, N).sum(axis=1)
        self.name = f"gibbs({phi.id},N={N},d={d})"

    # transitions -------------------------------------------------------------------

    def _check_digits(self, w) -> None:
        if any(int(a) > self.N for a in w):
            raise DigitAboveCapError(f"word {tuple(w)} has a digit above the cap N={self.N}")

    def transition_row(self, u: Sequence[int]) -> np.ndarray:
        """P(u -> u[1:] c) for c = 1..N."""
        u = tuple(u)
        N, d = self.N, self.d
        words = np.empty((N, d + 1), dtype=np.int64)
        words[:, :d] = u
        words[:, d] = np.arange(1, N + 1)
        w = np.exp(self.phi.evaluate_batch(words))
        base = (word_code(u[1:], N) * N) if d > 1 else 0
        rv = self.r[base : base + N]
        return w * rv / (self.lam * self.r[word_code(u, N)])

    def log_transitions(self, W: np.ndarray) -> np.ndarray:
        """ln P(w[:d] -> w[1:]) for each row of a (m, d+1) matrix."""
        N = self.N
        pw = N ** np.arange(self.d - 1, -1, -1, dtype=np.int64)
        cu = (W[:, :-1] - 1) @ pw
        cv = (W[:, 1:] - 1) @ pw
        return self.phi.evaluate_batch(W) + self.log_r[cv] - self.log_r[cu] - self.P_hat

    # cylinder masses ----------------------------------------------------------------

    def mass(self, w):
        w = tuple(w)
        n = len(w)
        if n == 0:
            return 1.0
        self._check_digits(w)
        if n <= self.d:
            return float(self._marginals[n][word_code(w, self.N)])
        return float(math.exp(self.log_mass(w)))

    def log_mass(self, w) -> float:
        return float(self.log_prefix_masses(w)[-1])

    def child_masses(self, w, N):
        w = tuple(w)
        self._check_digits(w)
        out = np.zeros(N)
        m = min(N, self.N)
        n = len(w)
        if n < self.d:
            base = word_code(w, self.N) * self.N
            out[:m] = self._marginals[n + 1][base : base + m]
            return out
        out[:m] = self.mass(w) * self.transition_row(w[-self.d :])[:m]
        return out

    def level_masses(self, k, N):
        if N != self.N or k <= self.d or self.N ** (k + 0) > DENSE_ENTRIES:
            return super().level_masses(k, N)
        masses = self.pi.copy()
        rows = np.vstack([self.transition_row(u) for u in map(tuple, all_words(self.d, N))])
        top = N**self.d
        for _ in range(k - self.d):
            masses = (masses[:, None] * rows[np.arange(len(masses)) % top]).ravel()
        return masses

    def log_prefix_masses(self, x):
        x = np.ascontiguousarray(x, dtype=np.int64)
        self._check_digits(x)
        n, d = len(x), self.d
        out = np.empty(n)
        for i in range(min(n, d)):
            out[i] = math.log(self._marginals[i + 1][word_code(x[: i + 1], self.N)])
        if n > d:
            windows = np.lib.stride_tricks.sliding_window_view(x, d + 1)
            out[d:] = out[d - 1] + np.cumsum(self.log_transitions(windows))
        return out

    def log_masses_batch(self, W):
        W = np.ascontiguousarray(W, dtype=np.int64)
        self._check_digits(W.ravel())
        m, k = W.shape
        d = min(k, self.d)
        pw = self.N ** np.arange(d - 1, -1, -1, dtype=np.int64)
        with np.errstate(divide="ignore"):
            out = np.log(self._marginals[d][(W[:, :d] - 1) @ pw])
        for j in range(k - self.d):
            out = out + self.log_transitions(W[:, j : j + self.d + 1])
        return out

    def log_letter_masses(self, N):
        if N > self.N:
            raise DigitAboveCapError(f"model cap is {self.N}")
        return np.log(self._marginals[1][:N])

    def sample(self, n, rng):
        from genericdim.kernels import markov_walk

        N, d = self.N, self.d
        if N**d * N > DENSE_ENTRIES:
            raise NotImplementedError("sampling needs the full transition table; lower N or d")
        rows = np.vstack([self.transition_row(u) for u in map(tuple, all_words(d, N))])
        cum = np.cumsum(rows, axis=1)
        cum[:, -1] = 1.0 + 1e-12
        nxt = (np.arange(N**d)[:, None] % N ** (d - 1)) * N + np.arange(N)[None, :] if d > 1 else \
            np.tile(np.arange(N), (N, 1))
        s0 = int(rng.choice(N**d, p=self.pi))
        head = all_words(d, N)[s0]
        if n <= d:
            return head[:n].copy()
        idx, _ = markov_walk(np.ascontiguousarray(cum), np.ascontiguousarray(nxt, dtype=np.int64), s0,
                             rng.random(n - d))
        return np.concatenate([head, idx + 1])

    # variational data ---------------------------------------------------------------

    def block_potential_integral(self, mu: CylinderMeasure) -> float:
        """sum over Sigma_N^(d+1) of mu[w] * ln M(w): the integral of the model's block potential."""
        words = all_words(self.d + 1, self.N)
        vals = self.phi.evaluate_batch(words)
        m = mu.level_masses(self.d + 1, self.N)
        keep = m > 0
        return float(np.dot(m[keep], vals[keep]))

    def entropy(self) -> float:
        """Entropy of the model's own Markov measure."""
        total = 0.0
        for i, u in enumerate(map(tuple, all_words(self.d, self.N))):
            if self.pi[i] <= 0:
                continue
            p = self.transition_row(u)
            p = p[p > 0]
            total += self.pi[i] * float(-(p * np.log(p)).sum())
        return total

    def normalized_potential(self) -> Potential:
        return ShiftedPotential(self.phi, self.P_hat)

    # serialization ------------------------------------------------------------------

    def to_dict(self) -> dict:
        rec = self.record
        return {
            "kind": "gibbs",
            "potential": self.phi.to_dict(),
            "N": self.N,
            "d": self.d,
            "P_hat": self.P_hat,
            "lambda": self.lam,
            "right": self.r.tolist(),
            "left": self.l.tolist(),
            "trend": [list(t) for t in rec.trend],
            "periodic": [list(t) for t in rec.periodic],
            "periodic_cap": rec.periodic_cap,
            "residual": rec.residual,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "GibbsModel":
        d = json.loads(text)
        rec = PressureRecord(d["N"], d["d"], d["P_hat"], [tuple(t) for t in d["trend"]],
                             [tuple(t) for t in d["periodic"]], d["periodic_cap"], residual=d["residual"])
        return cls(potential_from_dict(d["potential"]), d["N"], d["d"], d["lambda"],
                   np.asarray(d["right"]), np.asarray(d["left"]), rec)


def _perron(phi: Potential, N: int, d: int, tol: float, max_iter: int):
    """(lambda, r, l, residual, iterations) of the depth-d transfer operator."""
    if d < 1 or N < 1:
        raise ValueError("N and d must be positive")
    if phi.depth == 1 and isinstance(phi, LocallyConstantPotential):
        f = phi.letter_values(N)
        if np.any(f == np.inf) or np.any(np.isnan(f)):
            raise NonFinitePotentialError("potential is not finite on the truncated grid")
        e = np.exp(f)
        lam = math.fsum(e)
        # M[u -> v] = e^{f(u_1)}: r(u) = prod_i e^{f(u_i)}, l = 1
        r = np.ones(1)
        for _ in range(d):
            r = np.outer(r, e).ravel()
        return lam, r, np.ones(N**d), 0.0, 0
    if N ** (d + 1) <= DENSE_ENTRIES or not hasattr(phi, "tail_coordinate"):
        if N ** (d + 1) > 4 * DENSE_ENTRIES:
            raise ValueError(f"dense transfer matrix with N^(d+1) = {N ** (d + 1)} entries is too large")
        op = _DenseOperator(phi, N, d)
    else:
        op = _ChebyshevOperator(phi, N, d)
    lam, r, resid_r, it_r = _power(op.right, N**d, tol, max_iter)
    lam_l, l, resid_l, it_l = _power(op.left, N**d, tol, max_iter)
    if abs(lam - lam_l) > 1e-9 * lam:
        raise ConvergenceError(f"left and right Perron roots disagree: {lam} vs {lam_l}")
    if np.any(r <= 0) or np.any(l <= 0):
        raise ConvergenceError("Perron vectors are not strictly positive (reducible truncation?)")
    return lam, r, l, max(resid_r, resid_l), max(it_r, it_l)


def periodic_pressure(phi: Potential, N: int, n: int) -> float:
    """(1/n) ln sum over period-n points with digits <= N of exp(S_n phi)."""
    W = all_words(n, N)
    reps = max(2, -(-24 // n))
    total = np.zeros(len(W))
    for i in range(n):
        rot = np.roll(W, -i, axis=1)
        total += phi.evaluate_batch(np.tile(rot, (1, reps)))
    top = total.max()
    return float((top + math.log(np.exp(total - top).sum())) / n)


def gurevich_pressure(phi: Potential, N: int, d: int, *, trend: bool = True, periodic: bool = True,
                      periodic_cap: int = 4, periodic_max_n: int = 8, tol: float = 1e-14,
                      max_iter: int = 5000) -> GibbsModel:
    """Truncated pressure ln(Perron root) at cap N and depth d; the returned
    model carries the trend over smaller (N', d') and periodic-orbit sums."""
    lam, r, l, resid, its = _perron(phi, N, d, tol, max_iter)
    if resid > 1e-10:
        raise ConvergenceError(f"eigen-residual {resid:.2e} above 1e-10")
    rec = PressureRecord(N, d, math.log(lam), residual=resid, iterations=its)
    if trend:
        grid = sorted({(max(2, N // 4), dd) for dd in {max(1, d - 1), d}}
                      | {(max(2, N // 2), dd) for dd in {max(1, d - 1), d}})
        for Np, dp in grid:
            if (Np, dp) == (N, d):
                continue
            lp = _perron(phi, Np, dp, tol, max_iter)[0]
            rec.trend.append((Np, dp, math.log(lp)))
        rec.trend.append((N, d, rec.value))
    if periodic:
        cap = min(N, periodic_cap)
        rec.periodic_cap = cap
        rec.periodic = [(n, periodic_pressure(phi, cap, n)) for n in range(1, periodic_max_n + 1)]
        rec.periodic_reference = math.log(_perron(phi, cap, d, tol, max_iter)[0])
    return GibbsModel(phi, N, d, lam, r, l, rec)


def build_model(phi: Potential, N: int, d: int, **kw) -> GibbsModel:
    """GibbsModel without the trend and periodic-orbit diagnostics."""
    kw.setdefault("trend", False)
    kw.setdefault("periodic", False)
    return gurevich_pressure(phi, N, d, **kw)


def gibbs_cylinder_mass(model: GibbsModel, w: Sequence[int]) -> float:
    return model.mass(as_word(w))


def gibbs_ratios(model: GibbsModel, words: Sequence[Sequence[int]]) -> np.ndarray:
    """mass(w) / exp(S_n phi(x_w) - n P_hat) for each word."""
    out = np.empty(len(words))
    for i, w in enumerate(words):
        w = as_word(w)
        S = float(birkhoff_sums_batch(model.phi, np.asarray([w]))[0])
        out[i] = math.exp(model.log_mass(w) - S + len(w) * model.P_hat) if len(w) > model.d else \
            model.mass(w) / math.exp(S - len(w) * model.P_hat)
    return out


def gibbs_constant_estimate(model: GibbsModel, sample: Sequence[Sequence[int]]) -> float:
    """C_hat = max over the sample of max(ratio, 1/ratio)."""
    if len(sample) == 0:
        raise ValueError("empty sample")
    ratios = gibbs_ratios(model, sample)
    return float(np.max(np.maximum(ratios, 1.0 / ratios)))
