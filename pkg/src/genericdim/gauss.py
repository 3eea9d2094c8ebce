"""Continued-fraction coding, the Gauss measure and the phi_s dimension formula.

Continuants follow q_k = a_k q_{k-1} + q_{k-2} with q_0 = 1, q_{-1} = 0 (and
p_0 = 0, p_{-1} = 1). The basic interval of (a_1..a_n) has endpoints p_n/q_n
and (p_n + p_{n-1})/(q_n + q_{n-1}); its length is 1/(q_n (q_n + q_{n-1})).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

from genericdim.dimension import (
    DimensionReport,
    convergence_exponent,
    dimension_formula,
    entropy_of,
    relative_entropy_integral,
)
from genericdim.gibbs import GaussPotential, ShiftedPotential, build_model
from genericdim.kernels import log_continuants
from genericdim.measures import CylinderMeasure, PeriodicOrbitMeasure, block_entropy
from genericdim.words import as_word

LN2 = math.log(2.0)
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
# pi^2 / (6 ln 2): entropy of the Gauss map
GAUSS_ENTROPY = math.pi**2 / (6.0 * LN2)


class RationalTruncation(ValueError):
    """The Gauss-map orbit reached 0: the input is rational."""

    def __init__(self, digits: tuple[int, ...]):
        super().__init__(f"rational input: expansion terminates after {digits}")
        self.digits = digits


class DigitOverflow(ValueError):
    pass


# -- encoding --------------------------------------------------------------------------


def _encode_exact(x: Fraction, n: int, guard: int) -> tuple[int, ...]:
    digits = []
    for _ in range(n):
        if x == 0:
            raise RationalTruncation(tuple(digits))
        inv = 1 / x
        a = inv.numerator // inv.denominator
        if a > guard:
            raise DigitOverflow(f"digit {a} above guard {guard} at position {len(digits) + 1}")
        digits.append(int(a))
        x = inv - a
    return tuple(digits)


def _encode_mp(x: mpmath.mpf, n: int, guard: int) -> tuple[int, ...]:
    digits = []
    for _ in range(n):
        if x == 0:
            raise RationalTruncation(tuple(digits))
        inv = 1 / x
        a = int(mpmath.floor(inv))
        if a > guard:
            raise DigitOverflow(f"digit {a} above guard {guard} at position {len(digits) + 1}")
        digits.append(a)
        x = inv - a
    return tuple(digits)


def cf_encode(x: float | Fraction | Callable[[], mpmath.mpf], n: int, guard: int = 10**9) -> tuple[int, ...]:
    """First n partial quotients of x in (0, 1).

    Floats and Fractions are expanded exactly (a float is a rational number,
    so its expansion is finite). A zero-argument callable is evaluated with
    mpmath at increasing precision until two precisions agree on n digits.
    """
    if callable(x):
        bits = 64 + 8 * n
        while True:
            with mpmath.workprec(bits):
                lo = _encode_mp(mpmath.mpf(x()), n, guard)
            with mpmath.workprec(2 * bits):
                hi = _encode_mp(mpmath.mpf(x()), n, guard)
            if lo == hi:
                return hi
            bits *= 2
    q = Fraction(x)
    if not 0 < q < 1:
        raise ValueError("x must lie in (0, 1)")
    return _encode_exact(q, n, guard)


def golden_point() -> mpmath.mpf:
    return (mpmath.sqrt(5) - 1) / 2


def sqrt2_point() -> mpmath.mpf:
    return mpmath.sqrt(2) - 1


# -- continuants ------------------------------------------------------------------------


def continuants(w: Sequence[int]) -> tuple[int, int, int, int]:
    """(p_n, q_n, p_{n-1}, q_{n-1}) as exact integers."""
    p, q, pp, qp = 0, 1, 1, 0
    for a in w:
        p, q, pp, qp = int(a) * p + pp, int(a) * q + qp, p, q
    return p, q, pp, qp


@dataclass
class CFPoint:
    """Digits with incrementally maintained continuants."""

    digits: list[int] = field(default_factory=list)
    p: int = 0
    q: int = 1
    p_prev: int = 1
    q_prev: int = 0

    def push(self, a: int) -> None:
        if a < 1:
            raise ValueError("partial quotients are >= 1")
        self.digits.append(int(a))
        self.p, self.q, self.p_prev, self.q_prev = a * self.p + self.p_prev, a * self.q + self.q_prev, self.p, self.q

    def endpoints(self) -> tuple[Fraction, Fraction]:
        a = Fraction(self.p, self.q)
        b = Fraction(self.p + self.p_prev, self.q + self.q_prev)
        return (a, b) if a < b else (b, a)


def kappa(w: Sequence[int], tail: Sequence[int] = ()) -> Fraction:
    """[0; w, tail] as an exact fraction (finite words only)."""
    x = Fraction(0)
    for a in reversed(tuple(w) + tuple(tail)):
        x = 1 / (a + x)
    return x


def log_interval_length(w: Sequence[int]) -> float:
    """ln |Delta(w)| = -ln q_n - ln(q_n + q_{n-1}), safe for huge continuants."""
    _, q, _, qp = continuants(as_word(w))
    return -(math.log(q) + math.log(q + qp))


def basic_interval_length(w: Sequence[int]) -> float:
    w = as_word(w)
    if not w:
        raise ValueError("nonempty word required")
    _, q, _, qp = continuants(w)
    D = q * (q + qp)
    if D < 10**300:
        return 1.0 / D
    return math.exp(-(math.log(q) + math.log(q + qp)))


def log_interval_lengths_from_log_digits(log_digits: np.ndarray) -> np.ndarray:
    """ln |Delta(a_1..a_n)| for n = 1..len, from ln a_k, in log space throughout."""
    logq, ratio = log_continuants(np.ascontiguousarray(log_digits, dtype=float))
    # q_n + q_{n-1} = q_n (1 + q_{n-1}/q_n)
    return -(2.0 * logq + np.log1p(ratio))


# -- the Gauss measure -------------------------------------------------------------------


def _gauss_log_mass(p: int, q: int, pp: int, qp: int) -> float:
    A = (q + p) * (q + qp)
    delta = q * pp - p * qp  # +-1
    if A < 10**15:
        return math.log(abs(math.log1p(delta / A)) / LN2)
    # |ln(1 + delta/A)| = 1/A * (1 + O(1/A))
    return -math.log(A) - math.log(LN2) + math.log1p(-delta / (2 * A))


def gauss_measure_mass(w: Sequence[int]) -> float:
    """Gauss-measure mass (1/ln 2) |ln((1 + e_hi)/(1 + e_lo))| of the basic interval."""
    w = as_word(w)
    if not w:
        raise ValueError("nonempty word required")
    return math.exp(_gauss_log_mass(*continuants(w)))


class GaussMeasure(CylinderMeasure):
    """The Gauss measure, density 1/((1 + x) ln 2), on continued-fraction digits."""

    name = "gauss"

    def mass(self, w):
        if len(w) == 0:
            return 1.0
        return gauss_measure_mass(w)

    def child_masses(self, w, N):
        p, q, pp, qp = continuants(as_word(w))
        a = np.arange(1, N + 1, dtype=float)
        qa = a * q + qp
        pa = a * p + pp
        A = (qa + pa) * (qa + q)
        delta = -(q * pp - p * qp)
        return np.abs(np.log1p(delta / A)) / LN2

    def log_letter_masses(self, N):
        n = np.arange(1, N + 1, dtype=float)
        return np.log(np.log1p(1.0 / (n * (n + 2.0)))) - math.log(LN2)

    def log_masses_batch(self, W):
        W = np.asarray(W, dtype=float)
        p, q = np.zeros(len(W)), np.ones(len(W))
        pp, qp = np.ones(len(W)), np.zeros(len(W))
        for j in range(W.shape[1]):
            a = W[:, j]
            p, q, pp, qp = a * p + pp, a * q + qp, p, q
        A = (q + p) * (q + qp)
        delta = q * pp - p * qp
        return np.log(np.abs(np.log1p(delta / A))) - math.log(LN2)

    def log_prefix_masses(self, x):
        out = np.empty(len(x))
        p, q, pp, qp = 0, 1, 1, 0
        for i, a in enumerate(x):
            a = int(a)
            p, q, pp, qp = a * p + pp, a * q + qp, p, q
            out[i] = _gauss_log_mass(p, q, pp, qp)
        return out

    def sample(self, n, rng):
        """Digits of x = 2^U - 1 with U uniform (x is Gauss-distributed)."""
        bits = 64 + 8 * n
        u_int = int.from_bytes(rng.bytes(bits // 8 + 1), "little")
        scale = 8 * (bits // 8 + 1)

        def x():
            return mpmath.power(2, mpmath.mpf(u_int) / mpmath.mpf(2) ** scale) - 1

        return np.asarray(cf_encode(x, n, guard=10**18), dtype=np.int64)


def golden_point_measure() -> PeriodicOrbitMeasure:
    """Point mass on the orbit of [0; 1, 1, 1, ...] = (sqrt 5 - 1)/2."""
    return PeriodicOrbitMeasure((1,))


class GibbsLetterProxy(CylinderMeasure):
    """1-cylinder weights proportional to exp(phi_s(n n n ...)); comparable to the
    Gibbs measure's letter masses up to the Gibbs constant, which is all the
    convergence exponent depends on."""

    def __init__(self, phi: GaussPotential):
        self.phi = phi
        self.name = f"gibbs-letter-proxy(s={phi.s})"

    def log_letter_masses(self, N):
        n = np.arange(1, N + 1)
        return 2.0 * self.phi.s * np.log(self.phi.tail_coordinate(n))


# -- dimension of G_ell -----------------------------------------------------------------


def _is_gauss(ell: CylinderMeasure) -> bool:
    return isinstance(ell, GaussMeasure)


def dim_generic_cf(ell: CylinderMeasure, s: float = 1.0, *, entropy_depth: int = 2, entropy_cap: int = 10_000,
                   integral_depth: int | None = None, integral_cap: int | None = None, N_alpha: int = 100_000,
                   model_cap: int = 1000, model_depth: int = 2, check_caps: Sequence[int] = ()) -> DimensionReport:
    """max{alpha_s, h_ell / (P(phi_s) - 2 s int ln x d ell)}.

    For s = 1 the Gibbs measure is the Gauss measure: P = 0 and alpha_1 = 1/2
    are used directly (the estimate of alpha is still reported), and the
    report's ``euclidean`` entry is the Lebesgue/Hausdorff variant. For
    s != 1 a truncated transfer-operator model supplies P_hat.
    """
    phi = GaussPotential(s)
    finite = ell.alphabet
    cap = integral_cap or (finite if finite is not None else entropy_cap)
    depth = integral_depth or (8 if finite is not None else entropy_depth)
    if s == 1.0:
        P_hat = 0.0
        alpha_est = convergence_exponent(GaussMeasure(), N_alpha)
        alpha = 0.5
        alpha_method = "pinned: s = 1 (estimate in diagnostics)"
        model_info = {}
    else:
        model = build_model(phi, model_cap, model_depth)
        P_hat = model.P_hat
        alpha_est = convergence_exponent(GibbsLetterProxy(phi), N_alpha)
        alpha = alpha_est.alpha
        alpha_method = "dyadic-slope on exp(phi_s) letter weights"
        model_info = {"model_N": model_cap, "model_d": model_depth, "P_hat": P_hat}
    integral = relative_entropy_integral(ShiftedPotential(phi, P_hat), ell, depth, cap, check_caps=check_caps)
    if isinstance(ell, PeriodicOrbitMeasure):
        h, h_method = 0.0, "periodic orbit"
    elif _is_gauss(ell):
        H, defect = block_entropy(ell, entropy_depth, entropy_cap)
        h, h_method = H / entropy_depth, f"cylinder entropy k={entropy_depth}, N={entropy_cap}"
    else:
        h, h_method = entropy_of(ell, depth, cap), "exact / conditional block entropy"
    if integral.infinite:
        beta = 0.0
    else:
        beta = 0.0 if h == 0 else min(1.0, h / integral.value)
    report = dimension_formula(
        alpha, beta, h_mu=h, h_rel_integral=integral.value, beta_closed=beta, h_rel_infinite=integral.infinite,
        mu_equals_nu=_is_gauss(ell) and s == 1.0, alpha_method=alpha_method,
        provenance={"s": s, "entropy_depth": entropy_depth, "entropy_cap": entropy_cap, "integral_depth": depth,
                    "integral_cap": cap, "N_alpha": N_alpha, "ell": ell.name, **model_info},
        diagnostics={"alpha_estimate": alpha_est.alpha, "h_method": h_method, "integral_bound": integral.bound,
                     "integral_defect": integral.defect, "cap_trend": integral.cap_trend,
                     "ratio": (h / integral.value) if integral.value else float("nan")},
    )
    if s == 1.0:
        report.diagnostics["euclidean"] = max(0.5, beta)
    return report


# -- Wegmann ratio -------------------------------------------------------------------------


@dataclass
class WegmannResult:
    depths: list[int]
    ratios: list[float]
    settles_at: int | None
    verdict: bool
    log_lengths: list[float]


def wegmann_check(log_digits: np.ndarray, depths: Sequence[int] | None = None, tol: float = 0.05) -> WegmannResult:
    """ln|Delta(x_1..x_n)| / ln|Delta(x_1..x_{n+1})| along the digits.

    The verdict is True when, from some depth on, every scanned ratio stays in
    (1 - tol, 1 + tol), and that depth lies in the first half of the scan.
    """
    log_digits = np.asarray(log_digits, dtype=float)
    L = log_interval_lengths_from_log_digits(log_digits)
    n = len(L)
    depths = list(range(1, n)) if depths is None else [d for d in depths if 1 <= d < n]
    ratios = [float(L[d - 1] / L[d]) for d in depths]
    inside = [abs(r - 1.0) < tol for r in ratios]
    settles = None
    for i in range(len(inside) - 1, -1, -1):
        if not inside[i]:
            break
        settles = depths[i]
    verdict = settles is not None and settles <= depths[len(depths) // 2]
    return WegmannResult(depths, ratios, settles, bool(verdict), L.tolist())


def log_digits_of(digits: Sequence[int]) -> np.ndarray:
    return np.asarray([math.log(int(a)) for a in digits], dtype=float)


@dataclass
class BigDigitSample:
    """Digits too large for machine integers, stored by their logarithms."""

    log_digits: np.ndarray
    squares: np.ndarray


def sample_F_cf(z: np.ndarray, a: float, depth: int, rng: np.random.Generator) -> BigDigitSample:
    """x_n uniform in (a^{k^2}, 2 a^{k^2}] when n = k^2, x_n = z_n otherwise."""
    z = np.asarray(z[:depth], dtype=np.int64)
    if len(z) < depth:
        raise ValueError("z is shorter than the requested depth")
    logs = np.log(z.astype(float))
    ks = np.arange(1, int(math.isqrt(depth)) + 1)
    for k in ks:
        base_log = k * k * math.log(a)
        if base_log < 40:
            lo = int(round(a ** (k * k)))
            digit = int(rng.integers(lo + 1, 2 * lo + 1))
            logs[k * k - 1] = math.log(digit)
        else:
            # the integer offset is below resolution: ln(a^{k^2} + m) = k^2 ln a + ln(1 + m / a^{k^2})
            logs[k * k - 1] = base_log + math.log1p(rng.random())
    return BigDigitSample(logs, ks * ks)


def wegmann_negative_control(n: int) -> np.ndarray:
    """Log-digits of x_k = 2^(2^k): interval lengths drop doubly exponentially."""
    return np.asarray([2.0**k * LN2 for k in range(1, n + 1)])


def factorial_log_digits(n: int) -> np.ndarray:
    """Log-digits of x_k = k!."""
    return np.asarray([math.lgamma(k + 1) for k in range(1, n + 1)])
