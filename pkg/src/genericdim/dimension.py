"""Dimension quantities: convergence exponent, relative entropy, entropy
dimension, the max formula, local dimension along points and the
frequency-constrained covering-sum diagnostic."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from genericdim.gibbs import GibbsModel, Potential, birkhoff_sums_batch
from genericdim.kernels import row_window_counts
from genericdim.measures import CylinderMeasure, MarkovMeasure, block_entropy, entropy_markov, level_table
from genericdim.streams import as_stream
from genericdim.words import all_words

INFINITY_THRESHOLD = -1e4
FLATTENING_RATIO = 0.8


class SupportMismatchError(ValueError):
    """nu vanishes on a cylinder charged by mu."""


class InsufficientDataError(ValueError):
    pass


# -- convergence exponent ------------------------------------------------------------


@dataclass
class ExponentEstimate:
    alpha: float
    slope: float
    intercept: float
    ranks: list[int]
    neg_log_masses: list[float]
    partial_sums: dict[str, float] = field(default_factory=dict)
    method: str = "dyadic-slope"


def convergence_exponent(nu: CylinderMeasure, N_max: int = 100_000, margin: float = 0.05) -> ExponentEstimate:
    """Estimate inf{t : sum nu[n]^t < inf} from the sorted 1-cylinder masses.

    The masses are sorted decreasingly (ties by digit), -ln mass is regressed
    on ln rank over ranks 2^m in the upper half of the dyadic range, and the
    estimate is 1/slope clamped to [0, 1].
    """
    logm = np.asarray(nu.log_letter_masses(N_max), dtype=float)
    if not np.all(np.isfinite(logm)):
        zero = int(np.nonzero(~np.isfinite(logm))[0][0]) + 1
        raise InsufficientDataError(f"1-cylinder mass of digit {zero} is zero; exponent needs positive masses")
    order = np.argsort(-logm, kind="stable")
    sorted_logm = logm[order]
    m_max = int(math.floor(math.log2(N_max)))
    ms = np.arange(-(-m_max // 2), m_max + 1)
    if len(ms) < 8:
        raise InsufficientDataError(f"only {len(ms)} dyadic ranks in the upper half; raise N_max")
    ranks = 2**ms
    y = -sorted_logm[ranks - 1]
    x = np.log(ranks.astype(float))
    slope, intercept = np.polyfit(x, y, 1)
    alpha = 1.0 / slope if slope > 0 else 1.0
    alpha = min(1.0, max(0.0, alpha))
    sums = {}
    for label, t in (("lower", alpha - margin), ("upper", alpha + margin)):
        if t <= 0:
            continue
        terms = np.exp(t * sorted_logm)
        half = math.fsum(terms[: N_max // 2])
        full = math.fsum(terms)
        sums[f"sum_t_{label}"] = full
        sums[f"tail_share_{label}"] = (full - half) / full
        sums[f"t_{label}"] = float(t)
    return ExponentEstimate(float(alpha), float(slope), float(intercept), ranks.tolist(), y.tolist(), sums)


# -- relative entropy ----------------------------------------------------------------


def _cross_terms(nu: CylinderMeasure, mu: CylinderMeasure, k: int, N: int):
    """Yield (mu masses, ln nu masses) over mu-positive words of Sigma_N^k."""
    table = level_table(mu, k, N)
    if table is not None:
        W, lm = table
        yield np.exp(lm), nu.log_masses_batch(W), W
        return
    for prefix, kids in mu.iter_level(k, N):
        keep = kids > 0
        with np.errstate(divide="ignore"):
            lnu = np.log(nu.child_masses(prefix, N)[keep])
        W = np.empty((int(keep.sum()), k), dtype=np.int64)
        W[:, :-1] = prefix
        W[:, -1] = np.nonzero(keep)[0] + 1
        yield kids[keep], lnu, W


def cross_entropy_block(nu: CylinderMeasure, mu: CylinderMeasure, k: int, N: int) -> tuple[float, float]:
    """(H_{k,N}(nu, mu), mu-mass defect): -sum_{w in Sigma_N^k} mu[w] ln nu[w]."""
    total = 0.0
    mass = 0.0
    for m, lnu, W in _cross_terms(nu, mu, k, N):
        if np.any(~np.isfinite(lnu)):
            bad = W[np.nonzero(~np.isfinite(lnu))[0][0]]
            raise SupportMismatchError(f"nu vanishes on {tuple(int(a) for a in bad)} where mu > 0")
        total -= float(np.dot(m, lnu))
        mass += float(m.sum())
    return total, max(0.0, 1.0 - mass)


def relative_entropy_sum(nu: CylinderMeasure, mu: CylinderMeasure, k: int, N: int) -> tuple[float, float]:
    """(-(1/k) sum_{w in Sigma_N^k} mu[w] ln nu[w], mu-mass defect)."""
    H, defect = cross_entropy_block(nu, mu, k, N)
    return H / k, defect


@dataclass
class IntegralEstimate:
    value: float
    bound: float
    C_hat: float
    variation_sum: float
    defect: float
    k: int
    N: int
    infinite: bool = False
    cap_trend: list[tuple[int, float]] = field(default_factory=list)


def _integral_at(phi: Potential, mu: CylinderMeasure, k: int, N: int, model: GibbsModel | None):
    total = 0.0
    mass = 0.0
    worst = 0.0
    for m, lnu, W in _cross_terms(model if model is not None else mu, mu, k, N):
        S = birkhoff_sums_batch(phi, W)
        total -= float(np.dot(m, S))
        mass += float(m.sum())
        if model is not None:
            worst = max(worst, float(np.max(np.abs(lnu - S))))
    return total / k, max(0.0, 1.0 - mass), math.exp(worst)


def relative_entropy_integral(model: GibbsModel | Potential, mu: CylinderMeasure, k: int, N: int | None = None,
                              check_caps: Sequence[int] = ()) -> IntegralEstimate:
    """-(1/k) sum_{w in Sigma_N^k} mu[w] S_k phi(x_w) for the pressure-normalized potential.

    With a GibbsModel, C_hat is the largest Gibbs ratio over the visited words
    and the bound is (ln C_hat + sum_{m<=k} var_m)/k. ``check_caps`` lists
    larger caps used to decide whether the partial sums diverge.
    """
    if isinstance(model, GibbsModel):
        phi = model.normalized_potential()
        N = model.N if N is None else N
        gm = model
    else:
        phi = model
        gm = None
        if N is None:
            raise ValueError("a bare potential needs an explicit cap N")
    value, defect, C_hat = _integral_at(phi, mu, k, N, gm)
    var = phi.variation_sum(k)
    est = IntegralEstimate(value, (math.log(C_hat) + var) / k, C_hat, var, defect, k, N)
    est.cap_trend.append((N, value))
    for cap in check_caps:
        est.cap_trend.append((cap, _integral_at(phi, mu, k, cap, None)[0]))
    est.infinite = integral_diverges(est.cap_trend)
    return est


def integral_diverges(trend: Sequence[tuple[int, float]], threshold: float = INFINITY_THRESHOLD,
                      ratio: float = FLATTENING_RATIO) -> bool:
    """Divergence heuristic over a cap-doubling trend of -integral values.

    Flags when the integral of phi has fallen below ``threshold`` and the
    increments across the last three cap doublings show no flattening (each
    at least ``ratio`` times the previous one). With fewer than four trend
    points only the threshold is applied.
    """
    values = [v for _, v in trend]
    if not values or -values[-1] >= threshold:
        return False
    if len(values) < 4:
        return True
    inc = np.diff(values[-4:])
    if np.any(inc <= 0):
        return False
    return bool(np.all(inc[1:] / inc[:-1] >= ratio))


# -- entropy dimension -----------------------------------------------------------------


@dataclass
class BetaGrid:
    beta: float
    stable: bool
    ks: list[int]
    Ns: list[int]
    ratios: list[list[float]]
    numerators: list[list[float]]
    denominators: list[list[float]]
    defects: list[list[float]]
    note: str = "stability is a heuristic: compares the largest grid point with the next smaller k"


def entropy_dimension_grid(nu: CylinderMeasure, mu: CylinderMeasure, k_list: Sequence[int], N_list: Sequence[int],
                           tol: float = 0.02) -> BetaGrid:
    """Ratios H_{k,N}(mu, mu) / H_{k,N}(nu, mu) over the grid; beta_hat is the
    value at the largest (k, N)."""
    ks, Ns = sorted(k_list), sorted(N_list)
    if not ks or not Ns:
        raise ValueError("grids must be nonempty")
    num = np.zeros((len(ks), len(Ns)))
    den = np.zeros_like(num)
    dfx = np.zeros_like(num)
    for i, k in enumerate(ks):
        for j, N in enumerate(Ns):
            num[i, j] = block_entropy(mu, k, N)[0]
            den[i, j], dfx[i, j] = cross_entropy_block(nu, mu, k, N)
    if np.all(num <= 1e-14):
        ratios = np.zeros_like(num)
        return BetaGrid(0.0, True, ks, Ns, ratios.tolist(), num.tolist(), den.tolist(), dfx.tolist())
    if np.any(den <= 0):
        raise SupportMismatchError("cross entropy vanishes on the grid")
    ratios = num / den
    beta = float(ratios[-1, -1])
    ref = ratios[-2, -1] if len(ks) > 1 else (ratios[-1, -2] if len(Ns) > 1 else beta)
    return BetaGrid(min(1.0, max(0.0, beta)), bool(abs(beta - ref) <= tol), ks, Ns, ratios.tolist(),
                    num.tolist(), den.tolist(), dfx.tolist())


class InconsistentEntropyError(ValueError):
    pass


def entropy_dimension_closed(h_mu: float, h_rel: float) -> float:
    """h_mu / h_rel; 0 when h_rel is infinite and h_mu finite."""
    if h_mu < 0:
        raise ValueError("negative entropy")
    if math.isinf(h_rel):
        if math.isinf(h_mu):
            raise InconsistentEntropyError("both entropies infinite")
        return 0.0
    if h_rel < h_mu - 1e-9 * max(1.0, h_mu):
        raise InconsistentEntropyError(f"relative entropy {h_rel} below entropy {h_mu}")
    if h_mu == 0:
        return 0.0
    return min(1.0, h_mu / h_rel)


# -- the formula ------------------------------------------------------------------------


@dataclass
class DimensionReport:
    alpha: float
    beta: float
    value: float
    branch: str
    h_mu: float | None = None
    h_rel_sum: float | None = None
    h_rel_integral: float | None = None
    beta_grid: float | None = None
    beta_closed: float | None = None
    h_rel_infinite: bool = False
    mu_equals_nu: bool = False
    alpha_method: str = ""
    provenance: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_text(self) -> str:
        flat = {k: v for k, v in asdict(self).items() if k not in ("provenance", "diagnostics")}
        flat.update({f"provenance.{k}": v for k, v in self.provenance.items()})
        return "".join(f"{k} = {_fmt(v)}\n" for k, v in flat.items())

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True, default=_jsonable)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not serializable: {type(v).__name__}")


def dimension_formula(alpha: float, beta: float, **fields) -> DimensionReport:
    """max{alpha, beta} with the active branch recorded."""
    for name, v in (("alpha", alpha), ("beta", beta)):
        if not 0.0 <= v <= 1.0 or math.isnan(v):
            raise ValueError(f"{name} = {v} is outside [0, 1]")
    value = max(alpha, beta)
    branch = "beta" if beta > alpha else ("alpha" if alpha > beta else "tie")
    return DimensionReport(alpha=alpha, beta=beta, value=value, branch=branch, **fields)


# -- local dimension --------------------------------------------------------------------


@dataclass
class LocalDimension:
    depths: list[int]
    ratios: list[float]
    liminf: float


def local_dimension(x, nu: CylinderMeasure, ref: CylinderMeasure, depths: Sequence[int]) -> LocalDimension:
    """r_n = ln ref[x_1..x_n] / ln nu[x_1..x_n] at the scheduled depths; the
    liminf proxy is the minimum over the tail half of the schedule."""
    depths = sorted(int(n) for n in depths)
    n_max = depths[-1]
    digits = as_stream(x).prefix(n_max)
    ln_nu = nu.log_prefix_masses(digits)
    ln_ref = ref.log_prefix_masses(digits)
    idx = np.asarray(depths) - 1
    a, b = ln_ref[idx], ln_nu[idx]
    if np.any(~np.isfinite(a)) or np.any(~np.isfinite(b)):
        raise SupportMismatchError("zero cylinder mass along the stream")
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(b != 0, a / b, np.nan)
    tail = [ri for n, ri in zip(depths, r) if n >= n_max / 2 and np.isfinite(ri)]
    return LocalDimension(depths, r.tolist(), float(min(tail)) if tail else float("nan"))


# -- covering sums ------------------------------------------------------------------------


@dataclass
class CoveringDiagnostic:
    gamma_star: float
    gammas: list[float]
    slopes: list[float]
    ns: list[int]
    counts: list[int]
    log_sums: list[list[float]]


def _admitted(mu: CylinderMeasure, n: int, j: int, N: int, eps: float):
    words = all_words(n + j - 1, N)
    counts, overflow = row_window_counts(np.ascontiguousarray(words), j, N)
    freqs = counts / float(n)
    target = mu.level_masses(j, N)
    ok = np.all(np.abs(freqs - target[None, :]) < eps, axis=1)
    return words[ok]


def covering_sum_diagnostic(mu: CylinderMeasure, nu: CylinderMeasure, eps: float, j: int, N: int, n_max: int,
                            gammas: Sequence[float] | None = None, fit_from: int = 1,
                            enumeration_limit: int = 1 << 22) -> CoveringDiagnostic:
    """Growth rate in n of ln sum_{w in Lambda_n} nu[w]^gamma, where Lambda_n
    holds the words of length n+j-1 over {1..N} whose length-j window
    frequencies are all within eps of mu. The gamma where the growth rate
    changes sign estimates the dimension of the frequency-constrained set.

    The growth rate is the least-squares slope of ln sum over the nonempty
    n >= ``fit_from``. At n_max = 16 the admitted frequency classes change
    in jumps, and fitting over the whole range averages them out.
    """
    if float(N) ** (n_max + j - 1) > enumeration_limit:
        raise ValueError(f"exhaustive mode needs N^(n_max+j-1) <= {enumeration_limit}")
    gammas = np.linspace(0.0, 2.0, 41) if gammas is None else np.asarray(gammas, dtype=float)
    ns, counts, logs_nu = [], [], []
    for n in range(1, n_max + 1):
        W = _admitted(mu, n, j, N, eps)
        if len(W) == 0:
            continue
        lnu = nu.log_masses_batch(W)
        ns.append(n)
        counts.append(len(W))
        logs_nu.append(lnu)
    fit_ns = [n for n in ns if n >= fit_from]
    if len(fit_ns) < 2:
        raise InsufficientDataError("Lambda_n is empty for too many n; raise eps or n_max")
    fit_idx = [ns.index(n) for n in fit_ns]

    def slope(g: float) -> float:
        L = [float(logsumexp(g * logs_nu[i])) for i in fit_idx]
        return float(np.polyfit(fit_ns, L, 1)[0])

    slopes = [slope(g) for g in gammas]
    log_sums = [[float(logsumexp(g * lv)) for g in gammas] for lv in logs_nu]
    sign = np.sign(slopes)
    change = np.nonzero(np.diff(sign) != 0)[0]
    if len(change) == 0:
        gstar = float(gammas[0] if slopes[0] < 0 else gammas[-1])
    else:
        i = int(change[0])
        gstar = float(brentq(slope, gammas[i], gammas[i + 1], xtol=1e-10)) if slopes[i + 1] != 0 else float(gammas[i + 1])
    return CoveringDiagnostic(gstar, list(map(float, gammas)), slopes, ns, counts, log_sums)


# -- end-to-end ----------------------------------------------------------------------------


def measures_agree(mu: CylinderMeasure, nu: CylinderMeasure, k: int, N: int, tol: float = 1e-12) -> bool:
    if mu is nu:
        return True
    for j in range(1, k + 1):
        if np.max(np.abs(mu.level_masses(j, N) - nu.level_masses(j, N))) > tol:
            return False
    return True


def entropy_of(mu: CylinderMeasure, k: int, N: int) -> float:
    """Exact entropy for Markov-type measures, else the depth-k conditional block entropy."""
    from genericdim.measures import PeriodicOrbitMeasure

    if isinstance(mu, MarkovMeasure):
        return entropy_markov(mu)
    if isinstance(mu, PeriodicOrbitMeasure):
        return 0.0
    if isinstance(mu, GibbsModel):
        return mu.entropy()
    return block_entropy(mu, k, N)[0] - block_entropy(mu, k - 1, N)[0]


def dimension_report(mu: CylinderMeasure, nu: CylinderMeasure, *, k: int = 12, N: int = 20,
                     N_max: int = 100_000, k_list: Sequence[int] | None = None,
                     N_list: Sequence[int] | None = None) -> DimensionReport:
    """alpha of nu, beta(nu | mu) by grid and closed form, and the formula."""
    if nu.alphabet is not None and nu.alphabet < N_max:
        alpha, alpha_method, alpha_diag = 0.0, "finite alphabet", {}
    else:
        est = convergence_exponent(nu, N_max)
        alpha, alpha_method, alpha_diag = est.alpha, est.method, asdict(est)
    same = measures_agree(mu, nu, min(k, 4), min(N, 8))
    h_mu = entropy_of(mu, k, N)
    h_rel, defect = relative_entropy_sum(nu, mu, k, N)
    # cross entropy rate: increment of the block cross entropy
    h_rel_rate = h_rel * k - cross_entropy_block(nu, mu, k - 1, N)[0] if k > 1 else h_rel
    grid = entropy_dimension_grid(nu, mu, k_list or sorted({max(1, k // 2), k - 1, k}), N_list or [N])
    if same:
        beta_closed = 1.0
    else:
        beta_closed = entropy_dimension_closed(h_mu, max(h_rel_rate, h_mu))
    beta = 1.0 if same else beta_closed
    return dimension_formula(
        alpha, beta, h_mu=h_mu, h_rel_sum=h_rel, beta_grid=grid.beta, beta_closed=beta_closed,
        mu_equals_nu=same, alpha_method=alpha_method,
        provenance={"k": k, "N": N, "N_max": N_max, "mu": mu.name, "nu": nu.name, "defect": defect},
        diagnostics={"alpha": alpha_diag, "grid": asdict(grid), "h_rel_rate": h_rel_rate},
    )
