import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import logsumexp

from genericdim.dimension import (
    InconsistentEntropyError,
    InsufficientDataError,
    SupportMismatchError,
    convergence_exponent,
    covering_sum_diagnostic,
    dimension_formula,
    dimension_report,
    entropy_dimension_closed,
    entropy_dimension_grid,
    integral_diverges,
    local_dimension,
    relative_entropy_integral,
    relative_entropy_sum,
)
from genericdim.gauss import GaussMeasure
from genericdim.gibbs import BernoulliPotential, GaussPotential, LocallyConstantPotential, build_model
from genericdim.measures import BernoulliMeasure, MarkovMeasure, PeriodicOrbitMeasure, entropy_markov
from genericdim.streams import ArrayStream, PeriodicStream

H_MARKOV = 0.38645  # entropy of the ((.9,.1),(.5,.5)) chain
LN2 = math.log(2)


def entropy(p):
    p = np.asarray(p)
    return float(-(p * np.log(p)).sum())


# -- convergence exponent ------------------------------------------------------


def test_exponent_zeta():
    assert convergence_exponent(BernoulliMeasure.zeta(2), 100_000).alpha == pytest.approx(0.5, abs=0.01)


def test_exponent_geometric():
    nu = BernoulliMeasure(letter_mass=lambda n: 2.0 ** -np.asarray(n, float),
                          log_letter_mass=lambda n: -np.asarray(n, float) * LN2)
    assert convergence_exponent(nu, 100_000).alpha <= 0.05


def test_exponent_gauss():
    assert convergence_exponent(GaussMeasure(), 100_000).alpha == pytest.approx(0.5, abs=0.01)


def test_exponent_ignores_relabeling():
    swap = {1: 7, 7: 1, 2: 3, 3: 2, 10: 40, 40: 10}

    def log_mass(n):
        m = np.array([swap.get(int(a), int(a)) for a in np.asarray(n)], dtype=float)
        return -2 * np.log(m) - math.log(math.pi**2 / 6)

    shuffled = BernoulliMeasure(letter_mass=lambda n: np.exp(log_mass(n)), log_letter_mass=log_mass)
    a = convergence_exponent(BernoulliMeasure.zeta(2), 100_000).alpha
    assert abs(convergence_exponent(shuffled, 100_000).alpha - a) < 0.01


def test_exponent_partial_sum_diagnostics():
    est = convergence_exponent(BernoulliMeasure.zeta(2), 100_000)
    # the sum at alpha - margin still gains mass in its upper half, the other has converged
    assert est.partial_sums["tail_share_lower"] > 2 * est.partial_sums["tail_share_upper"]


def test_exponent_errors():
    with pytest.raises(InsufficientDataError):
        convergence_exponent(BernoulliMeasure.zeta(2), 100)
    with pytest.raises(InsufficientDataError):
        convergence_exponent(BernoulliMeasure([0.5, 0.5]), 100_000)


# -- relative entropy ------------------------------------------------------------


@pytest.mark.parametrize("k", [1, 3, 6])
def test_relative_entropy_of_measure_with_itself(k, fair):
    assert relative_entropy_sum(fair, fair, k, 2)[0] == pytest.approx(LN2, abs=1e-14)


@pytest.mark.parametrize("k", [1, 4, 8])
def test_relative_entropy_against_fair_coin(k, fair):
    assert relative_entropy_sum(fair, BernoulliMeasure([0.9, 0.1]), k, 2)[0] == pytest.approx(LN2, abs=1e-14)


@pytest.mark.parametrize("k", [1, 5])
def test_relative_entropy_periodic(k):
    value, defect = relative_entropy_sum(BernoulliMeasure([0.3, 0.7]), PeriodicOrbitMeasure((1,)), k, 2)
    assert value == pytest.approx(-math.log(0.3), abs=1e-14) and defect == 0.0


def test_relative_entropy_reports_defect():
    zeta = BernoulliMeasure.zeta(2)
    _, defect = relative_entropy_sum(zeta, zeta, 1, 100)
    assert defect == pytest.approx(1 - 6 / math.pi**2 * sum(1 / n**2 for n in range(1, 101)), rel=1e-9)


def test_relative_entropy_support_mismatch():
    nu = BernoulliMeasure([1.0, 0.0])
    with pytest.raises(SupportMismatchError):
        relative_entropy_sum(nu, BernoulliMeasure([0.5, 0.5]), 2, 2)


def test_relative_entropy_dominates_entropy(markov2, markov3, fair, rng):
    for mu in (markov2, markov3):
        for _ in range(5):
            nu = BernoulliMeasure(rng.dirichlet(np.ones(mu.alphabet)))
            assert relative_entropy_sum(nu, mu, 8, mu.alphabet)[0] > entropy_markov(mu)


def test_integral_bernoulli_exact():
    est = relative_entropy_integral(BernoulliPotential([0.3, 0.7]), BernoulliMeasure([0.9, 0.1]), 3, N=2)
    assert est.value == pytest.approx(-0.9 * math.log(0.3) - 0.1 * math.log(0.7), abs=1e-14)
    assert not est.infinite


def test_integral_at_golden_point():
    golden = PeriodicOrbitMeasure((1,))
    exact = -2 * math.log((math.sqrt(5) - 1) / 2)
    assert relative_entropy_integral(GaussPotential(1.0), golden, 4, N=2).value == pytest.approx(exact, abs=1e-12)
    # with the truncated model the normalizing shift P_hat enters
    model = build_model(GaussPotential(1.0), 1000, 2)
    est = relative_entropy_integral(model, golden, 4)
    assert est.value == pytest.approx(exact + model.P_hat, abs=1e-9)
    assert est.value == pytest.approx(0.9624, abs=0.01)


def test_integral_needs_cap_for_bare_potential(fair):
    with pytest.raises(ValueError):
        relative_entropy_integral(BernoulliPotential([0.5, 0.5]), fair, 2)


def test_divergence_heuristic():
    assert not integral_diverges([(10, 5.0)])
    assert integral_diverges([(10, 2e4)])
    # linear growth, no flattening
    assert integral_diverges([(10, 2e4), (20, 4e4), (40, 6e4), (80, 8e4)])
    # increments shrinking geometrically
    assert not integral_diverges([(10, 2e4), (20, 3e4), (40, 3.2e4), (80, 3.21e4)])


def heavy_tail_pair():
    """mu = zeta(2) digits, nu(n) proportional to exp(-n^2)."""
    logz = float(logsumexp(-np.arange(1, 40, dtype=float) ** 2))
    fn = lambda n: -np.asarray(n, float) ** 2 - logz  # noqa: E731
    nu = BernoulliMeasure(letter_mass=lambda n: np.exp(fn(n)), log_letter_mass=fn, name="gaussian-tail")
    return BernoulliMeasure.zeta(2), nu, LocallyConstantPotential(fn=fn)


def test_heavy_tail_flags_infinity_and_alpha_branch():
    mu, nu, phi = heavy_tail_pair()
    N = 100_000
    est = relative_entropy_integral(phi, mu, 1, N, check_caps=[2 * N, 4 * N, 8 * N])
    assert est.infinite
    alpha = convergence_exponent(nu, N).alpha
    beta = entropy_dimension_grid(nu, mu, [1], [10_000, N]).beta
    assert beta <= alpha + 0.05


# -- entropy dimension -------------------------------------------------------------


def test_grid_equal_measures(markov2):
    grid = entropy_dimension_grid(markov2, markov2, [2, 4], [2])
    assert np.allclose(grid.ratios, 1.0, atol=1e-14)
    assert grid.beta == pytest.approx(1.0, abs=1e-14)


def test_grid_periodic_mu():
    grid = entropy_dimension_grid(build_model(GaussPotential(1.0), 50, 2), PeriodicOrbitMeasure((1,)), [2, 3], [50])
    assert grid.beta == 0.0


def test_grid_markov_vs_fair(markov2, fair):
    grid = entropy_dimension_grid(fair, markov2, [11, 12], [2])
    assert grid.beta == pytest.approx(H_MARKOV / LN2, rel=0.05)
    assert grid.stable


def test_closed_form_examples():
    assert entropy_dimension_closed(0.0, 1.3) == 0.0
    assert entropy_dimension_closed(0.7, 0.7) == 1.0
    assert entropy_dimension_closed(0.38645, 0.69315) == pytest.approx(0.5575, abs=1e-4)
    assert entropy_dimension_closed(0.5, math.inf) == 0.0


def test_closed_form_errors():
    with pytest.raises(InconsistentEntropyError):
        entropy_dimension_closed(0.7, 0.5)
    with pytest.raises(InconsistentEntropyError):
        entropy_dimension_closed(math.inf, math.inf)
    with pytest.raises(ValueError):
        entropy_dimension_closed(-0.1, 1.0)


def test_grid_matches_closed_form(rng):
    for _ in range(5):
        mu = MarkovMeasure.from_matrix(rng.dirichlet(5 * np.ones(2), size=2))
        p = rng.dirichlet(5 * np.ones(2))
        nu = BernoulliMeasure(p)
        h_rel = -float(mu.level_masses(1, 2) @ np.log(p))
        closed = entropy_dimension_closed(entropy_markov(mu), h_rel)
        assert entropy_dimension_grid(nu, mu, [11, 12], [2]).beta == pytest.approx(closed, rel=0.05)


# -- formula ---------------------------------------------------------------------------


def test_formula_corners():
    assert dimension_formula(0.5, 1.0).value == 1.0
    report = dimension_formula(0.5, 0.0)
    assert report.value == 0.5 and report.branch == "alpha"
    report = dimension_formula(0.5, 0.5576)
    assert report.value == 0.5576 and report.branch == "beta"
    assert dimension_formula(0.3, 0.3).branch == "tie"


@pytest.mark.parametrize("bad", [(-0.1, 0.5), (0.5, 1.2), (math.nan, 0.2)])
def test_formula_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        dimension_formula(*bad)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_formula_monotone_and_attained(a, b, c):
    v = dimension_formula(a, b).value
    assert v in (a, b)
    assert dimension_formula(max(a, c), b).value >= v
    assert dimension_formula(a, max(b, c)).value >= v


def test_report_corners(markov2):
    zeta = BernoulliMeasure.zeta(2)
    same = dimension_report(markov2, markov2, k=6, N=2)
    assert same.mu_equals_nu and same.value == 1.0
    periodic = dimension_report(PeriodicOrbitMeasure((1, 2)), zeta, k=4, N=10)
    assert periodic.value == pytest.approx(0.5, abs=0.01) and periodic.branch == "alpha"


def test_report_serializes(markov2, fair):
    report = dimension_report(markov2, fair, k=6, N=2)
    assert "value = " in report.to_text()
    assert '"beta"' in report.to_json()


# -- local dimension -------------------------------------------------------------------


def test_local_dimension_self_reference(rng):
    nu = BernoulliMeasure([0.3, 0.7])
    x = ArrayStream(rng.choice([1, 2], size=10_000, p=[0.3, 0.7]))
    assert local_dimension(x, nu, nu, [2_500, 5_000, 10_000]).liminf == pytest.approx(1.0, abs=1e-12)


def test_local_dimension_against_fair_coin(rng):
    nu = BernoulliMeasure([0.3, 0.7])
    x = ArrayStream(rng.choice([1, 2], size=10_000, p=[0.3, 0.7]))
    ld = local_dimension(x, nu, BernoulliMeasure([0.5, 0.5]), [5_000, 10_000])
    assert ld.ratios[-1] == pytest.approx(LN2 / entropy([0.3, 0.7]), abs=0.05)


def test_local_dimension_constant_on_fixed_point():
    ld = local_dimension(PeriodicStream((1,)), BernoulliMeasure([0.3, 0.7]), BernoulliMeasure([0.6, 0.4]), [10, 50, 100])
    assert np.allclose(ld.ratios, math.log(0.6) / math.log(0.3), atol=1e-12)


def test_local_dimension_zero_mass():
    with pytest.raises(SupportMismatchError):
        local_dimension(PeriodicStream((2,)), BernoulliMeasure([1.0, 0.0]), BernoulliMeasure([0.5, 0.5]), [5])


# -- covering sums ---------------------------------------------------------------------


def test_covering_full_dimension(fair):
    assert covering_sum_diagnostic(fair, fair, 0.05, 1, 2, 16).gamma_star == pytest.approx(1.0, abs=0.1)


def test_covering_biased_frequencies(fair):
    target = entropy([0.9, 0.1]) / LN2
    assert covering_sum_diagnostic(BernoulliMeasure([0.9, 0.1]), fair, 0.05, 1, 2, 16).gamma_star == pytest.approx(
        target, abs=0.1)


def test_covering_vacuous_constraint(fair):
    assert covering_sum_diagnostic(BernoulliMeasure([0.9, 0.1]), fair, 5.0, 1, 2, 12).gamma_star == pytest.approx(
        1.0, abs=0.1)


def test_covering_errors(fair):
    with pytest.raises(ValueError):
        covering_sum_diagnostic(fair, fair, 0.05, 1, 4, 16)
    with pytest.raises(InsufficientDataError):
        covering_sum_diagnostic(BernoulliMeasure([0.9, 0.1]), fair, 1e-6, 1, 2, 5)
