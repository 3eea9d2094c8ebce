import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from genericdim.measures import BernoulliMeasure, CylinderMeasure, MarkovMeasure, MixtureMeasure, PeriodicOrbitMeasure
from genericdim.streams import ArrayStream, PeriodicStream, StreamExhausted, sample_stream
from genericdim.symbolic import (
    CapMismatchError,
    MassRangeError,
    OrbitAccumulator,
    accumulate_orbit,
    bowen_bound,
    d_star,
    d_star_orbit_vs_measure,
)
from genericdim.words import excluded_weight, weight


def test_accumulator_hand_count():
    acc = accumulate_orbit(PeriodicStream((1, 2)), 10, 2, 2)
    assert acc.count((1, 2)) == 5 and acc.count((2, 1)) == 4
    assert acc.windows[2] == 9


def test_accumulator_constant_stream():
    acc = accumulate_orbit(PeriodicStream((1,)), 37, 1, 3)
    assert acc.count((1,)) == 37


def test_accumulator_invariant_counts_plus_overflow():
    x = np.asarray([1, 2, 5, 1, 1, 3, 2, 9, 1, 2], dtype=np.int64)
    acc = accumulate_orbit(x, 10, 3, 3)
    for k in (1, 2, 3):
        assert acc.counts[k].sum() + acc.overflow[k] == 10 - k + 1 == acc.windows[k]
        f = acc.frequencies(k)
        assert np.all((f >= 0) & (f <= 1))


def test_accumulator_bernoulli_frequencies():
    mu = BernoulliMeasure([0.5, 0.3, 0.2])
    acc = accumulate_orbit(sample_stream(mu, seed=3), 100_000, 1, 3)
    assert np.all(np.abs(acc.frequencies(1) - mu.p) < 0.01)


def test_accumulator_exhaustion():
    with pytest.raises(StreamExhausted):
        accumulate_orbit(ArrayStream([1, 2, 3]), 10, 1, 3)


def test_lookahead_counts_every_start():
    acc = accumulate_orbit(PeriodicStream((1, 2)), 10, 2, 2, lookahead=True)
    assert acc.windows[2] == 10
    assert acc.count((1, 2)) == 5 and acc.count((2, 1)) == 5


def test_accumulator_serialization_and_merge():
    x = sample_stream(BernoulliMeasure([0.6, 0.4]), seed=1)
    acc = accumulate_orbit(x, 500, 3, 2)
    back = OrbitAccumulator.loads(acc.dumps())
    for k in (1, 2, 3):
        assert np.array_equal(back.counts[k], acc.counts[k])
        assert back.windows[k] == acc.windows[k]
    merged = acc + back
    assert merged.counts[2].sum() == 2 * acc.counts[2].sum()
    with pytest.raises(CapMismatchError):
        acc + accumulate_orbit(x, 500, 2, 2)


def test_d_star_identity():
    mu = MarkovMeasure.from_matrix([[0.9, 0.1], [0.5, 0.5]])
    assert d_star(mu, mu, 4, 2).value == 0.0


def test_d_star_point_masses_against_direct_sum():
    a, b = PeriodicOrbitMeasure((1,)), PeriodicOrbitMeasure((2,))
    got = d_star(a, b, 30, 10)
    oracle = sum(weight((1,) * n) + weight((2,) * n) for n in range(1, 31))
    assert got.value == pytest.approx(oracle, abs=1e-6)
    assert got.tail == pytest.approx(excluded_weight(30, 10))


def test_d_star_agreeing_to_depth_j_is_bounded():
    # two measures with the same 1-marginals: Bernoulli and a Markov chain with that stationary law
    mu = BernoulliMeasure([0.5, 0.5])
    lam = MarkovMeasure.from_matrix([[0.7, 0.3], [0.3, 0.7]])
    d = d_star(mu, lam, 8, 2)
    assert d.upper <= 2.0**-1 + 1e-12


def test_d_star_rejects_bad_masses():
    class Broken(CylinderMeasure):
        alphabet = 2

        def mass(self, w):
            return 1.5 if w else 1.0

    with pytest.raises(MassRangeError):
        d_star(Broken(), BernoulliMeasure([0.5, 0.5]), 2, 2)


def test_orbit_against_own_periodic_measure():
    acc = accumulate_orbit(PeriodicStream((1,)), 1000, 3, 2)
    assert d_star_orbit_vs_measure(acc, PeriodicOrbitMeasure((1,))).value == 0.0


def test_orbit_against_fair_coin_closed_form():
    acc = accumulate_orbit(PeriodicStream((1,)), 100, 1, 2)
    d = d_star_orbit_vs_measure(acc, BernoulliMeasure([0.5, 0.5]))
    assert d.value == pytest.approx(0.5 * (0.303964 + 0.075991), abs=1e-6)


def test_orbit_distance_decreases_along_markov_sample(markov2):
    x = sample_stream(markov2, seed=11)
    early = d_star_orbit_vs_measure(accumulate_orbit(x, 1000, 3, 2), markov2).value
    late = d_star_orbit_vs_measure(accumulate_orbit(x, 100_000, 3, 2), markov2).value
    assert late < early


def test_orbit_cap_mismatch():
    acc = accumulate_orbit(PeriodicStream((1,)), 10, 2, 2)
    with pytest.raises(CapMismatchError):
        d_star_orbit_vs_measure(acc, BernoulliMeasure([0.5, 0.5]), depth_cap=3)


def test_bowen_bound_for_shared_prefix():
    n, n0 = 1000, 20
    x = sample_stream(BernoulliMeasure([0.5, 0.5]), seed=5).prefix(n + 10)
    y = x.copy()
    y[n:] = 3 - y[n:]
    ax = accumulate_orbit(x, n, 4, 2, lookahead=True)
    ay = accumulate_orbit(y, n, 4, 2, lookahead=True)
    assert d_star(ax.measure(), ay.measure(), 4, 2).value <= bowen_bound(n, n0)


periods = st.lists(st.integers(1, 3), min_size=1, max_size=4).map(tuple)


def finite_support(draw_weights, words):
    return MixtureMeasure(draw_weights, [PeriodicOrbitMeasure(w) for w in words])


@st.composite
def mixtures(draw):
    words = draw(st.lists(periods, min_size=1, max_size=3))
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=len(words), max_size=len(words)))
    w = np.asarray(raw) / sum(raw)
    return finite_support(w, words)


@given(mixtures(), mixtures(), mixtures())
def test_d_star_metric_axioms(a, b, c):
    ab = d_star(a, b, 4, 3).value
    assert ab == d_star(b, a, 4, 3).value
    assert ab <= d_star(a, c, 4, 3).value + d_star(c, b, 4, 3).value + 1e-12
