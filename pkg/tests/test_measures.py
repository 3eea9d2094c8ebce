import math

import numpy as np
import pytest

from genericdim.measures import (
    BernoulliMeasure,
    HiddenMarkovMeasure,
    InconsistentMeasureError,
    MarkovMeasure,
    MixtureMeasure,
    PeriodicOrbitMeasure,
    TableMeasure,
    block_entropy,
    consistency_defect,
    entropy_cylinder,
    entropy_markov,
    full_support_mix,
    invariance_defect,
    markov_approximation,
    stationary_vector,
)
from genericdim.symbolic import d_star
from genericdim.words import all_words, depth_tail, excluded_weight

H = lambda *p: -sum(x * math.log(x) for x in p)  # noqa: E731

hidden = HiddenMarkovMeasure([[0.1, 0.6, 0.3], [0.4, 0.2, 0.4], [0.5, 0.25, 0.25]], emission=[1, 2, 2])

FAMILIES = {
    "bernoulli": (BernoulliMeasure([0.5, 0.3, 0.2]), 6, 3),
    "markov": (MarkovMeasure.from_matrix([[0.9, 0.1], [0.5, 0.5]]), 8, 2),
    "markov-order2": (markov_approximation(hidden, 3, 2), 6, 2),
    "periodic": (PeriodicOrbitMeasure((1, 2, 2)), 6, 2),
    "hidden": (hidden, 6, 2),
    "zeta": (BernoulliMeasure.zeta(2.0), 3, 50),
    "mixture": (full_support_mix(PeriodicOrbitMeasure((1, 3)), 0.2), 3, 20),
}


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_consistency_and_invariance(name):
    mu, k, N = FAMILIES[name]
    assert mu.mass(()) == 1.0
    assert consistency_defect(mu, k, N) < 1e-10
    assert invariance_defect(mu, k - 1, N) < 1e-10


def test_fair_coin_entropy_every_depth(fair):
    for k in (1, 3, 7):
        h, defect = entropy_cylinder(fair, k, 2)
        assert h == pytest.approx(math.log(2), abs=1e-15) and defect == 0.0


def test_markov_entropy_closed_form(markov2):
    pi = markov2.pi
    assert pi == pytest.approx([5 / 6, 1 / 6])
    closed = pi[0] * H(0.9, 0.1) + pi[1] * H(0.5, 0.5)
    assert entropy_markov(markov2) == pytest.approx(closed, rel=1e-13)
    assert entropy_markov(markov2) == pytest.approx(0.38645, abs=1e-3)


def test_cylinder_entropy_converges_to_markov_entropy(markov2):
    h = entropy_markov(markov2)
    gap12 = entropy_cylinder(markov2, 12, 2)[0] - h
    gap4 = entropy_cylinder(markov2, 4, 2)[0] - h
    assert 0 <= gap12 < 1e-2 and gap12 < gap4


def test_periodic_cylinder_entropy():
    mu = PeriodicOrbitMeasure((1, 2))
    for k in (2, 4, 6):
        assert entropy_cylinder(mu, k, 2)[0] == pytest.approx(math.log(2) / k, rel=1e-14)
    assert entropy_markov(mu.as_markov()) == 0.0


def test_bernoulli_entropy():
    p = [0.5, 0.3, 0.2]
    assert entropy_markov(MarkovMeasure.bernoulli(p)) == pytest.approx(H(*p), rel=1e-14)
    assert BernoulliMeasure(p).entropy() == pytest.approx(H(*p), rel=1e-14)


def test_markov_rows_and_stationarity(markov3):
    assert np.allclose(markov3.step_prob.sum(axis=1), 1.0, atol=1e-12)
    P = np.asarray([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.2, 0.5]])
    pi = stationary_vector(P)
    assert np.allclose(pi @ P, pi, atol=1e-10)
    assert markov3.transition_graph_primitive()


def test_markov_rejects_bad_rows():
    with pytest.raises(ValueError):
        MarkovMeasure.from_matrix([[0.5, 0.6], [0.5, 0.5]])


def test_markov_round_trip(markov2):
    back = MarkovMeasure.loads(markov2.dumps())
    for w in map(tuple, all_words(5, 2)):
        assert back.mass(w) == markov2.mass(w)


def test_table_round_trip():
    t = TableMeasure.from_measure(BernoulliMeasure.zeta(2.0), 2, 6)
    back = TableMeasure.loads(t.dumps())
    assert back.defects == pytest.approx(t.defects)
    assert back.mass((2, 3)) == t.mass((2, 3))


def test_table_rejects_deeper_words():
    t = TableMeasure.from_measure(hidden, 3, 2)
    with pytest.raises(ValueError):
        t.mass((1, 1, 1, 1))


def test_periodic_masses_are_cyclic_fractions():
    mu = PeriodicOrbitMeasure((1, 2, 2))
    assert mu.mass((2,)) == pytest.approx(2 / 3)
    assert mu.mass((2, 2)) == pytest.approx(1 / 3)
    assert mu.mass((1, 1)) == 0.0


def test_markov_sampling_frequencies(markov2, rng):
    x = markov2.sample(50_000, rng)
    assert abs(np.mean(x == 1) - 5 / 6) < 0.01


@pytest.mark.parametrize("j", [2, 3, 4])
def test_markov_approximation_is_idempotent_on_markov(markov2, j):
    mj = markov_approximation(markov2, j, 2)
    for w in map(tuple, all_words(8, 2)):
        assert mj.mass(w) == pytest.approx(markov2.mass(w), abs=1e-12)


def test_markov_approximation_first_level_is_bernoulli(markov2):
    m1 = markov_approximation(markov2, 1, 2)
    assert m1.mass((1, 2)) == pytest.approx(markov2.mass((1,)) * markov2.mass((2,)), abs=1e-15)


def test_markov_approximation_of_table_measure():
    table = TableMeasure.from_measure(hidden, 3, 2)
    m2 = markov_approximation(table, 2, 2)
    for k in (1, 2):
        for w in map(tuple, all_words(k, 2)):
            assert m2.mass(w) == pytest.approx(table.mass(w), abs=1e-12)
    d = d_star(m2, table, 3, 2)
    assert d.value <= depth_tail(2) + d.tail


def test_markov_approximation_detects_inconsistent_input():
    bad = TableMeasure({(1,): 0.0, (2,): 1.0, (1, 2): 0.2, (2, 2): 0.8, (1, 1): 0.0, (2, 1): 0.0}, 2)
    with pytest.raises(InconsistentMeasureError):
        markov_approximation(bad, 2, 2)


def test_full_support_mix_charges_every_cylinder():
    mu = full_support_mix(PeriodicOrbitMeasure((1,)), 0.1)
    assert all(mu.mass(tuple(w)) > 0 for w in all_words(3, 4))
    with pytest.raises(ValueError):
        full_support_mix(mu, 0.0)


def test_mixture_rejects_non_convex_weights():
    with pytest.raises(ValueError):
        MixtureMeasure([0.7, 0.7], [PeriodicOrbitMeasure((1,)), PeriodicOrbitMeasure((2,))])


def test_block_entropy_reports_zeta_defect():
    H4, defect = block_entropy(BernoulliMeasure.zeta(2.0), 1, 10)
    assert defect == pytest.approx(1 - sum(6 / math.pi**2 / n**2 for n in range(1, 11)), rel=1e-12)
    assert excluded_weight(1, 10) > 0.5
