import math

import numpy as np
import pytest

from genericdim.words import (
    all_words,
    as_word,
    excluded_weight,
    format_word,
    letter_mass_sum,
    level_weights,
    parse_word,
    weight,
    word_code,
)


def test_weight_of_single_letter():
    assert weight((1,)) == pytest.approx(0.5 * 6 / math.pi**2, rel=1e-15)
    assert weight((1,)) == pytest.approx(0.303964, abs=1e-6)


def test_empty_word_has_zero_weight():
    assert weight(()) == 0.0


@pytest.mark.parametrize("n", range(1, 9))
def test_level_weight_totals(n):
    # sum over |w| = n with letters <= N is (1/2 * (6/pi^2) * sum_{m<=N} m^-2)^n
    N = 100_000
    per_letter = 0.5 * letter_mass_sum(N)
    assert abs(per_letter**n - 2.0**-n) < 1e-4


def test_level_weights_sum_matches_closed_form():
    for k in (1, 2, 3):
        assert level_weights(k, 10).sum() == pytest.approx((0.5 * letter_mass_sum(10)) ** k, rel=1e-12)


def test_partial_sums_increase_with_cap():
    vals = [level_weights(2, N).sum() for N in (2, 4, 8, 16)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_excluded_weight_complements_family():
    # family {Sigma_N^k : k <= K} plus excluded weight is 1
    K, N = 3, 5
    inside = sum(level_weights(k, N).sum() for k in range(1, K + 1))
    assert inside + excluded_weight(K, N) == pytest.approx(1.0, abs=1e-12)


def test_word_round_trip():
    w = (3, 1, 4, 1, 5)
    assert parse_word(format_word(w)) == w
    assert format_word(()) == ""
    assert parse_word("") == ()


def test_word_rejects_zero_digit():
    with pytest.raises(ValueError):
        as_word((1, 0, 2))


def test_word_codes_follow_lexicographic_order():
    W = all_words(3, 3)
    codes = [word_code(tuple(r), 3) for r in W]
    assert codes == list(range(27))
    assert np.all(W[0] == 1) and np.all(W[-1] == 3)
