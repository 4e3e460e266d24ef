import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from votedelegation.errors import UndefinedCorrelationError, ValidationError
from votedelegation.imbalance import gini, hoover, imbalance_measures, pearson, theil, variance

positive_vectors = st.lists(st.floats(0, 1), min_size=2, max_size=12).filter(lambda v: sum(v) > 1e-3)


@pytest.mark.parametrize("c", [0.1, 1.0, 7.5])
def test_perfect_equality(c):
    m = imbalance_measures([c] * 5)
    assert (m.gini, m.variance, m.theil, m.hoover) == pytest.approx((0, 0, 0, 0), abs=1e-15)


def test_hand_computed_values():
    m = imbalance_measures([1, 2, 3, 4])
    assert m.gini == pytest.approx(0.25, abs=1e-15)
    assert m.hoover == pytest.approx(0.2, abs=1e-15)
    m = imbalance_measures([2, 4])
    assert m.variance == pytest.approx(1.0, abs=1e-15)
    assert m.theil == pytest.approx(0.5 * (2 * math.log(2 / 3) + 4 * math.log(4 / 3)), abs=1e-15)
    assert m.theil == pytest.approx(0.16990, abs=1e-5)


def test_gini_sorts_internally():
    assert gini([4, 1, 3, 2]) == pytest.approx(0.25, abs=1e-15)


def test_standardized_theil_variant():
    w = [2.0, 4.0]
    mu = 3.0
    expected = 0.5 * sum((x / mu) * math.log(x / mu) for x in w)
    assert theil(w, standardized=True) == pytest.approx(expected, abs=1e-15)
    assert theil([2 * x for x in w], standardized=True) == pytest.approx(expected, abs=1e-15)
    # The unstandardized form scales linearly with the weights.
    assert theil([2 * x for x in w]) == pytest.approx(2 * theil(w), abs=1e-15)


def test_zero_entries():
    m = imbalance_measures([0, 0, 0, 1])
    assert m.gini == pytest.approx(0.75, abs=1e-15)
    assert math.isfinite(m.theil)


@pytest.mark.parametrize("bad", [[0, 0, 0], [], [-1, 2], [float("nan"), 1]])
def test_rejects_degenerate(bad):
    with pytest.raises(ValidationError):
        imbalance_measures(bad)


@given(positive_vectors, st.floats(0.01, 100))
@settings(max_examples=100, deadline=None)
def test_scale_invariance_of_gini_and_hoover(w, c):
    scaled = [c * x for x in w]
    assert gini(scaled) == pytest.approx(gini(w), abs=1e-12)
    assert hoover(scaled) == pytest.approx(hoover(w), abs=1e-12)


@given(positive_vectors, st.randoms(use_true_random=False))
@settings(max_examples=100, deadline=None)
def test_permutation_invariance(w, rnd):
    shuffled = list(w)
    rnd.shuffle(shuffled)
    a, b = imbalance_measures(w), imbalance_measures(shuffled)
    for k in ("gini", "variance", "theil", "hoover"):
        assert getattr(a, k) == pytest.approx(getattr(b, k), rel=1e-12, abs=1e-14)


@given(positive_vectors)
@settings(max_examples=100, deadline=None)
def test_ranges(w):
    n = len(w)
    assert -1e-12 <= gini(w) <= (n - 1) / n + 1e-12
    assert 0 <= hoover(w) < 1
    assert variance(w) >= 0


@pytest.mark.parametrize("n", [2, 4, 9])
def test_single_holder_extreme(n):
    w = [0.0] * (n - 1) + [3.0]
    assert gini(w) == pytest.approx((n - 1) / n, abs=1e-15)


def test_pearson_examples():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-15)
    assert pearson([1, 2, 3], [6, 4, 2]) == pytest.approx(-1.0, abs=1e-15)
    assert pearson([1, 2, 3], [1, 1, 2]) == pytest.approx(math.sqrt(3) / 2, abs=1e-15)


def test_pearson_matches_numpy():
    rng = np.random.default_rng(0)
    x, y = rng.random(50), rng.random(50)
    assert pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)


@pytest.mark.parametrize("xs, ys", [([1, 1, 1], [1, 2, 3]), ([1, 2, 3], [5, 5, 5]), ([1], [2])])
def test_pearson_undefined(xs, ys):
    with pytest.raises(UndefinedCorrelationError, match="undefined"):
        pearson(xs, ys)


def test_pearson_length_mismatch():
    with pytest.raises(ValidationError):
        pearson([1, 2, 3], [1, 2])


@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=2, max_size=30))
@settings(max_examples=100, deadline=None)
def test_pearson_range(pairs):
    xs, ys = zip(*pairs)
    try:
        r = pearson(xs, ys)
    except UndefinedCorrelationError:
        return
    assert -1.0 <= r <= 1.0


def test_pearson_tiny_spread():
    assert pearson([0.0, 1.0], [0.0, 2e-287]) == pytest.approx(1.0, abs=1e-15)
    assert pearson([0.0, 1.0, 2.0], [1e300, -1e300, 1e300]) == pytest.approx(0.0, abs=1e-15)
