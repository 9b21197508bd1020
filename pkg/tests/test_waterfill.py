import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from serate.errors import AllModesDisabled, DistortionOutOfRange, NegativeBudget
from serate.waterfill import rate_from_allocation, waterfill_direct, waterfill_inverse, waterfill_weighted

pos = st.floats(0.05, 5.0)


def test_direct_small_example():
    alloc = waterfill_direct([0.5, 2.0], 1.0)
    assert alloc.water_level == pytest.approx(1.5)
    np.testing.assert_allclose(alloc.levels, [1.0, 0.0])


def test_direct_equal_floors_split_evenly():
    alloc = waterfill_direct([1.0, 1.0, 1.0], 3.0)
    np.testing.assert_allclose(alloc.levels, 1.0)


def test_direct_zero_budget_and_negative():
    assert np.all(waterfill_direct([1.0, 2.0], 0.0).levels == 0)
    with pytest.raises(NegativeBudget):
        waterfill_direct([1.0], -1.0)


def test_direct_infinite_floor_excluded():
    alloc = waterfill_direct([1.0, np.inf], 2.0)
    np.testing.assert_allclose(alloc.levels, [2.0, 0.0])


def test_weighted_small_example():
    alloc = waterfill_weighted([1.0, 1.0], [2.0, 1.0], 3.0)
    assert alloc.water_level == pytest.approx(5 / 3)
    np.testing.assert_allclose(alloc.levels, [7 / 3, 2 / 3])


def test_weighted_unit_weights_match_direct():
    floors = np.array([0.3, 1.2, 2.5, 0.9])
    a = waterfill_weighted(floors, np.ones(4), 2.0)
    b = waterfill_direct(floors, 2.0)
    np.testing.assert_allclose(a.levels, b.levels, atol=1e-12)


def test_weighted_all_disabled():
    with pytest.raises(AllModesDisabled):
        waterfill_weighted([1.0, 1.0], [0.0, 0.0], 1.0)


def test_inverse_examples():
    np.testing.assert_allclose(waterfill_inverse([4.0, 1.0], 1.0).levels, [0.5, 0.5])
    np.testing.assert_allclose(waterfill_inverse([4.0, 1.0], 4.5).levels, [3.5, 1.0])
    np.testing.assert_allclose(waterfill_inverse([4.0, 1.0], 5.0).levels, [4.0, 1.0])
    with pytest.raises(DistortionOutOfRange):
        waterfill_inverse([4.0, 1.0], 6.0)
    with pytest.raises(DistortionOutOfRange):
        waterfill_inverse([4.0, 1.0], 0.0)


def test_rate_zero_at_full_distortion():
    s = np.array([2.0, 1.0])
    assert rate_from_allocation(s, waterfill_inverse(s, 3.0)) == 0.0


def _grid_best_mi(floors, budget, n=400):
    # exhaustive 2-mode grid oracle
    p = np.linspace(0, budget, n + 1)
    vals = np.log1p(p / floors[0]) + np.log1p((budget - p) / floors[1])
    return vals.max()


@settings(max_examples=60, deadline=None)
@given(pos, pos, st.floats(0.1, 10.0))
def test_direct_matches_grid_oracle(f1, f2, budget):
    floors = np.array([f1, f2])
    alloc = waterfill_direct(floors, budget)
    mi = np.sum(np.log1p(alloc.levels / floors))
    assert mi >= _grid_best_mi(floors, budget) - 1e-12
    assert alloc.budget_used == pytest.approx(budget, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(pos, min_size=1, max_size=8), st.floats(0.01, 20.0), st.data())
def test_weighted_kkt(floors, budget, data):
    floors = np.array(floors)
    weights = np.array(data.draw(st.lists(pos, min_size=floors.size, max_size=floors.size)))
    alloc = waterfill_weighted(floors, weights, budget)
    assert abs(alloc.budget_used - budget) <= 1e-12 * max(1.0, budget)
    mu = alloc.water_level
    expected = np.maximum(weights * mu - floors, 0.0)
    np.testing.assert_allclose(alloc.levels, expected, atol=1e-10 * max(1.0, budget))


@settings(max_examples=60, deadline=None)
@given(st.lists(pos, min_size=1, max_size=8), st.floats(0.01, 1.0))
def test_inverse_closes_distortion(variances, frac):
    s = np.array(variances)
    target = frac * s.sum()
    alloc = waterfill_inverse(s, target)
    assert abs(alloc.budget_used - target) <= 1e-12 * s.sum()
    assert np.all(alloc.levels <= s + 1e-15)
    # reverse water-filling beats any other split on a grid for two modes
    if s.size == 2:
        d1 = np.linspace(max(target - s[1], 1e-9), min(s[0], target - 1e-9), 300)
        rates = np.maximum(np.log(s[0] / d1), 0) + np.maximum(np.log(s[1] / (target - d1)), 0)
        assert rate_from_allocation(s, alloc) <= rates.min() + 1e-9
