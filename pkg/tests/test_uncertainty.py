import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from seren.uncertainty import (
    CountBonus,
    EnsembleQ,
    EnsembleVariance,
    VisitCounts,
    count_bonus,
    ensemble_mean,
    ensemble_variance,
    freeze,
)


def ensemble_from_values(values):
    """One-state, one-action ensemble holding ``values`` across members."""
    return EnsembleQ(np.asarray(values, dtype=float).reshape(-1, 1, 1))


@pytest.mark.parametrize("values, mean, var", [
    ([2.5, 2.5, 2.5], 2.5, 0.0),
    ([0.0, 1.0], 0.5, 0.5),
    # hand-evaluated: deviations -2..2, squares sum to 10, divided by E-1 = 4
    ([1.0, 2.0, 3.0, 4.0, 5.0], 3.0, 2.5),
])
def test_mean_and_variance_examples(values, mean, var):
    q = ensemble_from_values(values)
    assert ensemble_mean(q, 0, 0) == pytest.approx(mean)
    assert ensemble_variance(q, 0, 0) == pytest.approx(var)


def test_ensemble_needs_two_members():
    with pytest.raises(ValueError):
        EnsembleQ(np.zeros((1, 3, 2)))


def test_count_bonus_examples():
    v = VisitCounts(2, 2)
    assert count_bonus(v, 0, 0) == 1.0
    for _ in range(3):
        v.record(0, 0)
    assert count_bonus(v, 0, 0) == pytest.approx(0.5)


def test_count_bonus_strictly_decreasing_to_zero():
    v = VisitCounts(1, 1)
    previous = count_bonus(v, 0, 0)
    for _ in range(2000):
        v.record(0, 0)
        current = count_bonus(v, 0, 0)
        assert 0 < current < previous
        previous = current
    assert previous < 0.023


def test_freeze_snapshot_semantics():
    counts = VisitCounts(3, 2)
    counts.record(1, 1)
    measure = CountBonus(counts)
    frozen = freeze(measure)
    np.testing.assert_array_equal(frozen.table(), measure.table())
    counts.record(1, 1)
    counts.record(0, 0)
    assert frozen.value(1, 1) == pytest.approx(1 / np.sqrt(2))
    assert frozen.value(0, 0) == 1.0
    with pytest.raises(ValueError):
        frozen.L[0, 0] = 3.0


def test_freeze_of_equal_ensemble_is_zero():
    q = EnsembleQ(np.ones((4, 3, 2)) * 7.0)
    np.testing.assert_array_equal(freeze(EnsembleVariance(q)).table(), 0.0)


def test_live_measure_matches_table():
    rng = np.random.default_rng(0)
    q = EnsembleQ.random(5, 4, 3, 1.0, rng)
    m = EnsembleVariance(q)
    table = m.table()
    for s in range(4):
        for a in range(3):
            assert m.value(s, a) == pytest.approx(table[s, a])


member_tables = arrays(np.float64, (4, 3, 2), elements=st.floats(-1e3, 1e3))


@settings(max_examples=100, deadline=None)
@given(members=member_tables, shift=st.floats(-1e3, 1e3))
def test_variance_non_negative_and_translation_invariant(members, shift):
    q = EnsembleQ(members)
    shifted = EnsembleQ(members + shift)
    assert np.all(q.variance_table() >= 0)
    np.testing.assert_allclose(shifted.variance_table(), q.variance_table(), rtol=1e-6, atol=1e-6)


@settings(max_examples=50, deadline=None)
@given(counts=arrays(np.int64, (3, 3), elements=st.integers(0, 10**6)))
def test_count_bonus_in_unit_interval(counts):
    v = VisitCounts(3, 3)
    v.counts[:] = counts
    table = CountBonus(v).table()
    assert np.all(table > 0) and np.all(table <= 1)


def test_max_uncertainty_shrinks_as_members_converge():
    rng = np.random.default_rng(5)
    members = rng.normal(size=(5, 6, 3))
    centre = members.mean(axis=0)
    maxima = []
    for lam in np.linspace(1.0, 0.0, 11):
        q = EnsembleQ(centre + lam * (members - centre))
        maxima.append(q.variance_table().max())
    assert all(b < a for a, b in zip(maxima, maxima[1:]))
    assert maxima[-1] == pytest.approx(0.0, abs=1e-24)
