import numpy as np
import pytest

from ..changepoint import (OracleError, SegmentError, Segmentation, binseg,
                           brute_force_segmentation, default_penalty, detect,
                           l2_cost, pelt)
from ..synth import Intervention, WellPhysics, generate_well


STEP = [0, 0, 0, 10, 10, 10]


def test_l2_cost():
    assert l2_cost([5, 5, 5], 0, 3) == 0
    assert l2_cost([0, 10], 0, 2) == 50
    assert l2_cost([1, 0, 10, 7], 1, 3) == 50
    with pytest.raises(SegmentError):
        l2_cost([1, 2, 3], 1, 1)
    with pytest.raises(SegmentError):
        l2_cost([1, 2, 3], 0, 4)


def test_pelt_examples():
    result = pelt([5, 5, 5, 5], 1)
    assert result.breakpoints == () and result.total_cost == 0
    result = pelt(STEP, 1)
    assert result.breakpoints == (3,)
    assert result.total_cost == pytest.approx(1)
    assert result.segments == [(0, 3), (3, 6)]
    assert pelt([0, 10, 0, 10], 1000).breakpoints == ()


def test_binseg_examples():
    assert binseg([5, 5, 5, 5], 1).breakpoints == ()
    assert binseg(STEP, 1).breakpoints == (3,)
    assert binseg(STEP, 0, max_bkps=0).breakpoints == ()


def test_brute_force_examples():
    assert brute_force_segmentation([5, 5], 3.0).breakpoints == ()
    assert brute_force_segmentation(STEP, 1).breakpoints == (3,)
    with pytest.raises(OracleError):
        brute_force_segmentation(np.zeros(17), 1)


def test_invalid_inputs():
    with pytest.raises(SegmentError):
        pelt([1.0], 1)
    with pytest.raises(SegmentError):
        pelt([1.0, np.nan, 2.0], 1)
    with pytest.raises(SegmentError):
        binseg([1.0, 2.0], -1)
    with pytest.raises(SegmentError):
        Segmentation((0, 3), 0.0, 5)
    with pytest.raises(SegmentError):
        detect([1.0, 2.0, 3.0], 'kernel')


def random_series(rng, n):
    """Piecewise-constant levels plus noise."""
    levels = rng.normal(0, 5, size=rng.integers(1, 4))
    x = np.repeat(levels, -(-n // levels.size))[:n]
    return x + rng.normal(0, rng.choice([0.1, 1.0, 3.0]), size=n)


def test_pelt_is_exact():
    rng = np.random.default_rng(0)
    for _ in range(200):
        series = random_series(rng, int(rng.integers(2, 13)))
        penalty = float(rng.choice([0.0, 0.5, 2.0, 10.0, 50.0]))
        exact = brute_force_segmentation(series, penalty)
        result = pelt(series, penalty)
        assert result.total_cost == exact.total_cost
        greedy = binseg(series, penalty)
        assert greedy.total_cost >= result.total_cost - 1e-9


def test_pelt_matches_oracle_up_to_sixteen_samples():
    rng = np.random.default_rng(1)
    for n in (13, 14, 15, 16):
        series = random_series(rng, n)
        assert pelt(series, 2.0).total_cost == pytest.approx(
            brute_force_segmentation(series, 2.0).total_cost, rel=1e-9)


def test_pelt_breakpoints_decrease_with_penalty():
    rng = np.random.default_rng(2)
    for _ in range(20):
        series = random_series(rng, 60)
        counts = [len(pelt(series, p).breakpoints)
                  for p in (0.1, 1, 5, 20, 100, 1000)]
        assert counts == sorted(counts, reverse=True)


def test_breakpoints_invariant_under_shift():
    rng = np.random.default_rng(3)
    series = np.repeat([0.0, 12.0, 4.0], 20) + rng.integers(0, 4, 60)
    for detector in (pelt, binseg):
        assert (detector(series, 10).breakpoints
                == detector(series + 1000, 10).breakpoints)


def test_binseg_respects_max_bkps():
    series = np.repeat([0.0, 10.0, 0.0, 10.0], 10)
    assert len(binseg(series, 0.0, max_bkps=2).breakpoints) == 2
    assert binseg(series, 1.0).breakpoints == (10, 20, 30)


def test_default_penalty_finds_intervention():
    day = 120
    physics = WellPhysics(decline_rate=0.0, noise_std=0.0, seed=5)
    frame = generate_well(physics, [Intervention(day, bhp_shift=-300.0)],
                          n_days=300)
    series = frame.column('OPR_H')
    penalty = default_penalty(series)
    assert penalty > 0
    assert day in pelt(series, penalty).breakpoints
    segmentation, used = detect(series, 'binseg')
    assert used == penalty
    assert day in segmentation.breakpoints


def test_segmentation_to_dict():
    result = pelt(STEP, 1)
    assert result.to_dict('pelt', 1) == {
        'algorithm': 'pelt', 'penalty': 1.0, 'breakpoints': [3],
        'total_cost': result.total_cost,
    }
