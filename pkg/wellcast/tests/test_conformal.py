from fractions import Fraction

import numpy as np
import pytest

from ..conformal import (CalibrationError, IntervalForecast, ReportError,
                         calibrate, conformal_rank, coverage_report,
                         coverage_shortfall, nonconformity_scores,
                         predict_interval)


def test_nonconformity_scores():
    assert list(nonconformity_scores([1, 2, 3], [1, 2, 3])) == [0, 0, 0]
    assert list(nonconformity_scores([0, 0], [-2, 3])) == [2, 3]
    with pytest.raises(CalibrationError):
        nonconformity_scores([], [])
    with pytest.raises(CalibrationError):
        nonconformity_scores([1, 2], [1])


def test_calibrate_examples():
    cal = calibrate(np.arange(1, 20), 0.05)
    assert (cal.k, cal.epsilon, cal.n_cal) == (19, 19.0, 19)
    assert calibrate([5.0], 0.5).epsilon == 5.0
    with pytest.raises(CalibrationError, match='need n ≥ 11'):
        calibrate(np.arange(10), 0.05)


def test_calibrate_rejects_bad_scores():
    with pytest.raises(CalibrationError):
        calibrate([], 0.1)
    with pytest.raises(CalibrationError):
        calibrate([1.0, -1.0], 0.5)
    with pytest.raises(CalibrationError):
        calibrate([1.0, np.inf], 0.5)
    with pytest.raises(CalibrationError):
        calibrate([1.0, 2.0], 1.0)


def test_rank_uses_exact_arithmetic():
    # 20 * 0.95 is 18.999999999999996 in floating point
    assert conformal_rank(19, 0.05) == 19
    assert conformal_rank(9, 0.1) == 9
    assert conformal_rank(99, 0.01) == 99


@pytest.mark.parametrize('alpha', ['0.5', '0.2', '0.1', '0.05'])
def test_calibrate_matches_sort_and_rank(alpha):
    exact = Fraction(alpha)
    rng = np.random.default_rng(0)
    for n in range(1, 101):
        scores = rng.exponential(size=n)
        # smallest k with k >= (n + 1)(1 - alpha)
        k = 1
        while k < (n + 1) * (1 - exact):
            k += 1
        if k > n:
            with pytest.raises(CalibrationError):
                calibrate(scores, float(alpha))
            continue
        cal = calibrate(scores, float(alpha))
        assert cal.k == k
        assert cal.epsilon == sorted(scores)[k - 1]


def test_epsilon_decreases_with_alpha():
    scores = np.random.default_rng(1).lognormal(size=200)
    margins = [calibrate(scores, a).epsilon
               for a in (0.01, 0.05, 0.1, 0.2, 0.5, 0.9)]
    assert margins == sorted(margins, reverse=True)


def test_predict_interval():
    cal = calibrate([2.0], 0.5)
    iv = predict_interval([10.0, -5.0], cal)
    assert list(iv.lower) == [8.0, -7.0]
    assert list(iv.upper) == [12.0, -3.0]
    assert iv.alpha == 0.5
    clamped = iv.clamped()
    assert list(clamped.lower) == [8.0, 0.0]
    assert list(clamped.point) == [10.0, 0.0]
    zero = predict_interval([1.0, 2.0], calibrate([0.0], 0.5))
    assert list(zero.lower) == list(zero.point) == list(zero.upper)


def test_coverage_report():
    iv = IntervalForecast(np.zeros(2), -np.ones(2), np.ones(2), 0.05)
    report = coverage_report(iv, [0.5, 2.0])
    assert report.coverage == 0.5
    assert report.out_of_bounds == [1]
    # bounds are closed
    assert coverage_report(iv, [1.0, -1.0]).coverage == 1.0
    huge = predict_interval(np.zeros(3), calibrate([1e300], 0.5))
    assert coverage_report(huge, [1e6, -1e6, 0]).coverage == 1.0


def test_coverage_report_errors():
    iv = IntervalForecast(np.zeros(2), -np.ones(2), np.ones(2), 0.05)
    with pytest.raises(ReportError):
        coverage_report(iv, [0.0])
    with pytest.raises(ReportError):
        coverage_report(iv, [0.0, np.nan])
    empty = IntervalForecast(np.zeros(0), np.zeros(0), np.zeros(0), 0.05)
    with pytest.raises(ReportError):
        coverage_report(empty, [])


def test_coverage_invariant_under_shift():
    rng = np.random.default_rng(2)
    point = rng.normal(size=100)
    actual = point + rng.normal(size=100)
    cal = calibrate(np.abs(rng.normal(size=50)), 0.1)
    base = coverage_report(predict_interval(point, cal), actual)
    shifted = coverage_report(predict_interval(point + 64.0, cal),
                              actual + 64.0)
    assert shifted == base


def test_coverage_shortfall():
    assert not coverage_shortfall(0.95, 0.05)
    assert not coverage_shortfall(0.91, 0.05)
    assert coverage_shortfall(0.89, 0.05)


DISTRIBUTIONS = {
    'uniform': lambda rng, n: rng.uniform(-1, 1, n),
    'lognormal': lambda rng, n: rng.lognormal(0, 1, n),
    'bimodal': lambda rng, n: np.where(rng.random(n) < 0.5,
                                       rng.normal(-3, 0.5, n),
                                       rng.normal(3, 0.5, n)),
}


@pytest.mark.parametrize('name', sorted(DISTRIBUTIONS))
def test_marginal_coverage(name):
    draw = DISTRIBUTIONS[name]
    rng = np.random.default_rng(123)
    coverage = []
    for _ in range(1000):
        point = rng.normal(0, 10, 600)
        actual = point + draw(rng, 600)
        cal = calibrate(nonconformity_scores(actual[:500], point[:500]),
                        0.05)
        report = coverage_report(predict_interval(point[500:], cal),
                                 actual[500:])
        coverage.append(report.coverage)
    assert np.mean(coverage) >= 0.93
