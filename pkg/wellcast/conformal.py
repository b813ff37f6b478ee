# -*- coding: utf-8 -*-
#
# Copyright 2024 the wellcast developers
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.
"""Inductive conformal prediction intervals for point forecasts.

Absolute residuals on a calibration set give a margin epsilon such
that [y_hat - epsilon, y_hat + epsilon] contains the true value with
probability at least 1 - alpha, provided calibration and future
points are exchangeable.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Tuple

import numpy as np
from structlog import get_logger

from ._utils import WellcastError


EXCHANGEABILITY_CAVEAT = (
    'Coverage is guaranteed only if calibration and forecast points are '
    'exchangeable; production series are autocorrelated and may drift, '
    'so realised coverage can fall short of the nominal level.'
)
SHORTFALL_POINTS = 5.0


class CalibrationError(WellcastError, ValueError):
    """Calibration scores are invalid or too few for the requested alpha."""


class ReportError(WellcastError, ValueError):
    """Intervals and actual values cannot be compared."""


def conformal_rank(n, alpha):
    """Return k = ceil((n + 1)(1 - alpha)), computed exactly.

    'alpha' is read as the nearest fraction with a denominator up to
    1e9, so 0.05 means exactly 1/20.
    """
    if not 0 < alpha < 1:
        raise CalibrationError(f'alpha must lie in (0, 1), got {alpha}')
    a = Fraction(alpha).limit_denominator(10 ** 9)
    return math.ceil((n + 1) * (1 - a))


@dataclass(frozen=True)
class ConformalCalibration:
    alpha: float
    scores: Tuple[float, ...]
    epsilon: float
    n_cal: int

    @property
    def k(self):
        return conformal_rank(self.n_cal, self.alpha)

    def to_dict(self):
        return {'alpha': self.alpha, 'epsilon': self.epsilon,
                'n_cal': self.n_cal, 'k': self.k}


@dataclass(frozen=True, eq=False)
class IntervalForecast:
    """Symmetric intervals lower = point - epsilon, upper = point + epsilon."""
    point: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    alpha: float

    def __len__(self):
        return self.point.shape[0]

    def clamped(self, floor=0.0):
        """Bounds (and points) clipped from below, for physical rates."""
        return IntervalForecast(np.maximum(self.point, floor),
                                np.maximum(self.lower, floor),
                                np.maximum(self.upper, floor), self.alpha)


class CoverageReport(NamedTuple):
    coverage: float
    out_of_bounds: List[int]


def nonconformity_scores(y, y_hat):
    """Sorted absolute residuals |y - y_hat|.

    Raises
    ------
    CalibrationError if the inputs are empty or differ in length.
    """
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape or y.ndim != 1:
        raise CalibrationError('y and y_hat must be vectors of equal length')
    if y.size == 0:
        raise CalibrationError('need at least one calibration point')
    scores = np.sort(np.abs(y - y_hat))
    if not np.all(np.isfinite(scores)):
        raise CalibrationError('calibration residuals are not finite')
    return scores


def calibrate(scores, alpha):
    """Compute the conformal margin for miscoverage level 'alpha'.

    epsilon is the k-th smallest score with k = ceil((n + 1)(1 - alpha)).

    Raises
    ------
    CalibrationError if k > n, i.e. there are too few calibration
    points for the requested alpha.
    """
    scores = np.sort(np.asarray(scores, dtype=float))
    if scores.ndim != 1 or scores.size == 0:
        raise CalibrationError('need at least one calibration score')
    if np.any(scores < 0) or not np.all(np.isfinite(scores)):
        raise CalibrationError('scores must be finite and non-negative')
    n = scores.size
    k = conformal_rank(n, alpha)
    if k > n:
        raise CalibrationError(f'too few calibration points for alpha={alpha}: '
                               f'need n ≥ {k}, got n = {n}')
    epsilon = float(scores[k - 1])
    get_logger(__name__).debug('calibrated', n=n, alpha=alpha, k=k,
                               epsilon=epsilon)
    return ConformalCalibration(float(alpha), tuple(float(s) for s in scores),
                                epsilon, n)


def predict_interval(point, cal: ConformalCalibration):
    point = np.asarray(point, dtype=float)
    return IntervalForecast(point, point - cal.epsilon, point + cal.epsilon,
                            cal.alpha)


def coverage_report(intervals: IntervalForecast, actual):
    """Fraction of actual values inside their closed interval.

    Returns
    -------
    CoverageReport
        (coverage, out_of_bounds) where out_of_bounds lists the indices
        of the values falling outside.

    Raises
    ------
    ReportError if the inputs are empty, differ in length or contain
    missing values.
    """
    actual = np.asarray(actual, dtype=float)
    if actual.shape != intervals.point.shape or actual.ndim != 1:
        raise ReportError('one actual value per interval is required')
    if actual.size == 0:
        raise ReportError('no intervals to evaluate')
    if np.isnan(actual).any():
        raise ReportError('actual values contain missing entries')
    inside = (intervals.lower <= actual) & (actual <= intervals.upper)
    return CoverageReport(float(inside.mean()),
                          [int(i) for i in np.flatnonzero(~inside)])


def coverage_shortfall(coverage, alpha):
    """True if coverage is more than five points below 1 - alpha."""
    return bool(100 * ((1 - alpha) - coverage) > SHORTFALL_POINTS)
