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
"""Forecast error and performance metrics."""

from dataclasses import asdict, dataclass

import numpy as np

from ._utils import WellcastError


TAGS = ('test', 'forecast', 'simulated-vs-actual')
METRICS = ('mae', 'rmse', 'smape', 'forecast_bias', 'pda')
BIAS_LEGEND = 'positive bias = actual exceeds forecast (under-prediction)'


class MetricError(WellcastError, ValueError):
    """Invalid inputs to a metric."""


def _pair(y, y_hat, min_length=1):
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.ndim != 1 or y.shape != y_hat.shape:
        raise MetricError('y and y_hat must be vectors of equal length')
    if y.size < min_length:
        raise MetricError(f'need at least {min_length} values, got {y.size}')
    return y, y_hat


def mae(y, y_hat):
    y, y_hat = _pair(y, y_hat)
    return float(np.mean(np.abs(y - y_hat)))


def rmse(y, y_hat):
    """Root mean squared error; never below the MAE of the same pair."""
    y, y_hat = _pair(y, y_hat)
    e = y - y_hat
    return float(max(np.sqrt(np.mean(e ** 2)), np.mean(np.abs(e))))


def smape(y, y_hat):
    """Symmetric MAPE in percent, between 0 and 200.

    Terms where both values are zero contribute zero.
    """
    y, y_hat = _pair(y, y_hat)
    denominator = np.abs(y) + np.abs(y_hat)
    numerator = 2 * np.abs(y_hat - y)
    terms = np.divide(numerator, denominator,
                      out=np.zeros_like(numerator), where=denominator > 0)
    return float(100 * terms.mean())


def forecast_bias(y, y_hat):
    """Mean of y - y_hat; positive when the forecast is too low."""
    y, y_hat = _pair(y, y_hat)
    return float(np.mean(y - y_hat))


def pda(y, y_hat):
    """Percentage of steps whose direction of change is predicted.

    A step counts as correct when sign(y[t] - y[t-1]) equals
    sign(y_hat[t] - y_hat[t-1]); flat matches flat.
    """
    y, y_hat = _pair(y, y_hat, min_length=2)
    hits = np.sign(np.diff(y)) == np.sign(np.diff(y_hat))
    return float(100 * hits.mean())


@dataclass(frozen=True)
class MetricReport:
    mae: float
    rmse: float
    smape: float
    forecast_bias: float
    pda: float
    n: int
    tag: str

    def __post_init__(self):
        if self.tag not in TAGS:
            raise MetricError(f'unknown dataset tag {self.tag!r}')

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in ('mae', 'rmse', 'smape',
                                         'forecast_bias', 'pda', 'n', 'tag')})

    def to_row(self, model, digits=3):
        """A comparison-table row: model, dataset, then the metrics."""
        row = {'model': model, 'dataset': self.tag, 'n': self.n}
        row.update({m: round(getattr(self, m), digits) for m in METRICS})
        return row


def metric_report(y, y_hat, tag):
    """Bundle all five metrics for one model on one dataset."""
    if tag not in TAGS:
        raise MetricError(f'unknown dataset tag {tag!r}')
    y, y_hat = _pair(y, y_hat, min_length=2)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(y_hat))):
        raise MetricError('metrics need finite values')
    return MetricReport(mae(y, y_hat), rmse(y, y_hat), smape(y, y_hat),
                        forecast_bias(y, y_hat), pda(y, y_hat), int(y.size),
                        tag)
