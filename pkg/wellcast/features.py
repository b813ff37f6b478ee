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
"""Reservoir-physics features, model input selection and scaling."""

import warnings
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from structlog import get_logger

from ._utils import WellcastError
from .ingest import SeriesFrame


class FeatureError(WellcastError, ValueError):
    """The requested model inputs cannot be built from the frame."""


class ScalerError(WellcastError, ValueError):
    """A column cannot be standardized."""


class IPRDomainError(WellcastError, ValueError):
    """Pressures outside the domain of an inflow performance relationship."""


class InjectionRegimeWarning(UserWarning):
    """Flowing pressure above reservoir pressure: the well is injecting."""


@dataclass(frozen=True)
class PIInputs:
    """Rate and pressures entering the Productivity Index.

    Parameters
    ----------
    q : float
        Production rate, bbl/day or m3/day.
    p_res : float
        Average reservoir pressure, psi or kPa.
    p_wf : float
        Flowing bottom-hole pressure, in the same unit as 'p_res'.
    """
    q: float
    p_res: float
    p_wf: float


def productivity_index(inputs: PIInputs):
    """Return the rate produced per unit pressure drawdown, q / (p_res - p_wf).

    Raises
    ------
    ZeroDivisionError if p_res == p_wf.

    Warns
    -----
    InjectionRegimeWarning if p_res < p_wf; the (negative) value is
    still returned.
    """
    drawdown = inputs.p_res - inputs.p_wf
    if drawdown == 0:
        raise ZeroDivisionError('productivity index undefined: p_res == p_wf')
    if drawdown < 0:
        warnings.warn(f'p_wf={inputs.p_wf} exceeds p_res={inputs.p_res}',
                      InjectionRegimeWarning, stacklevel=2)
    return inputs.q / drawdown


def _pressure_ratio(p_wf, p_res):
    p_wf = np.asarray(p_wf, dtype=float)
    p_res = np.asarray(p_res, dtype=float)
    if np.any(p_res <= 0):
        raise IPRDomainError('reservoir pressure must be positive')
    r = p_wf / p_res
    if np.any((r < 0) | (r > 1)) or np.any(np.isnan(r)):
        raise IPRDomainError('p_wf / p_res must lie in [0, 1]')
    return r


def wiggins_oil_ratio(p_wf, p_res):
    """Return q_o / q_o,max = 1 - 0.52 r - 0.48 r^2 with r = p_wf / p_res.

    Accepts scalars or arrays; returns the same shape.

    Raises
    ------
    IPRDomainError if r falls outside [0, 1] or p_res <= 0.
    """
    r = _pressure_ratio(p_wf, p_res)
    # factored form of the quadratic: exact at both endpoints
    ratio = (1.0 - r) * (1.0 + 0.48 * r)
    return float(ratio) if ratio.ndim == 0 else ratio


def wiggins_water_ratio(p_wf, p_res):
    """Return q_w / q_w,max = 1 - 0.72 r - 0.28 r^2 with r = p_wf / p_res."""
    r = _pressure_ratio(p_wf, p_res)
    ratio = (1.0 - r) * (1.0 + 0.28 * r)
    return float(ratio) if ratio.ndim == 0 else ratio


def add_ipr_features(frame: SeriesFrame, p_res, bhp_column, suffix=''):
    """Add Wiggins oil and water ratio columns computed from a BHP column.

    The new columns are named 'WIGGINS_OIL<suffix>' and
    'WIGGINS_WATER<suffix>'. Flowing pressures are clipped to
    [0, p_res] first, so days above reservoir pressure map to a zero
    ratio rather than failing. Days with no BHP reading get no ratio.
    """
    bhp = np.clip(frame.column(bhp_column), 0, p_res)
    observed = ~np.isnan(bhp)
    oil = np.full(bhp.shape, np.nan)
    water = np.full(bhp.shape, np.nan)
    oil[observed] = wiggins_oil_ratio(bhp[observed], p_res)
    water[observed] = wiggins_water_ratio(bhp[observed], p_res)
    data = frame.data.copy()
    data[f'WIGGINS_OIL{suffix}'] = oil
    data[f'WIGGINS_WATER{suffix}'] = water
    return frame.with_data(data)


# Model inputs

@dataclass(frozen=True)
class FeatureSpec:
    """Which columns feed the model.

    Parameters
    ----------
    target : str
        Column to forecast, e.g. 'OPR_H'.
    exogenous : list of str
        Input columns besides the target's own history.
    lookback : int
        Days of history in each input window.
    exogenous_lead : int
        0 or 1. With 1, the window predicting day d carries the
        exogenous values of days d - lookback + 1 .. d next to the
        target of days d - lookback .. d - 1, i.e. the inputs of the
        forecast day itself (known in advance from the simulator).
    """
    target: str
    exogenous: List[str] = field(default_factory=list)
    lookback: int = 30
    exogenous_lead: int = 0

    def __post_init__(self):
        if self.target in self.exogenous:
            raise FeatureError(f'target {self.target} listed as exogenous')
        if self.lookback < 1:
            raise FeatureError('lookback must be at least 1')
        if self.exogenous_lead not in (0, 1):
            raise FeatureError('exogenous_lead must be 0 or 1')

    @property
    def input_columns(self):
        """Columns of the input matrix, the target's history last."""
        return [*self.exogenous, self.target]


def select_features(frame: SeriesFrame, spec: FeatureSpec) -> Tuple:
    """Return the input matrix X and the target vector y.

    The columns of X are the exogenous columns followed by the target
    column itself; windowing turns the latter into the lagged target
    channel. Row order is preserved.

    Raises
    ------
    FeatureError if a column is absent or still has missing cells.
    """
    absent = [c for c in spec.input_columns if c not in frame.columns]
    if absent:
        raise FeatureError(f"missing columns: {', '.join(absent)}")
    X = frame.data[spec.input_columns].to_numpy(dtype=float)
    if np.isnan(X).any():
        raise FeatureError('feature columns contain missing values; '
                           'impute first')
    y = X[:, -1].copy()
    return X, y


def align_inputs(X, lead):
    """Shift the exogenous columns of X up by 'lead' rows.

    Row r then holds the exogenous values of row r + lead next to the
    target of row r. The last 'lead' rows keep their own values: a
    window never ends on the last row, whose successor lies past the
    frame.
    """
    X = np.array(X, dtype=float)
    if lead:
        X[:-lead, :-1] = X[lead:, :-1].copy()
    return X


# Scaling

@dataclass(frozen=True)
class Scaler:
    """Per-column z-score standardization with population statistics."""
    mean: Tuple[float, ...]
    std: Tuple[float, ...]

    def __post_init__(self):
        if len(self.mean) != len(self.std):
            raise ScalerError('mean and std lengths differ')
        if any(not s > 0 for s in self.std):
            raise ScalerError('standard deviations must be positive')

    @classmethod
    def identity(cls, n_columns):
        return cls((0.0,) * n_columns, (1.0,) * n_columns)

    def __len__(self):
        return len(self.mean)

    def inverse(self, X_scaled):
        """Map standardized values back to physical units."""
        X_scaled = np.asarray(X_scaled, dtype=float)
        return X_scaled * np.asarray(self.std) + np.asarray(self.mean)

    def to_dict(self):
        return {'mean': list(self.mean), 'std': list(self.std)}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(float(m) for m in d['mean']),
                   tuple(float(s) for s in d['std']))


def fit_scaler(X_train):
    """Fit a Scaler on training rows.

    Parameters
    ----------
    X_train : array, shape (n,) or (n, k)

    Raises
    ------
    ScalerError if a column is constant or the input is empty.
    """
    X_train = np.asarray(X_train, dtype=float)
    if X_train.ndim == 1:
        X_train = X_train[:, None]
    if X_train.shape[0] == 0:
        raise ScalerError('cannot fit a scaler on zero rows')
    mean = X_train.mean(axis=0)
    std = X_train.std(axis=0)
    constant = np.flatnonzero((np.ptp(X_train, axis=0) == 0) | ~(std > 0))
    if constant.size:
        raise ScalerError(f'constant column(s) at position {list(constant)}')
    get_logger(__name__).debug('fitted scaler', columns=X_train.shape[1])
    return Scaler(tuple(float(m) for m in mean), tuple(float(s) for s in std))


def apply_scaler(scaler: Scaler, X):
    """Standardize X column-wise; the last axis of X indexes columns."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and len(scaler) == 1:
        return (X - scaler.mean[0]) / scaler.std[0]
    if X.shape[-1] != len(scaler):
        raise ScalerError(f'expected {len(scaler)} columns, got {X.shape[-1]}')
    return (X - np.asarray(scaler.mean)) / np.asarray(scaler.std)
