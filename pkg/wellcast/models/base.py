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
"""Windowed datasets and the Forecaster contract shared by all models."""

import json
from dataclasses import dataclass, field
from datetime import timedelta
from typing import Any, Dict, NamedTuple, Optional, Tuple

import numpy as np

from .._utils import WellcastError
from .._version import __version__
from ..features import Scaler, apply_scaler


MODEL_FORMAT = 'wellcast-model'
MODEL_FORMAT_VERSION = 1


class WindowingError(WellcastError, ValueError):
    """Too few rows to build a single window."""


class ModelError(WellcastError, ValueError):
    """Model inputs or parameters have the wrong shape."""


class TrainingError(WellcastError, RuntimeError):
    """Training diverged."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


@dataclass(frozen=True, eq=False)
class WindowedDataset:
    """Supervised view of a multivariate series.

    Window t holds source rows [t, t + L); its target is the target
    value of row t + L.

    Parameters
    ----------
    windows : array, shape (m, L, F)
    targets : array, shape (m,)
    origin_dates : list of datetime.date, optional
        Date of the last row of each window. The target falls on the
        following day.
    """
    windows: np.ndarray
    targets: np.ndarray
    origin_dates: Optional[Tuple] = None

    def __post_init__(self):
        if self.windows.ndim != 3:
            raise WindowingError('windows must have shape (m, L, F)')
        if self.targets.shape != (self.windows.shape[0],):
            raise WindowingError('one target per window is required')
        if (self.origin_dates is not None
                and len(self.origin_dates) != len(self.targets)):
            raise WindowingError('one origin date per window is required')

    def __len__(self):
        return self.targets.shape[0]

    @property
    def lookback(self):
        return self.windows.shape[1]

    @property
    def n_features(self):
        return self.windows.shape[2]

    @property
    def target_dates(self):
        if self.origin_dates is None:
            return None
        return tuple(d + timedelta(days=1) for d in self.origin_dates)

    def flattened(self):
        """Windows as a (m, L * F) matrix, row-major within each window."""
        return self.windows.reshape(len(self), -1)

    def subset(self, rows):
        """Return the windows selected by a slice or index array."""
        dates = self.origin_dates
        if dates is not None:
            dates = tuple(np.asarray(dates, dtype=object)[rows])
        return WindowedDataset(self.windows[rows], self.targets[rows], dates)


def make_windows(X, y, lookback, dates=None):
    """Frame a series as lookback windows and next-step targets.

    Parameters
    ----------
    X : array, shape (n, F)
    y : array, shape (n,)
    lookback : int
    dates : sequence of datetime.date, optional
        Date of each source row.

    Raises
    ------
    WindowingError if n <= lookback.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if y.shape != (n,):
        raise WindowingError('X and y have different lengths')
    if lookback < 1:
        raise WindowingError('lookback must be at least 1')
    if n <= lookback:
        raise WindowingError(f'need more than {lookback} rows, got {n}')
    m = n - lookback
    windows = np.stack([X[t:t + lookback] for t in range(m)])
    origin = None
    if dates is not None:
        origin = tuple(dates[t + lookback - 1] for t in range(m))
    return WindowedDataset(windows, y[lookback:].copy(), origin)


# The registry maps a model kind to its config type and implementation;
# the model modules register themselves on import.

class ModelKind(NamedTuple):
    config_cls: type
    train: Any       # (WindowedDataset, config, **forecaster_fields) -> Forecaster
    predict: Any     # (Forecaster, scaled windows) -> scaled predictions
    n_params: Any    # (config, n_features, lookback) -> int


_KINDS: Dict[str, ModelKind] = {}


def register(kind, config_cls, train, predict, n_params):
    _KINDS[kind] = ModelKind(config_cls, train, predict, n_params)


def model_kind(kind):
    try:
        return _KINDS[kind]
    except KeyError:
        raise ModelError(f'unknown model kind {kind!r}') from None


def kind_of(config):
    """Return the registered kind name for a config instance."""
    kind = getattr(config, 'kind', None)
    if kind in _KINDS and isinstance(config, _KINDS[kind].config_cls):
        return kind
    raise ModelError(f'no model registered for {type(config).__name__}')


@dataclass(frozen=True, eq=False)
class Forecaster:
    """A trained point-prediction model.

    Parameters
    ----------
    kind : str
        'lstm', 'bilstm', 'gru' or 'gbt'.
    config : RecurrentConfig or TreeConfig
        Snapshot of the training configuration, including the seed.
    params : dict
        Model parameters; opaque outside the model's own module.
    scaler : Scaler
        Applied to raw input windows before the model sees them.
    target_scaler : Scaler
        Maps model outputs back to physical units.
    loss_trace : tuple of float
        Training MSE after each epoch or boosting round.
    window_shape : (int, int)
        Lookback and number of input features.
    input_columns : tuple of str, optional
        Names of the input features, in order.
    """
    kind: str
    config: Any
    params: Dict[str, Any]
    scaler: Scaler
    target_scaler: Scaler
    loss_trace: Tuple[float, ...]
    window_shape: Tuple[int, int]
    input_columns: Optional[Tuple[str, ...]] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def lookback(self):
        return self.window_shape[0]

    @property
    def n_features(self):
        return self.window_shape[1]

    def predict(self, windows):
        return predict(self, windows)


def fit(dataset, config, scaler=None, target_scaler=None, input_columns=None):
    """Train the model described by 'config' on an already-scaled dataset."""
    kind = model_kind(kind_of(config))
    return kind.train(dataset, config, scaler=scaler,
                      target_scaler=target_scaler, input_columns=input_columns)


def parameter_count(config, n_features, lookback):
    return model_kind(kind_of(config)).n_params(config, n_features, lookback)


def predict(forecaster: Forecaster, windows):
    """Predict one value per raw window, in physical target units.

    The stored scaler is applied to the inputs and the outputs are
    inverse-scaled. Each window is predicted independently.

    Parameters
    ----------
    windows : array, shape (m, L, F) or WindowedDataset

    Raises
    ------
    ModelError if the windows do not match the forecaster's inputs.
    """
    if isinstance(windows, WindowedDataset):
        windows = windows.windows
    windows = np.asarray(windows, dtype=float)
    if windows.ndim != 3:
        raise ModelError('windows must have shape (m, L, F)')
    lookback, n_features = forecaster.window_shape
    if windows.shape[2] != n_features:
        raise ModelError(f'model expects {n_features} features, '
                         f'got {windows.shape[2]}')
    if forecaster.kind == 'gbt' and windows.shape[1] != lookback:
        raise ModelError(f'model expects lookback {lookback}, '
                         f'got {windows.shape[1]}')
    if windows.shape[0] == 0:
        return np.zeros(0)
    scaled = apply_scaler(forecaster.scaler, windows)
    out = model_kind(forecaster.kind).predict(forecaster, scaled)
    return forecaster.target_scaler.inverse(out)


def new_forecaster(kind, config, params, loss_trace, dataset, scaler=None,
                   target_scaler=None, input_columns=None):
    """Assemble a Forecaster, defaulting to identity scalers."""
    n_features = dataset.n_features
    if scaler is None:
        scaler = Scaler.identity(n_features)
    if target_scaler is None:
        target_scaler = Scaler.identity(1)
    if len(scaler) != n_features:
        raise ModelError(f'scaler has {len(scaler)} columns for '
                         f'{n_features} features')
    if input_columns is not None:
        input_columns = tuple(input_columns)
    return Forecaster(kind, config, params, scaler, target_scaler,
                      tuple(float(v) for v in loss_trace),
                      (dataset.lookback, n_features), input_columns,
                      {'version': __version__})


# Serialization

def _encode(value):
    if isinstance(value, np.ndarray):
        return {'shape': list(value.shape),
                'data': [float(v) for v in value.ravel()]}
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _decode(value):
    if isinstance(value, dict):
        if set(value) == {'shape', 'data'}:
            return np.asarray(value['data'], dtype=float).reshape(
                value['shape'])
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return value


def to_json(forecaster: Forecaster, provenance=None):
    """Serialize a forecaster as versioned JSON text."""
    doc = {
        'format': MODEL_FORMAT,
        'version': MODEL_FORMAT_VERSION,
        'kind': forecaster.kind,
        'config': forecaster.config.to_dict(),
        'params': _encode(forecaster.params),
        'scaler': forecaster.scaler.to_dict(),
        'target_scaler': forecaster.target_scaler.to_dict(),
        'loss_trace': list(forecaster.loss_trace),
        'window_shape': list(forecaster.window_shape),
        'input_columns': (None if forecaster.input_columns is None
                          else list(forecaster.input_columns)),
        'metadata': forecaster.metadata,
    }
    if provenance is not None:
        doc['provenance'] = provenance
    return json.dumps(doc, indent=1, sort_keys=True) + '\n'


def from_json(text):
    """Load a forecaster written by 'to_json'.

    Raises
    ------
    ModelError if the document is not a supported model file.
    """
    try:
        doc = json.loads(text)
    except ValueError as error:
        raise ModelError(f'not a model file: {error}') from None
    if doc.get('format') != MODEL_FORMAT:
        raise ModelError('not a wellcast model file')
    if doc.get('version') != MODEL_FORMAT_VERSION:
        raise ModelError(f"unsupported model format version {doc.get('version')}")
    kind = model_kind(doc['kind'])
    columns = doc.get('input_columns')
    return Forecaster(
        doc['kind'],
        kind.config_cls.from_dict(doc['config']),
        _decode(doc['params']),
        Scaler.from_dict(doc['scaler']),
        Scaler.from_dict(doc['target_scaler']),
        tuple(doc['loss_trace']),
        tuple(doc['window_shape']),
        None if columns is None else tuple(columns),
        doc.get('metadata', {}),
    )
