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
"""Single-layer LSTM, bidirectional LSTM and GRU regressors.

Each network reads a window of shape (L, F) one time step at a time
and maps its final hidden state to a scalar with a linear head. The
parameters live in a flat dict of float64 arrays:

    LSTM   W (F, 4H), U (H, 4H), b (4H,)      gate order i, f, g, o
    GRU    W (F, 3H), U (H, 3H), b (3H,)      gate order z, r, n
    BiLSTM the LSTM arrays twice, prefixed 'fw_' and 'bw_'

plus the head 'w_out' (H, or 2H for BiLSTM) and 'b_out' (1,).
Training is mini-batch Adam on the mean squared error, with gradients
from backpropagation through time.
"""
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from structlog import get_logger

from .base import (ModelError, TrainingError, WindowedDataset, new_forecaster,
                   register)


CELLS = ('lstm', 'bilstm', 'gru')
_GATES = {'lstm': 4, 'bilstm': 4, 'gru': 3}


@dataclass(frozen=True)
class RecurrentConfig:
    """Hyperparameters of a recurrent regressor.

    Parameters
    ----------
    cell : str
        'lstm', 'bilstm' or 'gru' (case-insensitive).
    hidden_units : int
    epochs : int
    learning_rate : float
    batch_size : int
    seed : int
        Seeds both initialization and mini-batch shuffling.
    patience : int, optional
        Stop once the epoch loss has not improved for this many epochs.
    """
    cell: str = 'lstm'
    hidden_units: int = 32
    epochs: int = 200
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 0
    patience: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'cell', self.cell.lower())
        if self.cell not in CELLS:
            raise ModelError(f'unknown cell {self.cell!r}; '
                             f"expected one of {', '.join(CELLS)}")
        for name in ('hidden_units', 'epochs', 'batch_size'):
            if getattr(self, name) < 1:
                raise ModelError(f'{name} must be positive')
        if not self.learning_rate > 0:
            raise ModelError('learning_rate must be positive')
        if self.patience is not None and self.patience < 1:
            raise ModelError('patience must be positive')

    @property
    def kind(self):
        return self.cell

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _prefixes(cell):
    return ('fw_', 'bw_') if cell == 'bilstm' else ('',)


def head_size(config):
    return config.hidden_units * (2 if config.cell == 'bilstm' else 1)


def parameter_shapes(config, n_features):
    H, G = config.hidden_units, _GATES[config.cell]
    shapes = {}
    for prefix in _prefixes(config.cell):
        shapes[prefix + 'W'] = (n_features, G * H)
        shapes[prefix + 'U'] = (H, G * H)
        shapes[prefix + 'b'] = (G * H,)
    shapes['w_out'] = (head_size(config),)
    shapes['b_out'] = (1,)
    return shapes


def count_parameters(config, n_features, lookback=None):
    return sum(int(np.prod(s))
               for s in parameter_shapes(config, n_features).values())


def init_parameters(config, n_features, rng=None):
    """Draw initial parameters.

    Weights are uniform in +-1/sqrt(fan_in); biases start at zero
    except the LSTM forget gate, which starts at one.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    H = config.hidden_units
    params = {}
    for name, shape in parameter_shapes(config, n_features).items():
        if name.endswith('b') or name == 'b_out':
            value = np.zeros(shape)
            if config.cell != 'gru' and name != 'b_out':
                value[H:2 * H] = 1.0
        else:
            bound = 1.0 / np.sqrt(shape[0])
            value = rng.uniform(-bound, bound, size=shape)
        params[name] = value
    return params


def check_parameters(config, params, n_features):
    """Raise ModelError unless 'params' has the expected arrays."""
    expected = parameter_shapes(config, n_features)
    if set(params) != set(expected):
        raise ModelError(f'parameter names {sorted(params)} do not match '
                         f'{sorted(expected)}')
    for name, shape in expected.items():
        if np.shape(params[name]) != shape:
            raise ModelError(f'{name} has shape {np.shape(params[name])}, '
                             f'expected {shape}')


# Cells. Inputs are batches of shape (B, L, F); each forward pass
# returns the final hidden state and a per-step cache for backprop.

def _lstm_forward(W, U, b, xs):
    B, L, _ = xs.shape
    H = U.shape[0]
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    cache = []
    for t in range(L):
        x = xs[:, t, :]
        a = x @ W + h @ U + b
        i = _sigmoid(a[:, :H])
        f = _sigmoid(a[:, H:2 * H])
        g = np.tanh(a[:, 2 * H:3 * H])
        o = _sigmoid(a[:, 3 * H:])
        c_next = f * c + i * g
        tanh_c = np.tanh(c_next)
        cache.append((x, h, c, i, f, g, o, tanh_c))
        h, c = o * tanh_c, c_next
    return h, cache


def _lstm_backward(W, U, cache, dh):
    dW, dU = np.zeros_like(W), np.zeros_like(U)
    db = np.zeros(W.shape[1])
    dc = np.zeros_like(dh)
    for x, h_prev, c_prev, i, f, g, o, tanh_c in reversed(cache):
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c ** 2)
        da = np.concatenate([
            dc * g * i * (1.0 - i),
            dc * c_prev * f * (1.0 - f),
            dc * i * (1.0 - g ** 2),
            do * o * (1.0 - o),
        ], axis=1)
        dW += x.T @ da
        dU += h_prev.T @ da
        db += da.sum(axis=0)
        dh = da @ U.T
        dc = dc * f
    return dW, dU, db


def _gru_forward(W, U, b, xs):
    B, L, _ = xs.shape
    H = U.shape[0]
    h = np.zeros((B, H))
    cache = []
    for t in range(L):
        x = xs[:, t, :]
        ax = x @ W + b
        ah = h @ U[:, :2 * H]
        z = _sigmoid(ax[:, :H] + ah[:, :H])
        r = _sigmoid(ax[:, H:2 * H] + ah[:, H:])
        rh = r * h
        n = np.tanh(ax[:, 2 * H:] + rh @ U[:, 2 * H:])
        cache.append((x, h, z, r, rh, n))
        h = z * h + (1.0 - z) * n
    return h, cache


def _gru_backward(W, U, cache, dh):
    H = U.shape[0]
    dW, dU = np.zeros_like(W), np.zeros_like(U)
    db = np.zeros(W.shape[1])
    for x, h_prev, z, r, rh, n in reversed(cache):
        dn = dh * (1.0 - z) * (1.0 - n ** 2)
        drh = dn @ U[:, 2 * H:].T
        dzr = np.concatenate([
            dh * (h_prev - n) * z * (1.0 - z),
            drh * h_prev * r * (1.0 - r),
        ], axis=1)
        da = np.concatenate([dzr, dn], axis=1)
        dW += x.T @ da
        db += da.sum(axis=0)
        dU[:, :2 * H] += h_prev.T @ dzr
        dU[:, 2 * H:] += rh.T @ dn
        dh = dh * z + drh * r + dzr @ U[:, :2 * H].T
    return dW, dU, db


def _encode(config, params, xs):
    """Final hidden state of the network for a batch of windows."""
    if config.cell == 'gru':
        h, cache = _gru_forward(params['W'], params['U'], params['b'], xs)
        return h, [cache]
    if config.cell == 'lstm':
        h, cache = _lstm_forward(params['W'], params['U'], params['b'], xs)
        return h, [cache]
    h_fw, cache_fw = _lstm_forward(params['fw_W'], params['fw_U'],
                                   params['fw_b'], xs)
    h_bw, cache_bw = _lstm_forward(params['bw_W'], params['bw_U'],
                                   params['bw_b'], xs[:, ::-1, :])
    return np.concatenate([h_fw, h_bw], axis=1), [cache_fw, cache_bw]


def forward_batch(config, params, xs):
    """Predictions for a batch of scaled windows of shape (B, L, F)."""
    state, _ = _encode(config, params, xs)
    return state @ params['w_out'] + params['b_out'][0]


def recurrent_forward(config, params, window):
    """Scalar prediction for a single scaled window of shape (L, F).

    Raises
    ------
    ModelError if the window or the parameters have the wrong shape.
    """
    window = np.asarray(window, dtype=float)
    if window.ndim != 2 or window.shape[0] < 1:
        raise ModelError('window must have shape (L, F) with L >= 1')
    check_parameters(config, params, window.shape[1])
    return float(forward_batch(config, params, window[None])[0])


def loss_and_gradients(config, params, xs, ys):
    """Mean squared error over a batch and its gradient for every array."""
    state, caches = _encode(config, params, xs)
    err = state @ params['w_out'] + params['b_out'][0] - ys
    loss = float(np.mean(err ** 2))

    dpred = 2.0 * err / err.size
    grads = {'w_out': state.T @ dpred, 'b_out': np.array([dpred.sum()])}
    dstate = dpred[:, None] * params['w_out'][None, :]
    H = config.hidden_units
    backward = _gru_backward if config.cell == 'gru' else _lstm_backward
    for k, (prefix, cache) in enumerate(zip(_prefixes(config.cell), caches)):
        dW, dU, db = backward(params[prefix + 'W'], params[prefix + 'U'],
                              cache, dstate[:, k * H:(k + 1) * H])
        grads[prefix + 'W'], grads[prefix + 'U'], grads[prefix + 'b'] = \
            dW, dU, db
    return loss, grads


def numerical_gradients(config, params, xs, ys, step=1e-5):
    """Central-difference gradients of the batch MSE, for checking."""
    grads = {}
    for name, value in params.items():
        grad = np.zeros_like(value)
        for idx in np.ndindex(value.shape):
            original = value[idx]
            value[idx] = original + step
            up = np.mean((forward_batch(config, params, xs) - ys) ** 2)
            value[idx] = original - step
            down = np.mean((forward_batch(config, params, xs) - ys) ** 2)
            value[idx] = original
            grad[idx] = (up - down) / (2 * step)
        grads[name] = grad
    return grads


class Adam:
    """Adam optimizer updating a dict of arrays in place."""

    def __init__(self, params, learning_rate, beta1=0.9, beta2=0.999,
                 eps=1e-8):
        self.learning_rate = learning_rate
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            params[k] -= (self.learning_rate * (self.m[k] / c1)
                          / (np.sqrt(self.v[k] / c2) + self.eps))


def train_recurrent(dataset: WindowedDataset, config: RecurrentConfig,
                    scaler=None, target_scaler=None, input_columns=None):
    """Fit a recurrent regressor on a scaled windowed dataset.

    Parameters
    ----------
    dataset : WindowedDataset
        Windows and targets, already standardized.
    config : RecurrentConfig
    scaler, target_scaler : Scaler, optional
        Stored on the Forecaster so that it can be applied to raw
        windows. Default to the identity.

    Returns
    -------
    Forecaster whose loss_trace holds the full-dataset MSE after each
    epoch.

    Raises
    ------
    ModelError if the dataset is empty.
    TrainingError if the loss becomes non-finite.
    """
    log = get_logger(__name__)
    if len(dataset) == 0:
        raise ModelError('cannot train on an empty dataset')
    rng = np.random.default_rng(config.seed)
    params = init_parameters(config, dataset.n_features, rng)
    optimizer = Adam(params, config.learning_rate)
    xs, ys = dataset.windows, dataset.targets

    trace = []
    best, stale = np.inf, 0
    with np.errstate(over='ignore', invalid='ignore'):
        for epoch in range(config.epochs):
            order = rng.permutation(len(dataset))
            for start in range(0, len(order), config.batch_size):
                batch = order[start:start + config.batch_size]
                loss, grads = loss_and_gradients(config, params,
                                                 xs[batch], ys[batch])
                if not np.isfinite(loss):
                    raise TrainingError(f'loss diverged at epoch {epoch}',
                                        epoch)
                optimizer.step(params, grads)
            loss = float(np.mean((forward_batch(config, params, xs) - ys) ** 2))
            if not np.isfinite(loss):
                raise TrainingError(f'loss diverged at epoch {epoch}', epoch)
            trace.append(loss)
            log.debug('epoch', cell=config.cell, epoch=epoch, loss=loss)
            if config.patience is not None:
                if loss < best:
                    best, stale = loss, 0
                else:
                    stale += 1
                    if stale >= config.patience:
                        log.debug('early stop', epoch=epoch)
                        break

    log.info('trained', cell=config.cell, epochs=len(trace), loss=trace[-1])
    return new_forecaster(config.cell, config, params, trace, dataset,
                          scaler=scaler, target_scaler=target_scaler,
                          input_columns=input_columns)


def _predict(forecaster, windows):
    check_parameters(forecaster.config, forecaster.params,
                     forecaster.n_features)
    return forward_batch(forecaster.config, forecaster.params, windows)


for _cell in CELLS:
    register(_cell, RecurrentConfig, train_recurrent, _predict,
             count_parameters)
del _cell
