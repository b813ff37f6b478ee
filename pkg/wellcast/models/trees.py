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
"""Gradient-boosted regression trees on flattened windows.

The ensemble starts from the mean target and adds, each round, a
depth-limited regression tree fitted to the current residuals, scaled
by the learning rate. Splits are chosen exhaustively over midpoints
between consecutive distinct feature values.
"""
from dataclasses import asdict, dataclass
from typing import List

import numpy as np
from structlog import get_logger

from .base import ModelError, WindowedDataset, new_forecaster, register


@dataclass(frozen=True)
class TreeConfig:
    """Hyperparameters of the boosted ensemble.

    'rounds' may be zero, giving the constant mean predictor.
    """
    rounds: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    min_samples_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.rounds < 0:
            raise ModelError('rounds must be non-negative')
        if self.max_depth < 1 or self.min_samples_leaf < 1:
            raise ModelError('max_depth and min_samples_leaf must be positive')
        if not 0 < self.learning_rate <= 1:
            raise ModelError('learning_rate must lie in (0, 1]')

    @property
    def kind(self):
        return 'gbt'

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class Tree:
    """Binary tree in array form; feature -1 marks a leaf."""
    feature: List[int]
    threshold: List[float]
    left: List[int]
    right: List[int]
    value: List[float]

    def _add(self, value):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(value))
        return len(self.value) - 1

    @property
    def n_leaves(self):
        return sum(1 for f in self.feature if f < 0)

    def predict(self, X):
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left, right = np.asarray(self.left), np.asarray(self.right)
        node = np.zeros(X.shape[0], dtype=int)
        rows = np.arange(X.shape[0])
        while True:
            active = feature[node] >= 0
            if not active.any():
                break
            at, f = node[active], feature[node[active]]
            go_left = X[rows[active], f] <= threshold[at]
            node[active] = np.where(go_left, left[at], right[at])
        return np.asarray(self.value)[node]

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(*(list(d[k]) for k in
                     ('feature', 'threshold', 'left', 'right', 'value')))


def _best_split(X, residual, rows, order, min_leaf):
    """Best (feature, threshold) for the node holding 'rows'.

    'order' holds, per feature column, the row indices sorted by that
    feature. Returns None if no split reduces the squared error.
    """
    m, n_features = X.shape
    k = rows.size
    if k < 2 * min_leaf:
        return None
    in_node = np.zeros(m, dtype=bool)
    in_node[rows] = True
    member = in_node[order]
    sorted_rows = order.T[member.T].reshape(n_features, k)
    xs = X[sorted_rows, np.arange(n_features)[:, None]]
    rs = residual[sorted_rows]

    csum = np.cumsum(rs, axis=1)
    total = csum[:, -1:]
    n_left = np.arange(1, k)
    n_right = k - n_left
    s_left = csum[:, :-1]
    s_right = total - s_left
    gain = s_left ** 2 / n_left + s_right ** 2 / n_right - total ** 2 / k
    valid = ((xs[:, 1:] > xs[:, :-1])
             & (n_left >= min_leaf) & (n_right >= min_leaf))
    gain = np.where(valid, gain, -np.inf)

    f, j = np.unravel_index(np.argmax(gain), gain.shape)
    if not gain[f, j] > 0:
        return None
    return int(f), float((xs[f, j] + xs[f, j + 1]) / 2)


def fit_tree(X, residual, max_depth, min_samples_leaf=1, order=None):
    """Fit a least-squares regression tree to 'residual'."""
    if order is None:
        order = np.argsort(X, axis=0, kind='stable')
    tree = Tree([], [], [], [], [])
    root = tree._add(residual.mean())
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, rows, depth = stack.pop()
        if depth >= max_depth:
            continue
        split = _best_split(X, residual, rows, order, min_samples_leaf)
        if split is None:
            continue
        f, threshold = split
        to_left = X[rows, f] <= threshold
        left_rows, right_rows = rows[to_left], rows[~to_left]
        if (left_rows.size < min_samples_leaf
                or right_rows.size < min_samples_leaf):
            continue
        tree.feature[node] = f
        tree.threshold[node] = threshold
        tree.left[node] = tree._add(residual[left_rows].mean())
        tree.right[node] = tree._add(residual[right_rows].mean())
        stack.append((tree.right[node], right_rows, depth + 1))
        stack.append((tree.left[node], left_rows, depth + 1))
    return tree


def train_gbt(X, y, config: TreeConfig, scaler=None, target_scaler=None,
              input_columns=None, window_shape=None):
    """Fit a boosted ensemble on flattened windows.

    Parameters
    ----------
    X : array, shape (m, P) or WindowedDataset
        Scaled inputs; a WindowedDataset is flattened.
    y : array, shape (m,)
        Scaled targets; ignored if X is a WindowedDataset.
    config : TreeConfig
    window_shape : (int, int), optional
        Lookback and feature count of the windows X was flattened
        from; defaults to (1, P).

    Returns
    -------
    Forecaster whose loss_trace holds the training MSE after each
    round, which never increases.
    """
    if isinstance(X, WindowedDataset):
        dataset = X
    else:
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise ModelError('X must be (m, P) with one target per row')
        lookback, n_features = window_shape or (1, X.shape[1])
        if lookback * n_features != X.shape[1]:
            raise ModelError(f'window shape {window_shape} does not match '
                             f'{X.shape[1]} columns')
        dataset = WindowedDataset(X.reshape(-1, lookback, n_features), y)
    if len(dataset) == 0:
        raise ModelError('cannot train on an empty dataset')

    X, y = dataset.flattened(), dataset.targets
    order = np.argsort(X, axis=0, kind='stable')
    base = float(y.mean())
    prediction = np.full(y.shape, base)
    trees, trace = [], []
    for _ in range(config.rounds):
        tree = fit_tree(X, y - prediction, config.max_depth,
                        config.min_samples_leaf, order)
        prediction = prediction + config.learning_rate * tree.predict(X)
        trees.append(tree)
        trace.append(float(np.mean((y - prediction) ** 2)))

    get_logger(__name__).info('trained', kind='gbt', rounds=config.rounds,
                              loss=trace[-1] if trace else None)
    params = {'base': base, 'trees': [t.to_dict() for t in trees]}
    return new_forecaster('gbt', config, params, trace, dataset,
                          scaler=scaler, target_scaler=target_scaler,
                          input_columns=input_columns)


def ensemble_predict(config, params, X):
    """Predictions of a stored ensemble for a flattened input matrix."""
    out = np.full(X.shape[0], float(params['base']))
    for tree in params['trees']:
        out += config.learning_rate * Tree.from_dict(tree).predict(X)
    return out


def _train(dataset, config, **kwargs):
    return train_gbt(dataset, None, config, **kwargs)


def _predict(forecaster, windows):
    return ensemble_predict(forecaster.config, forecaster.params,
                            windows.reshape(windows.shape[0], -1))


def count_parameters(config, n_features, lookback):
    """Upper bound on the stored values: one per node of a full tree."""
    return config.rounds * (2 ** (config.max_depth + 1) - 1) + 1


register('gbt', TreeConfig, _train, _predict, count_parameters)
