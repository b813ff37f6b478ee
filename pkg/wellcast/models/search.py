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
"""Hyperparameter search by chronological hold-out."""

import dataclasses
import itertools
import math
from dataclasses import dataclass
from typing import Any, Optional, Tuple

import numpy as np
from structlog import get_logger

from .._utils import MultiError, parallel_map
from .base import TrainingError, ModelError, fit, parameter_count, predict
from .recurrent import RecurrentConfig
from .trees import TreeConfig


DEFAULT_RECURRENT_GRID = {
    'hidden_units': [16, 32, 64],
    'learning_rate': [1e-3, 3e-3],
    'epochs': [200],
    'batch_size': [32],
}
DEFAULT_TREE_GRID = {
    'rounds': [100, 300],
    'max_depth': [3, 5],
    'learning_rate': [0.1],
}


class SearchError(MultiError, ValueError):
    """No candidate configuration could be trained."""

    def __str__(self):
        return (f'all {len(self.children)} candidates failed: '
                + '; '.join(str(c) for c in self.children))


@dataclass(frozen=True)
class LeaderboardEntry:
    """Outcome of one candidate; 'rank' is None for failed candidates."""
    rank: Optional[int]
    config: Any
    validation_mae: Optional[float]
    n_params: int
    error: Optional[str] = None

    def to_row(self):
        return {
            'rank': '' if self.rank is None else self.rank,
            'kind': self.config.kind,
            'config': json_config(self.config),
            'n_params': self.n_params,
            'validation_mae': ('' if self.validation_mae is None
                               else repr(self.validation_mae)),
            'error': self.error or '',
        }


@dataclass(frozen=True)
class SearchResult:
    best: Any
    leaderboard: Tuple[LeaderboardEntry, ...]


def json_config(config):
    """Compact, key-sorted rendering of a config for tables."""
    items = sorted(config.to_dict().items())
    return ' '.join(f'{k}={v}' for k, v in items if v is not None)


def config_class(kind):
    if kind == 'gbt':
        return TreeConfig
    if kind in ('lstm', 'bilstm', 'gru'):
        return RecurrentConfig
    raise ModelError(f'unknown model kind {kind!r}')


def _base_config(kind, seed, base):
    if base is not None:
        return base
    if kind == 'gbt':
        return TreeConfig(seed=seed)
    return RecurrentConfig(cell=kind, seed=seed)


def grid_candidates(kind, grid=None, seed=0, base=None):
    """Every combination of the values in 'grid', in row-major order.

    Parameters
    ----------
    kind : str
        'lstm', 'bilstm', 'gru' or 'gbt'.
    grid : dict: str → list, optional
        Values to try per config field; defaults to the built-in grid
        for the model family.
    base : RecurrentConfig or TreeConfig, optional
        Supplies the fields the grid does not vary.
    """
    if grid is None:
        grid = DEFAULT_TREE_GRID if kind == 'gbt' else DEFAULT_RECURRENT_GRID
    base = _base_config(kind, seed, base)
    names = list(grid)
    return [dataclasses.replace(base, **dict(zip(names, values)))
            for values in itertools.product(*(grid[n] for n in names))]


def _integer_field(cls, name):
    types = {f.name: f.type for f in dataclasses.fields(cls)}
    return types.get(name) in (int, 'int')


def random_candidates(kind, space, count, seed=0, base=None):
    """Sample 'count' configs from declared ranges.

    Each entry of 'space' is either a list, sampled uniformly, or a
    mapping {'low', 'high', 'log'} giving a real range, sampled
    uniformly or log-uniformly. Integer fields are rounded. The draw
    is fixed by 'seed'.
    """
    if count < 1:
        raise ModelError('count must be positive')
    base = _base_config(kind, seed, base)
    cls = type(base)
    rng = np.random.default_rng(seed)
    candidates = []
    for _ in range(count):
        values = {}
        for name, domain in space.items():
            if isinstance(domain, dict):
                low, high = float(domain['low']), float(domain['high'])
                if domain.get('log', False):
                    value = math.exp(rng.uniform(math.log(low),
                                                 math.log(high)))
                else:
                    value = rng.uniform(low, high)
                if _integer_field(cls, name):
                    value = int(round(value))
            else:
                value = list(domain)[int(rng.integers(len(domain)))]
            values[name] = value.item() if hasattr(value, 'item') else value
        candidates.append(dataclasses.replace(base, **values))
    return candidates


def grid_search(dataset, candidates, validation_split=0.2,
                target_scaler=None, threads=None):
    """Pick the candidate with the lowest validation MAE.

    The last 'validation_split' fraction of the (chronologically
    ordered) windows is held out; each candidate is trained on the rest
    and scored by MAE on the held-out windows, in physical units when a
    target scaler is given. Ties go to the candidate with fewer
    parameters, then to the earlier one. Candidates may be trained in
    parallel; the outcome does not depend on the thread count.

    Returns
    -------
    SearchResult

    Raises
    ------
    SearchError if every candidate fails to train.
    """
    log = get_logger(__name__)
    candidates = list(candidates)
    if not candidates:
        raise ModelError('grid_search needs at least one candidate')
    if not 0 < validation_split < 1:
        raise ModelError('validation_split must lie in (0, 1)')
    m = len(dataset)
    n_val = int(math.ceil(validation_split * m))
    if n_val >= m:
        raise ModelError(f'{m} windows are too few to hold out '
                         f'{validation_split:.0%} for validation')
    train_part = dataset.subset(slice(0, m - n_val))
    held_out = dataset.subset(slice(m - n_val, m))
    actual = held_out.targets
    if target_scaler is not None:
        actual = target_scaler.inverse(actual)

    def score(config):
        try:
            model = fit(train_part, config, target_scaler=target_scaler)
            mae = float(np.mean(np.abs(predict(model, held_out) - actual)))
            if not np.isfinite(mae):
                raise TrainingError('validation error is not finite')
        except TrainingError as error:
            log.warning('candidate failed', config=json_config(config),
                        error=str(error))
            return error
        log.debug('candidate', config=json_config(config), mae=mae)
        return mae

    scores = parallel_map(score, candidates, threads)
    sizes = [parameter_count(c, dataset.n_features, dataset.lookback)
             for c in candidates]
    failures = [s for s in scores if isinstance(s, Exception)]
    if len(failures) == len(candidates):
        raise SearchError(*failures)

    ok = [i for i, s in enumerate(scores) if not isinstance(s, Exception)]
    ok.sort(key=lambda i: (scores[i], sizes[i], i))
    board = [LeaderboardEntry(rank + 1, candidates[i], scores[i], sizes[i])
             for rank, i in enumerate(ok)]
    board += [LeaderboardEntry(None, c, None, n, str(s))
              for c, n, s in zip(candidates, sizes, scores)
              if isinstance(s, Exception)]
    log.info('search finished', candidates=len(candidates),
             failed=len(failures), best=json_config(board[0].config))
    return SearchResult(board[0].config, tuple(board))
