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
"""Point forecasters behind a common Forecaster contract.

Recurrent networks (LSTM, BiLSTM, GRU) and gradient-boosted trees are
trained on windowed, standardized data and predict the next-day target
in physical units.
"""

from .base import (WindowingError, ModelError, TrainingError,
                   WindowedDataset, Forecaster, make_windows, fit, predict,
                   parameter_count, to_json, from_json)
from .recurrent import RecurrentConfig, recurrent_forward, train_recurrent
from .trees import TreeConfig, train_gbt
from .search import (SearchError, SearchResult, LeaderboardEntry,
                     grid_search, grid_candidates, random_candidates,
                     config_class)

__all__ = [
    'WindowingError', 'ModelError', 'TrainingError', 'SearchError',
    'WindowedDataset', 'Forecaster', 'RecurrentConfig', 'TreeConfig',
    'SearchResult', 'LeaderboardEntry',
    'make_windows', 'fit', 'predict', 'parameter_count', 'to_json',
    'from_json', 'recurrent_forward', 'train_recurrent', 'train_gbt',
    'grid_search', 'grid_candidates', 'random_candidates', 'config_class',
]
