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
"""Reading well production tables and preparing them for modelling.

This module contains the `SeriesFrame` type, a daily, date-indexed table
of production rates and pressures, and the operations that take a raw
well CSV to an imputed frame split into train, test and out-of-sample
parts.
"""
import io
from dataclasses import dataclass, field
from datetime import date
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from structlog import get_logger

from ._utils import WellcastError


DATE_COLUMN = 'DATEPRD'
HISTORY_COLUMNS = ('OPR_H', 'WPR_H', 'GPR_H', 'BHP_H')
SIMULATED_COLUMNS = ('OPR', 'WPR', 'GPR', 'BHP')
KNOWN_COLUMNS = HISTORY_COLUMNS + SIMULATED_COLUMNS


class SchemaError(WellcastError, ValueError):
    """A required column is absent."""


class DataError(WellcastError, ValueError):
    """The table content violates a SeriesFrame invariant."""


class ImputationError(WellcastError, ValueError):
    """A missing cell could not be imputed."""


class SplitError(WellcastError, ValueError):
    """A chronological split could not be made."""


@dataclass(frozen=True, eq=False)
class SeriesFrame:
    """Date-indexed multivariate table with explicit missingness.

    Parameters
    ----------
    data : pandas.DataFrame
        Float columns, NaN marking a missing cell, indexed by a
        strictly increasing DatetimeIndex named 'DATEPRD'.
    units : dict: str → str
        Unit label per column, e.g. 'm3/day' or 'kPa'. Labels are
        carried through to reports; values are never converted.
    """
    data: pd.DataFrame
    units: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.data.index, pd.DatetimeIndex):
            raise DataError('SeriesFrame index must be a DatetimeIndex')
        if self.data.index.has_duplicates:
            raise DataError('duplicate dates in SeriesFrame')

    def __len__(self):
        return len(self.data)

    @property
    def index(self):
        return self.data.index

    @property
    def columns(self):
        return list(self.data.columns)

    @property
    def dates(self):
        """The index as a list of 'datetime.date'."""
        return [d.date() for d in self.data.index]

    def column(self, name):
        """Return a column as a float array."""
        if name not in self.data.columns:
            raise SchemaError(f'column {name} not present')
        return self.data[name].to_numpy(dtype=float)

    def n_missing(self, columns=None):
        """Return the number of missing cells in 'columns' (default: all)."""
        columns = self.columns if columns is None else list(columns)
        return int(self.data[columns].isna().to_numpy().sum())

    def is_daily(self):
        """Return True if the index advances by exactly one day per row."""
        if len(self) < 2:
            return True
        steps = np.diff(self.data.index.values).astype('timedelta64[D]')
        return bool(np.all(steps == np.timedelta64(1, 'D')))

    def with_data(self, data):
        """Return a new frame with the same unit labels."""
        units = {c: u for c, u in self.units.items() if c in data.columns}
        return SeriesFrame(data, units)

    def between(self, start, end):
        """Return rows with start <= date <= end."""
        return self.with_data(self.data.loc[pd.Timestamp(start):
                                            pd.Timestamp(end)].copy())

    def to_csv(self, header=''):
        """Render in the format read by 'parse_csv'.

        Parameters
        ----------
        header : str
            Comment lines (each starting with '#') written before the
            table, e.g. a provenance line.
        """
        out = self.data.copy()
        out.index = out.index.strftime('%Y-%m-%d')
        out.index.name = DATE_COLUMN
        return header + out.to_csv(lineterminator='\n')


@dataclass(frozen=True)
class SplitSpec:
    """Chronological split of a frame.

    Parameters
    ----------
    train_fraction : float
        Fraction in (0, 1) of the pre-horizon rows used for training.
    oos_start, oos_end : datetime.date
        Inclusive bounds of the out-of-sample horizon.
    """
    train_fraction: float
    oos_start: date
    oos_end: date

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise SplitError('train_fraction must lie in (0, 1)')
        if self.oos_start > self.oos_end:
            raise SplitError('oos_start is after oos_end')


# Reading

def parse_csv(source, schema: Sequence[str], units: Optional[Dict] = None,
              date_column=DATE_COLUMN):
    """Parse a well CSV into a SeriesFrame.

    Parameters
    ----------
    source : path, bytes or binary stream
        UTF-8 CSV with a header row. Lines starting with '#' are
        comments. Empty or non-numeric cells become missing.
    schema : list of str
        Columns that must be present; only these are kept.
    units : dict: str → str, optional
        Unit labels to attach to the columns.

    Raises
    ------
    SchemaError if the date column or a schema column is absent.
    DataError if dates are unparseable or duplicated.
    """
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    try:
        raw = pd.read_csv(source, dtype=str, keep_default_na=False,
                          comment='#', encoding='utf-8')
    except (pd.errors.ParserError, pd.errors.EmptyDataError,
            UnicodeDecodeError) as error:
        raise DataError(f'unreadable CSV: {error}') from None
    raw.columns = [c.strip() for c in raw.columns]
    required = [date_column, *schema]
    absent = [c for c in required if c not in raw.columns]
    if absent:
        raise SchemaError(f"missing columns: {', '.join(absent)}")

    try:
        dates = pd.to_datetime(raw[date_column].str.strip(), format='%Y-%m-%d')
    except (ValueError, TypeError) as error:
        raise DataError(f'unparseable date in {date_column}: {error}')
    if dates.duplicated().any():
        dupes = sorted(set(dates[dates.duplicated()].dt.strftime('%Y-%m-%d')))
        raise DataError(f"duplicate dates: {', '.join(dupes)}")

    data = pd.DataFrame(
        {c: pd.to_numeric(raw[c].str.strip(), errors='coerce')
         for c in schema},
        dtype=float,
    )
    data.index = pd.DatetimeIndex(dates, name=DATE_COLUMN)
    units = {c: u for c, u in (units or {}).items() if c in schema}

    get_logger(__name__).debug('parsed csv', rows=len(data),
                               missing=int(data.isna().to_numpy().sum()))
    return SeriesFrame(data, units)


def apply_aliases(frame: SeriesFrame, aliases: Dict[str, str]):
    """Substitute columns, e.g. a missing history BHP by the simulated one.

    Parameters
    ----------
    aliases : dict: str → str
        Maps the column to fill to the column providing the values.
        The target column is created if absent, and its missing cells
        are filled from the source column.
    """
    data = frame.data.copy()
    units = dict(frame.units)
    for column, source in aliases.items():
        if source not in data.columns:
            raise SchemaError(f'alias source {source} not present')
        if column in data.columns:
            data[column] = data[column].fillna(data[source])
        else:
            data[column] = data[source]
        if source in units:
            units.setdefault(column, units[source])
    return SeriesFrame(data, units)


def resample_daily(frame: SeriesFrame):
    """Put the frame on a daily grid.

    Days absent from the input get all-missing rows.

    Raises
    ------
    DataError if the frame is empty or its index is not increasing.
    """
    if len(frame) == 0:
        raise DataError('cannot resample an empty frame')
    if not frame.index.is_monotonic_increasing:
        raise DataError('dates must be increasing')
    data = frame.data.copy()
    data.index = data.index.normalize()
    if data.index.has_duplicates:
        raise DataError('several rows fall on the same day')
    return frame.with_data(data.asfreq('D'))


# Imputation

def _nan_distances(row, candidates):
    """Missing-aware Euclidean distance from 'row' to each candidate.

    Coordinates are compared only where both are observed, and the
    sum is rescaled by D / D_obs. Returns NaN where D_obs is 0.
    """
    n_columns = row.shape[0]
    both = ~np.isnan(row)[None, :] & ~np.isnan(candidates)
    shared = both.sum(axis=1)
    diff = np.where(both, candidates - row[None, :], 0.0)
    squared = (diff ** 2).sum(axis=1)
    with np.errstate(divide='ignore', invalid='ignore'):
        distance = np.sqrt(n_columns / shared * squared)
    distance[shared == 0] = np.nan
    return distance


def knn_impute(frame: SeriesFrame, k: int, columns: List[str]):
    """Fill missing cells with the mean of the k nearest rows.

    Distances between rows use only the selected columns, ignoring
    coordinates missing in either row (see '_nan_distances'). For each
    missing cell, eligible donors are the other rows that have that
    column observed and share at least one observed coordinate; the
    k closest (ties to the lower row index) are averaged with uniform
    weights. Rows missing every selected column take the column means.
    Observed cells are never modified.

    Raises
    ------
    ImputationError if k < 1, a column has no observed value, or a
    missing cell has no eligible donor.
    """
    if k < 1:
        raise ImputationError('k must be at least 1')
    absent = [c for c in columns if c not in frame.data.columns]
    if absent:
        raise SchemaError(f"missing columns: {', '.join(absent)}")

    values = frame.data[list(columns)].to_numpy(dtype=float)
    missing = np.isnan(values)
    if not missing.any():
        return frame.with_data(frame.data.copy())
    empty = [c for c, m in zip(columns, missing.all(axis=0)) if m]
    if empty:
        raise ImputationError(f"no observed values in: {', '.join(empty)}")

    means = np.nanmean(values, axis=0)
    filled = values.copy()
    for i in np.flatnonzero(missing.any(axis=1)):
        if missing[i].all():
            filled[i] = means
            continue
        distance = _nan_distances(values[i], values)
        distance[i] = np.nan
        for j in np.flatnonzero(missing[i]):
            eligible = ~np.isnan(distance) & ~missing[:, j]
            donors = np.flatnonzero(eligible)
            if donors.size == 0:
                raise ImputationError(
                    f'no eligible neighbour for row {i} '
                    f'({frame.index[i].date()}), column {columns[j]}')
            order = np.argsort(distance[donors], kind='stable')
            nearest = donors[order[:k]]
            filled[i, j] = values[nearest, j].mean()

    data = frame.data.copy()
    data[list(columns)] = filled
    get_logger(__name__).debug('imputed', cells=int(missing.sum()), k=k)
    return frame.with_data(data)


# Splitting

def split(frame: SeriesFrame, spec: SplitSpec):
    """Split into chronological train, test and out-of-sample frames.

    The out-of-sample frame holds the rows dated within
    [oos_start, oos_end]. The rows before it are split without
    shuffling: the first floor(train_fraction * n) rows are the
    training set, the rest the test set.

    Raises
    ------
    SplitError if the horizon is not covered by the frame, rows follow
    the horizon, or the train or test part would be empty.
    """
    if len(frame) == 0:
        raise SplitError('cannot split an empty frame')
    start, end = pd.Timestamp(spec.oos_start), pd.Timestamp(spec.oos_end)
    first, last = frame.index[0], frame.index[-1]
    if start < first or end > last:
        raise SplitError(
            f'out-of-sample window {spec.oos_start}..{spec.oos_end} is not '
            f'covered by the data ({first.date()}..{last.date()})')
    if end < last:
        raise SplitError(f'rows after oos_end {spec.oos_end} would be '
                         'left out of every split')

    before = frame.data.index < start
    history = frame.data[before]
    n_train = int(np.floor(spec.train_fraction * len(history)))
    if n_train == 0 or n_train == len(history):
        raise SplitError(
            f'out-of-sample window overlaps the train/test range: '
            f'{len(history)} rows precede {spec.oos_start}')

    train = frame.with_data(history.iloc[:n_train].copy())
    test = frame.with_data(history.iloc[n_train:].copy())
    oos = frame.with_data(frame.data[~before].copy())
    return train, test, oos
