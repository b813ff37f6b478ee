import math
from datetime import date

import numpy as np
import pandas as pd
import pytest

from ..ingest import (DataError, ImputationError, SchemaError, SeriesFrame,
                      SplitError, SplitSpec, apply_aliases, knn_impute,
                      parse_csv, resample_daily, split)


def frame_of(rows, columns=('a', 'b'), start='2020-01-01'):
    index = pd.date_range(start, periods=len(rows), freq='D', name='DATEPRD')
    return SeriesFrame(pd.DataFrame(np.array(rows, dtype=float),
                                    columns=list(columns), index=index))


# Reading

def test_parse_csv():
    text = (b'# wellcast config=abc seed=0\n'
            b'DATEPRD,OPR_H,BHP_H,EXTRA\n'
            b'2020-01-01,1.5,200,x\n'
            b'2020-01-02,,210,y\n'
            b'2020-01-03,n/a,220,z\n')
    frame = parse_csv(text, ['OPR_H', 'BHP_H'], units={'OPR_H': 'bbl/day'})
    assert frame.columns == ['OPR_H', 'BHP_H']
    assert frame.dates == [date(2020, 1, d) for d in (1, 2, 3)]
    assert frame.n_missing() == 2
    assert frame.units == {'OPR_H': 'bbl/day'}


def test_parse_csv_missing_column():
    with pytest.raises(SchemaError, match='BHP_H'):
        parse_csv(b'DATEPRD,OPR_H\n2020-01-01,1\n', ['OPR_H', 'BHP_H'])


def test_parse_csv_bad_dates():
    with pytest.raises(DataError, match='duplicate'):
        parse_csv(b'DATEPRD,OPR_H\n2020-01-01,1\n2020-01-01,2\n', ['OPR_H'])
    with pytest.raises(DataError):
        parse_csv(b'DATEPRD,OPR_H\n01/02/2020,1\n', ['OPR_H'])


def test_csv_round_trip():
    frame = frame_of([[1, 2], [np.nan, 4.25]])
    again = parse_csv(frame.to_csv('# header\n').encode(), ['a', 'b'])
    pd.testing.assert_frame_equal(again.data, frame.data,
                                  check_freq=False)


def test_apply_aliases():
    frame = frame_of([[1, np.nan], [2, 5]], columns=('BHP', 'BHP_H'))
    out = apply_aliases(frame, {'BHP_H': 'BHP', 'NEW': 'BHP'})
    assert list(out.column('BHP_H')) == [1, 5]
    assert list(out.column('NEW')) == [1, 2]
    with pytest.raises(SchemaError):
        apply_aliases(frame, {'X': 'absent'})


# Resampling

def test_resample_daily_fills_gaps():
    data = pd.DataFrame({'a': [1.0, 4.0]},
                        index=pd.DatetimeIndex(['2020-01-01', '2020-01-04'],
                                               name='DATEPRD'))
    out = resample_daily(SeriesFrame(data))
    assert len(out) == 4
    assert out.is_daily()
    assert out.n_missing() == 2


def test_resample_daily_idempotent():
    frame = frame_of([[1, 2], [3, 4], [5, 6]])
    once = resample_daily(frame)
    pd.testing.assert_frame_equal(resample_daily(once).data, once.data)
    pd.testing.assert_frame_equal(once.data, frame.data, check_freq=False)
    single = frame_of([[1, 2]])
    assert len(resample_daily(single)) == 1


def test_resample_daily_empty():
    with pytest.raises(DataError):
        resample_daily(frame_of(np.zeros((0, 2))))


# Imputation

def test_knn_impute_tie_goes_to_lower_row():
    frame = frame_of([[1, 2], [2, np.nan], [3, 4]])
    out = knn_impute(frame, 1, ['a', 'b'])
    assert out.column('b')[1] == 2


def test_knn_impute_exact_neighbour():
    frame = frame_of([[0, 0], [4, np.nan], [4, 6]])
    out = knn_impute(frame, 1, ['a', 'b'])
    assert out.column('b')[1] == 6


def test_knn_impute_no_missing_is_identity():
    frame = frame_of([[1, 2], [3, 4]])
    pd.testing.assert_frame_equal(knn_impute(frame, 3, ['a', 'b']).data,
                                  frame.data)


def test_knn_impute_all_missing_row_takes_column_means():
    frame = frame_of([[1, 2], [np.nan, np.nan], [3, 6]])
    out = knn_impute(frame, 1, ['a', 'b'])
    assert list(out.data.iloc[1]) == [2, 4]


def test_knn_impute_errors():
    frame = frame_of([[1, np.nan], [np.nan, np.nan]])
    with pytest.raises(ImputationError, match='b'):
        knn_impute(frame, 1, ['a', 'b'])
    with pytest.raises(ImputationError):
        knn_impute(frame_of([[1, 2]]), 0, ['a'])
    # the rows share no observed coordinate
    frame = frame_of([[1, np.nan], [np.nan, 2]])
    with pytest.raises(ImputationError, match='no eligible'):
        knn_impute(frame, 1, ['a', 'b'])


def brute_force_impute(values, k):
    """Impute by enumerating every pair of rows."""
    n, D = values.shape
    out = values.copy()
    means = [np.nanmean(values[:, j]) for j in range(D)]
    for i in range(n):
        row = values[i]
        if not np.isnan(row).any():
            continue
        if np.isnan(row).all():
            out[i] = means
            continue
        distances = []
        for r in range(n):
            if r == i:
                continue
            shared = [c for c in range(D)
                      if not (math.isnan(row[c]) or math.isnan(values[r, c]))]
            if not shared:
                continue
            s = sum((values[r, c] - row[c]) ** 2 for c in shared)
            distances.append((math.sqrt(D / len(shared) * s), r))
        for j in range(D):
            if not math.isnan(row[j]):
                continue
            donors = sorted((d, r) for d, r in distances
                            if not math.isnan(values[r, j]))
            out[i, j] = np.mean([values[r, j] for _, r in donors[:k]])
    return out


@pytest.mark.parametrize('seed', range(30))
def test_knn_impute_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 21))
    D = int(rng.integers(1, 5))
    # small integers make distance ties common
    values = rng.integers(0, 6, size=(n, D)).astype(float)
    holes = rng.random((n, D)) < 0.3
    holes[:2] = False
    values[holes] = np.nan
    k = int(rng.integers(1, 5))
    columns = [f'c{j}' for j in range(D)]

    out = knn_impute(frame_of(values, columns), k, columns)

    result = out.data[columns].to_numpy()
    np.testing.assert_allclose(result, brute_force_impute(values, k))
    assert not np.isnan(result).any()
    observed = ~np.isnan(values)
    assert np.array_equal(result[observed], values[observed])


# Splitting

def test_split_counts_and_order():
    frame = frame_of(np.arange(240).reshape(120, 2))
    spec = SplitSpec(0.8, frame.dates[100], frame.dates[-1])
    train, test, oos = split(frame, spec)
    assert (len(train), len(test), len(oos)) == (80, 20, 20)
    assert train.index[-1] < test.index[0] < oos.index[0]


def test_split_small():
    frame = frame_of(np.zeros((12, 2)))
    train, test, oos = split(frame, SplitSpec(0.8, frame.dates[10],
                                              frame.dates[11]))
    assert (len(train), len(test), len(oos)) == (8, 2, 2)


def test_split_errors():
    frame = frame_of(np.zeros((12, 2)))
    with pytest.raises(SplitError):
        split(frame, SplitSpec(0.8, date(2019, 12, 1), frame.dates[-1]))
    with pytest.raises(SplitError):
        split(frame, SplitSpec(0.8, frame.dates[5], frame.dates[8]))
    with pytest.raises(SplitError):
        # a single pre-horizon row cannot be split in two
        split(frame, SplitSpec(0.8, frame.dates[1], frame.dates[-1]))
    with pytest.raises(SplitError):
        SplitSpec(1.2, frame.dates[5], frame.dates[-1])
