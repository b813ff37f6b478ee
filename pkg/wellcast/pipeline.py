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
"""The forecasting workflow, one function per stage.

Each stage reads the artifacts of the previous ones from the run's
output directory and writes its own. Outputs carry the config hash and
seed and no timestamps, so rerunning a stage on unchanged inputs
rewrites identical bytes.
"""
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from structlog import get_logger

from . import conformal, metrics
from ._utils import (WellcastError, atomic_write, config_hash, parallel_map,
                     provenance, provenance_line, timed, write_json)
from .changepoint import detect, pelt, default_penalty
from .config import RunConfig, SynthSettings
from .features import (FeatureError, FeatureSpec, add_ipr_features,
                       align_inputs, apply_scaler, fit_scaler,
                       select_features)
from .ingest import (KNOWN_COLUMNS, SeriesFrame, SplitSpec, apply_aliases,
                     knn_impute, parse_csv, resample_daily, split)
from .models import (LeaderboardEntry, ModelError, Forecaster, fit,
                     from_json, grid_search, make_windows, parameter_count,
                     predict, to_json)
from .models.search import json_config
from .synth import generate_well


WELL_CSV = 'well.csv'
PHYSICS_JSON = 'physics.json'
IMPUTED_CSV = 'imputed.csv'
CHANGEPOINTS_JSON = 'changepoints.json'
CHANGEPOINTS_CSV = 'changepoints.csv'
METRICS_CSV = 'metrics.csv'
COMPARISON_CSV = 'comparison.csv'
DERIVED_COLUMNS = ('WIGGINS_OIL', 'WIGGINS_WATER',
                   'WIGGINS_OIL_SIM', 'WIGGINS_WATER_SIM')


class MissingArtifactError(WellcastError, FileNotFoundError):
    """An upstream stage has not been run."""


class StaleModelError(ModelError):
    """A model file does not match the configured inputs."""


def model_path(out, name):
    return Path(out) / f'model-{name}.json'


def loss_path(out, name):
    return Path(out) / f'loss-{name}.csv'


def leaderboard_path(out, name):
    return Path(out) / f'leaderboard-{name}.csv'


def forecast_path(out, name):
    return Path(out) / f'forecast-{name}.csv'


def calibration_path(out, name):
    return Path(out) / f'calibration-{name}.json'


def metrics_path(out, name):
    return Path(out) / f'metrics-{name}.json'


def _require(path, stage):
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"{path} not found; run 'wellcast {stage}' "
                                   'first')
    return path


def _header(config: RunConfig, *comments):
    lines = provenance_line(config.digest, config.seed)
    return lines + ''.join(f'# {c}\n' for c in comments)


def _write_table(path, table: pd.DataFrame, header):
    return atomic_write(path, header + table.to_csv(index=False,
                                                    lineterminator='\n'))


def _read_table(path):
    return pd.read_csv(path, comment='#')


# Inputs

def feature_spec(config: RunConfig):
    f = config.features
    return FeatureSpec(f.target, list(f.exogenous), config.lookback,
                       exogenous_lead=int(f.same_day_inputs))


def input_columns(config: RunConfig):
    """Columns read from the well CSV, in a stable order."""
    f = config.features
    needed = {f.target, *f.exogenous, *f.oos_inputs.values()}
    if f.simulated_target is not None:
        needed.add(f.simulated_target)
    if config.impute.columns is not None:
        needed.update(config.impute.columns)
    if f.derived_p_res is not None:
        needed.add('BHP_H')
    needed -= set(DERIVED_COLUMNS)
    needed -= set(config.column_aliases)
    needed |= set(config.column_aliases.values())
    known = [c for c in KNOWN_COLUMNS if c in needed]
    return known + sorted(needed - set(known))


def horizon_columns(config: RunConfig):
    """Columns the blind forecast reads on the horizon.

    These are the 'oos_inputs' sources of the exogenous columns (with
    derived ratios traced back to their BHP column) and the simulated
    target. The target itself is never among them.
    """
    f = config.features
    sources = {f.oos_inputs.get(c, c) for c in f.exogenous}
    if f.simulated_target is not None:
        sources.add(f.simulated_target)
    for column in sources & set(DERIVED_COLUMNS):
        sources.add('BHP' if column.endswith('_SIM') else 'BHP_H')
    sources -= set(DERIVED_COLUMNS)
    sources.discard(f.target)
    return sources


def read_well(config: RunConfig):
    """Parse the configured well CSV (or the synthesized one)."""
    path = config.input_csv or config.out / WELL_CSV
    _require(path, 'synth')
    return parse_csv(path, input_columns(config), units=config.units)


def with_derived_features(config: RunConfig, frame: SeriesFrame):
    """Add Wiggins ratio columns when a reservoir pressure is configured."""
    p_res = config.features.derived_p_res
    if p_res is None:
        return frame
    frame = add_ipr_features(frame, p_res, 'BHP_H')
    if 'BHP' in frame.columns:
        frame = add_ipr_features(frame, p_res, 'BHP', suffix='_SIM')
    return frame


@dataclass(frozen=True, eq=False)
class PreparedData:
    frame: SeriesFrame
    train: SeriesFrame
    test: SeriesFrame
    oos: SeriesFrame
    spec: FeatureSpec

    @property
    def history(self):
        """Train and test rows together, in order."""
        return self.frame.with_data(
            pd.concat([self.train.data, self.test.data]))


def load_imputed(config: RunConfig):
    path = _require(config.out / IMPUTED_CSV, 'impute')
    columns = input_columns(config)
    columns += [c for c in config.column_aliases if c not in columns]
    return parse_csv(path, columns, units=config.units)


def prepare(config: RunConfig, frame: Optional[SeriesFrame] = None):
    """Split the imputed frame into train, test and horizon parts."""
    if frame is None:
        frame = load_imputed(config)
    frame = with_derived_features(config, frame)
    s = config.split
    if len(frame) and frame.index[-1] > pd.Timestamp(s.oos_end):
        get_logger(__name__).info('ignoring rows after the horizon',
                                  oos_end=str(s.oos_end))
        frame = frame.between(frame.index[0], s.oos_end)
    train, test, oos = split(frame, SplitSpec(s.train_fraction, s.oos_start,
                                              s.oos_end))
    return PreparedData(frame, train, test, oos, feature_spec(config))


# Stages

@timed
def synthesize(config: RunConfig):
    """Generate a synthetic well; writes well.csv and physics.json."""
    settings = config.synth or SynthSettings()
    physics = settings.well_physics(config.seed)
    schedule = settings.schedule()
    frame = generate_well(physics, schedule, settings.n_days)
    out = config.out
    written = [
        atomic_write(out / WELL_CSV, frame.to_csv(_header(config))),
        write_json(out / PHYSICS_JSON, {
            'physics': physics.to_dict(),
            'interventions': [e.to_dict() for e in schedule],
            'n_days': settings.n_days,
            'provenance': provenance(config.digest, config.seed),
        }),
    ]
    return written


def impute_frame(config: RunConfig, frame: SeriesFrame):
    """Alias, resample and impute the history and the horizon separately.

    On the horizon only the forecast's inputs (see 'horizon_columns')
    are imputed, and only they serve as distance coordinates, so the
    observed horizon target never shapes the inputs. Other horizon
    gaps, and horizon inputs with no observed value at all, are left
    missing.
    """
    log = get_logger(__name__)
    frame = resample_daily(apply_aliases(frame, config.column_aliases))
    columns = config.impute.columns or frame.columns
    inputs = horizon_columns(config)
    start = pd.Timestamp(config.split.oos_start)
    parts = []
    for name, part, selected in (
            ('history', frame.data[frame.index < start], columns),
            ('horizon', frame.data[frame.index >= start],
             [c for c in columns if c in inputs])):
        if part.empty:
            continue
        sub = frame.with_data(part.copy())
        usable = [c for c in selected if part[c].notna().any()]
        skipped = sorted(set(selected) - set(usable))
        if skipped:
            log.warning('not imputing unobserved columns', part=name,
                        columns=skipped)
        if usable:
            sub = knn_impute(sub, config.impute.k, usable)
        parts.append(sub.data)
    return frame.with_data(pd.concat(parts))


@timed
def impute(config: RunConfig):
    """Writes imputed.csv."""
    frame = impute_frame(config, read_well(config))
    return [atomic_write(config.out / IMPUTED_CSV,
                         frame.to_csv(_header(config)))]


def find_changepoints(config: RunConfig, frame: SeriesFrame):
    """Run the configured detectors on the pre-horizon part of a column."""
    cp = config.changepoints
    column = cp.column or config.features.target
    history = frame.data[frame.index < pd.Timestamp(config.split.oos_start)]
    series = history[column].to_numpy(dtype=float)
    if np.isnan(series).any():
        raise FeatureError(f'{column} has missing values; impute first')
    dates = [d.date().isoformat() for d in history.index]
    results = []
    for algorithm in cp.algorithms:
        segmentation, penalty = detect(series, algorithm, cp.penalty,
                                       cp.max_bkps)
        record = segmentation.to_dict(algorithm, penalty)
        record['dates'] = [dates[b] for b in segmentation.breakpoints]
        results.append((record, segmentation))
    return column, history, results


@timed
def changepoints(config: RunConfig):
    """Writes changepoints.json and the plot-ready changepoints.csv."""
    column, history, results = find_changepoints(config, load_imputed(config))
    table = pd.DataFrame({
        'date': history.index.strftime('%Y-%m-%d'),
        column: history[column].to_numpy(),
    })
    for record, segmentation in results:
        segment = np.zeros(len(history), dtype=int)
        for b in segmentation.breakpoints:
            segment[b:] += 1
        table[f"{record['algorithm']}_segment"] = segment
    doc = {
        'column': column,
        'results': [record for record, _ in results],
        'provenance': provenance(config.digest, config.seed),
    }
    return [write_json(config.out / CHANGEPOINTS_JSON, doc),
            _write_table(config.out / CHANGEPOINTS_CSV, table,
                         _header(config))]


# Training

@dataclass(frozen=True, eq=False)
class TrainedModel:
    name: str
    forecaster: Forecaster
    leaderboard: Tuple[LeaderboardEntry, ...]


def training_rows(config: RunConfig, train: SeriesFrame):
    """The training frame, optionally cut at its last structural break."""
    if not config.changepoints.restrict_training:
        return train
    log = get_logger(__name__)
    series = train.column(config.features.target)
    penalty = config.changepoints.penalty
    if penalty is None:
        penalty = default_penalty(series)
    breakpoints = pelt(series, penalty).breakpoints
    if not breakpoints:
        return train
    last = breakpoints[-1]
    if len(train) - last < 2 * config.lookback + 1:
        log.warning('last segment too short; training on all rows',
                    rows=len(train) - last)
        return train
    log.info('training after the last break', start=str(train.dates[last]))
    return train.with_data(train.data.iloc[last:].copy())


def train_model(config: RunConfig, settings, prepared: PreparedData):
    """Select hyperparameters and fit one configured model."""
    spec = prepared.spec
    train = training_rows(config, prepared.train)
    X, y = select_features(train, spec)
    scaler = fit_scaler(X)
    target_scaler = fit_scaler(y)
    dataset = make_windows(align_inputs(apply_scaler(scaler, X),
                                        spec.exogenous_lead),
                           apply_scaler(target_scaler, y),
                           spec.lookback, train.dates)
    candidates = settings.candidates(config.seed)
    if len(candidates) > 1:
        result = grid_search(dataset, candidates, settings.validation_split,
                             target_scaler=target_scaler)
        best, board = result.best, result.leaderboard
    else:
        best = candidates[0]
        board = (LeaderboardEntry(1, best, None, parameter_count(
            best, dataset.n_features, dataset.lookback)),)
    forecaster = fit(dataset, best, scaler=scaler,
                     target_scaler=target_scaler,
                     input_columns=spec.input_columns)
    forecaster = replace(forecaster, metadata=dict(
        forecaster.metadata, exogenous_lead=spec.exogenous_lead))
    get_logger(__name__).info('model ready', name=settings.name,
                              config=json_config(best))
    return TrainedModel(settings.name, forecaster, board)


@timed
def train(config: RunConfig, prepared: Optional[PreparedData] = None):
    """Writes model-, loss- and leaderboard- files for every model."""
    prepared = prepared or prepare(config)
    trained = parallel_map(lambda s: train_model(config, s, prepared),
                           config.models)
    header = _header(config)
    written = []
    for model in trained:
        out = config.out
        record = provenance(config.digest, config.seed)
        written.append(atomic_write(model_path(out, model.name),
                                    to_json(model.forecaster, record)))
        loss = pd.DataFrame({'epoch': range(len(model.forecaster.loss_trace)),
                             'mse': model.forecaster.loss_trace})
        written.append(_write_table(loss_path(out, model.name), loss, header))
        board = pd.DataFrame([e.to_row() for e in model.leaderboard])
        written.append(_write_table(leaderboard_path(out, model.name), board,
                                    header))
    return written


# Forecasting

def load_model(path):
    path = _require(path, 'train')
    return from_json(Path(path).read_text(encoding='utf-8'))


def check_compatible(forecaster: Forecaster, spec: FeatureSpec):
    """Raise StaleModelError unless the model was trained on these inputs."""
    expected = tuple(spec.input_columns)
    if forecaster.input_columns is not None and \
            tuple(forecaster.input_columns) != expected:
        raise StaleModelError(
            f"model inputs {', '.join(forecaster.input_columns)} do not "
            f"match the configured {', '.join(expected)}")
    if forecaster.n_features != len(expected):
        raise StaleModelError(f'model expects {forecaster.n_features} '
                              f'features, config gives {len(expected)}')
    if forecaster.lookback != spec.lookback:
        raise StaleModelError(f'model lookback {forecaster.lookback} differs '
                              f'from the configured {spec.lookback}')
    lead = forecaster.metadata.get('exogenous_lead', 0)
    if lead != spec.exogenous_lead:
        raise StaleModelError(f'model exogenous lead {lead} differs from '
                              f'the configured {spec.exogenous_lead}')


def test_predictions(forecaster: Forecaster, prepared: PreparedData):
    """One-step predictions for every test row, from observed history."""
    history = prepared.history
    X, y = select_features(history, prepared.spec)
    X = align_inputs(X, prepared.spec.exogenous_lead)
    n_test = len(prepared.test)
    dataset = make_windows(X, y, forecaster.lookback, history.dates)
    if len(dataset) < n_test:
        raise FeatureError('too few training rows to fill the first '
                           'test window')
    dataset = dataset.subset(slice(len(dataset) - n_test, len(dataset)))
    return predict(forecaster, dataset), dataset.targets


def forecast_horizon(forecaster: Forecaster, history_X, horizon: SeriesFrame,
                     spec: FeatureSpec, oos_inputs, feed='recursive',
                     simulated_target=None):
    """Blind forecast of every horizon day.

    Windows start from the last lookback rows of the history. On the
    horizon, each exogenous column is read from its 'oos_inputs'
    source (the simulator output); the target channel holds either the
    model's own previous predictions ('recursive') or the simulated
    target ('simulated'). With 'spec.exogenous_lead' 1 each window
    also carries the exogenous inputs of the day it predicts. The
    target column of the horizon is never read.
    """
    lookback, lead = forecaster.lookback, spec.exogenous_lead
    sources = [oos_inputs.get(c, c) for c in spec.exogenous]
    absent = [c for c in sources if c not in horizon.columns]
    if absent:
        raise FeatureError(f"horizon inputs missing: {', '.join(absent)}")
    exog = horizon.data[sources].to_numpy(dtype=float)
    if np.isnan(exog).any():
        raise FeatureError('horizon inputs contain missing values')
    history_X = np.asarray(history_X, dtype=float)
    if history_X.shape[0] < lookback:
        raise FeatureError(f'need {lookback} history rows to start the '
                           'forecast')
    start, n = history_X.shape[0], exog.shape[0]
    # one timeline of history then horizon days
    exog_all = np.vstack([history_X[:, :-1], exog])
    target_all = np.concatenate([history_X[:, -1], np.zeros(n)])

    def window(i):
        rows = np.arange(start + i - lookback, start + i)
        return np.column_stack([exog_all[rows + lead], target_all[rows]])

    if feed == 'simulated':
        target_all[start:] = horizon.column(simulated_target)
        return predict(forecaster, np.stack([window(i) for i in range(n)]))

    points = np.zeros(n)
    for i in range(n):
        points[i] = predict(forecaster, window(i)[None])[0]
        target_all[start + i] = points[i]
    return points


@dataclass(frozen=True, eq=False)
class ForecastResult:
    table: pd.DataFrame
    calibration: conformal.ConformalCalibration
    summary: dict


def _coverage(intervals, actual):
    known = ~np.isnan(actual)
    if not known.any():
        return None, None
    sub = conformal.IntervalForecast(intervals.point[known],
                                     intervals.lower[known],
                                     intervals.upper[known], intervals.alpha)
    report = conformal.coverage_report(sub, actual[known])
    return (report.coverage,
            100 * len(report.out_of_bounds) / float(known.sum()))


def _rows(dataset, dates, intervals, actual, simulated):
    in_bounds = (intervals.lower <= actual) & (actual <= intervals.upper)
    return pd.DataFrame({
        'date': [d.isoformat() for d in dates],
        'dataset': dataset,
        'point': intervals.point,
        'lower': intervals.lower,
        'upper': intervals.upper,
        'actual': actual,
        'simulated': simulated,
        'in_bounds': pd.array(np.where(np.isnan(actual), None,
                                       in_bounds.astype(int)), dtype='Int64'),
    })


def forecast_model(config: RunConfig, forecaster: Forecaster,
                   prepared: PreparedData, name='model'):
    """Test predictions, calibration and the blind horizon forecast."""
    log = get_logger(__name__)
    check_compatible(forecaster, prepared.spec)
    f = config.features
    test_point, test_actual = test_predictions(forecaster, prepared)
    test_dates = [d.date() for d in prepared.test.index]

    n_cal = len(test_point)
    if config.split.strict_calibration:
        n_cal = len(test_point) // 2
        if n_cal == 0:
            raise conformal.CalibrationError('too few test rows to set '
                                             'aside a calibration half')
    scores = conformal.nonconformity_scores(test_actual[:n_cal],
                                            test_point[:n_cal])
    cal = conformal.calibrate(scores, config.alpha)

    history_X, _ = select_features(prepared.history, prepared.spec)
    oos = prepared.oos
    oos_point = forecast_horizon(forecaster, history_X, oos, prepared.spec,
                                 f.oos_inputs, config.oos_target_feed,
                                 f.simulated_target)
    oos_actual = oos.data[f.target].to_numpy(dtype=float)
    if f.simulated_target in oos.columns:
        oos_sim = oos.column(f.simulated_target)
    else:
        oos_sim = np.full(len(oos), np.nan)
    test_sim = (prepared.test.column(f.simulated_target)
                if f.simulated_target in prepared.test.columns
                else np.full(len(test_dates), np.nan))

    test_iv = conformal.predict_interval(test_point, cal)
    oos_iv = conformal.predict_interval(oos_point, cal)
    if config.clamp_nonnegative:
        test_iv, oos_iv = test_iv.clamped(), oos_iv.clamped()

    tags = np.array(['test'] * len(test_point), dtype=object)
    if config.split.strict_calibration:
        tags[:n_cal] = 'calibration'
    table = pd.concat([
        _rows(tags, test_dates, test_iv, test_actual, test_sim),
        _rows('forecast', [d.date() for d in oos.index], oos_iv, oos_actual,
              oos_sim),
    ], ignore_index=True)

    evaluated = slice(n_cal, None) if config.split.strict_calibration \
        else slice(None)
    test_eval = conformal.IntervalForecast(
        test_iv.point[evaluated], test_iv.lower[evaluated],
        test_iv.upper[evaluated], cal.alpha)
    summary = {'model': name, 'strict_calibration':
               config.split.strict_calibration, **cal.to_dict()}
    for tag, iv, actual in (('test', test_eval, test_actual[evaluated]),
                            ('forecast', oos_iv, oos_actual)):
        coverage, oob = _coverage(iv, actual)
        shortfall = (coverage is not None
                     and conformal.coverage_shortfall(coverage, cal.alpha))
        if shortfall:
            log.warning('coverage shortfall', model=name, dataset=tag,
                        coverage=coverage, target=1 - cal.alpha)
        summary[tag] = {'coverage': coverage, 'out_of_bounds_pct': oob,
                        'coverage_shortfall': shortfall}
    summary['caveat'] = conformal.EXCHANGEABILITY_CAVEAT
    return ForecastResult(table, cal, summary)


@timed
def forecast(config: RunConfig, model_file=None,
             prepared: Optional[PreparedData] = None):
    """Writes forecast- and calibration- files.

    With 'model_file', forecasts with that model only (e.g. one trained
    on another well), named after the file.
    """
    prepared = prepared or prepare(config)
    if model_file is not None:
        stem = Path(model_file).stem
        jobs = [(stem[len('model-'):] if stem.startswith('model-') else stem,
                 Path(model_file))]
    else:
        jobs = [(m.name, model_path(config.out, m.name))
                for m in config.models]
    written = []
    for name, path in jobs:
        result = forecast_model(config, load_model(path), prepared, name)
        doc = dict(result.summary,
                   provenance=provenance(config.digest, config.seed))
        written.append(_write_table(
            forecast_path(config.out, name), result.table,
            _header(config, conformal.EXCHANGEABILITY_CAVEAT)))
        written.append(write_json(calibration_path(config.out, name), doc))
    return written


# Evaluation

def _known(frame):
    return frame[frame['actual'].notna()]


def _metric_report(actual, point, tag):
    if len(actual) < 2:
        return None
    return metrics.metric_report(actual, point, tag)


def evaluate_table(table: pd.DataFrame, alpha):
    """Metric reports and coverage for one forecast table.

    Returns
    -------
    reports : dict: tag → MetricReport (or None when too few values)
    coverage : dict: tag → dict
    baselines : dict: name → MetricReport
        Persistence of the last observed value, and the simulator
        itself scored against the actual horizon values.
    """
    reports, coverage = {}, {}
    for tag in ('test', 'forecast'):
        rows = _known(table[table['dataset'] == tag])
        reports[tag] = _metric_report(rows['actual'].to_numpy(float),
                                      rows['point'].to_numpy(float), tag)
        if len(rows):
            inside = ((rows['lower'] <= rows['actual'])
                      & (rows['actual'] <= rows['upper']))
            value = float(inside.mean())
            coverage[tag] = {
                'coverage': value,
                'out_of_bounds_pct': 100 * float((~inside).mean()),
                'coverage_shortfall': conformal.coverage_shortfall(value,
                                                                   alpha),
            }
        else:
            coverage[tag] = {'coverage': None, 'out_of_bounds_pct': None,
                             'coverage_shortfall': False}

    baselines = {}
    history = table[table['dataset'] != 'forecast']
    horizon = _known(table[table['dataset'] == 'forecast'])
    if len(history) and len(horizon):
        last = float(history['actual'].iloc[-1])
        baselines['persistence'] = _metric_report(
            horizon['actual'].to_numpy(float),
            np.full(len(horizon), last), 'forecast')
        simulated = horizon[horizon['simulated'].notna()]
        if len(simulated) == len(horizon):
            baselines['simulator'] = _metric_report(
                horizon['actual'].to_numpy(float),
                horizon['simulated'].to_numpy(float), 'simulated-vs-actual')
    return reports, coverage, baselines


def _metric_row(model, report, coverage=None):
    row = {'model': model, 'dataset': report.tag, 'n': report.n}
    row.update({m: getattr(report, m) for m in metrics.METRICS})
    coverage = coverage or {}
    row['coverage'] = coverage.get('coverage')
    row['out_of_bounds_pct'] = coverage.get('out_of_bounds_pct')
    row['coverage_shortfall'] = coverage.get('coverage_shortfall')
    return row


@timed
def evaluate(config: RunConfig):
    """Writes metrics-<name>.json per model and the metrics.csv table."""
    rows, written, baselines = [], [], {}
    for settings in config.models:
        name = settings.name
        path = _require(forecast_path(config.out, name), 'forecast')
        calibration = _require(calibration_path(config.out, name),
                               'forecast')
        alpha = json.loads(calibration.read_text(encoding='utf-8'))['alpha']
        reports, coverage, found = evaluate_table(_read_table(path),
                                                  float(alpha))
        baselines = baselines or found
        doc = {
            'model': name,
            'reports': [r.to_dict() for r in reports.values() if r],
            'coverage': coverage,
            'bias_legend': metrics.BIAS_LEGEND,
            'caveat': conformal.EXCHANGEABILITY_CAVEAT,
            'provenance': provenance(config.digest, config.seed),
        }
        written.append(write_json(metrics_path(config.out, name), doc))
        rows += [_metric_row(name, r, coverage[tag])
                 for tag, r in reports.items() if r]
    rows += [_metric_row(name, r) for name, r in baselines.items() if r]
    table = pd.DataFrame(rows, columns=[
        'model', 'dataset', 'n', *metrics.METRICS, 'coverage',
        'out_of_bounds_pct', 'coverage_shortfall'])
    written.append(_write_table(
        config.out / METRICS_CSV, table,
        _header(config, metrics.BIAS_LEGEND,
                conformal.EXCHANGEABILITY_CAVEAT)))
    return written


# Comparison

def comparison_table(configs: List[RunConfig], digits=3):
    """One row per (run, trained model): test and forecast metrics side by
    side, then horizon coverage and out-of-bounds percentage."""
    rows = []
    for config in configs:
        table = _read_table(_require(config.out / METRICS_CSV, 'evaluate'))
        names = [m.name for m in config.models]
        for name in names:
            mine = table[table['model'] == name]
            row = {'run': config.out.name, 'model': name}
            for tag in ('test', 'forecast'):
                match = mine[mine['dataset'] == tag]
                for m in metrics.METRICS:
                    row[f'{tag}_{m}'] = (round(float(match[m].iloc[0]), digits)
                                         if len(match) else None)
            horizon = mine[mine['dataset'] == 'forecast']
            for key in ('coverage', 'out_of_bounds_pct'):
                row[key] = (round(float(horizon[key].iloc[0]), digits)
                            if len(horizon) and pd.notna(horizon[key].iloc[0])
                            else None)
            rows.append(row)
    return pd.DataFrame(rows)


@timed
def compare(configs: List[RunConfig], out=None):
    """Writes comparison.csv, into the first run's directory by default."""
    out = Path(out) if out is not None else configs[0].out
    digest = config_hash([c.digest for c in configs])
    seeds = {c.seed for c in configs}
    seed = seeds.pop() if len(seeds) == 1 else 0
    header = provenance_line(digest, seed) + f'# {metrics.BIAS_LEGEND}\n'
    return [_write_table(out / COMPARISON_CSV, comparison_table(configs),
                         header)]
