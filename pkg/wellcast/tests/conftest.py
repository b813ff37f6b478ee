import json
from datetime import date, timedelta

import pytest


START = date(2008, 1, 1)


def day(n):
    """ISO date of day 'n' of a synthetic well starting on START."""
    return (START + timedelta(days=n)).isoformat()


def run_config(out_dir, n_days=200, horizon=40, lookback=7, models=None,
               **overrides):
    """A small but complete run config driving the synth stage."""
    if models is None:
        models = [
            {'name': 'gru', 'kind': 'gru',
             'params': {'hidden_units': 4, 'epochs': 3, 'batch_size': 16,
                        'learning_rate': 0.01}},
            {'name': 'gbt', 'kind': 'gbt',
             'params': {'rounds': 10, 'max_depth': 2}},
        ]
    config = {
        'lookback': lookback,
        'split': {'train_fraction': 0.8,
                  'oos_start': day(n_days - horizon),
                  'oos_end': day(n_days - 1)},
        'models': models,
        'alpha': 0.1,
        'seed': 3,
        'out_dir': str(out_dir),
        'synth': {
            'n_days': n_days,
            'physics': {'noise_std': 5.0, 'bhp_initial': 1500.0,
                        'bhp_period': 20, 'bhp_jitter': 150.0,
                        'missing_fraction': 0.02},
            'interventions': [{'day': n_days // 2, 'bhp_shift': -200.0}],
        },
    }
    config.update(overrides)
    return config


@pytest.fixture
def make_config(tmp_path):
    """Write a run config to a file and return its path."""

    def _make(name='run.json', **kwargs):
        kwargs.setdefault('out_dir', tmp_path / 'out')
        path = tmp_path / name
        path.write_text(json.dumps(run_config(**kwargs)), encoding='utf-8')
        return path

    return _make
