import json
from pathlib import Path

import pytest

from ..config import ConfigError, load_config, parse_config, schema
from ..models import RecurrentConfig, TreeConfig
from .conftest import run_config


DEMO = Path(__file__).parent.parent / 'data' / 'demo.json'


def test_bundled_demo_config():
    config = load_config(DEMO)
    assert [m.name for m in config.models] == ['lstm', 'gbt']
    assert config.lookback == 7
    assert config.features.same_day_inputs
    assert config.synth.n_days == 1000
    assert config.synth.well_physics(config.seed).bhp_period == 45


def test_defaults(tmp_path):
    config = parse_config(run_config(tmp_path))
    assert config.features.target == 'OPR_H'
    assert config.features.exogenous == ['WPR_H', 'GPR_H', 'BHP_H']
    assert config.features.oos_inputs['BHP_H'] == 'BHP'
    assert config.oos_target_feed == 'recursive'
    assert config.impute.k == 5
    assert config.changepoints.algorithms == ['pelt', 'binseg']
    assert config.out == tmp_path


def test_digest_ignores_out_dir(tmp_path):
    one = parse_config(run_config(tmp_path / 'a'))
    two = parse_config(run_config(tmp_path / 'b'))
    assert one.digest == two.digest
    assert parse_config(run_config(tmp_path), seed=99).digest != one.digest


def test_overrides(tmp_path):
    config = parse_config(run_config(tmp_path), out_dir=tmp_path / 'x',
                          seed=12)
    assert config.out == tmp_path / 'x'
    assert config.seed == 12


@pytest.mark.parametrize('change', [
    {'unknown_key': 1},
    {'alpha': 1.5},
    {'lookback': 0},
    {'models': []},
    {'oos_target_feed': 'future'},
    {'features': {'target': 'OPR_H', 'exogenous': ['OPR_H']}},
    {'features': {'simulated_target': None}, 'oos_target_feed': 'simulated'},
    {'split': {'oos_start': '2008-06-01', 'oos_end': '2008-05-01'}},
    {'synth': {'physics': {'not_a_field': 1}}},
    {'synth': {'physics': {'q_o_max': -1}}},
])
def test_invalid_configs(tmp_path, change):
    with pytest.raises(ConfigError):
        parse_config(run_config(tmp_path, **change))


@pytest.mark.parametrize('model', [
    {'name': 'a', 'kind': 'lstm', 'params': {'layers': 3}},
    {'name': 'a', 'kind': 'lstm', 'params': {'seed': 3}},
    {'name': 'a', 'kind': 'lstm', 'params': {'hidden_units': 0}},
    {'name': 'a', 'kind': 'transformer'},
    {'name': 'a/b', 'kind': 'gbt'},
    {'name': 'a', 'kind': 'gbt', 'search': 'random'},
])
def test_invalid_models(tmp_path, model):
    with pytest.raises(ConfigError):
        parse_config(run_config(tmp_path, models=[model]))


def test_duplicate_model_names(tmp_path):
    models = [{'name': 'm', 'kind': 'gru'}, {'name': 'm', 'kind': 'gbt'}]
    with pytest.raises(ConfigError, match='unique'):
        parse_config(run_config(tmp_path, models=models))


def test_candidates(tmp_path):
    models = [
        {'name': 'plain', 'kind': 'bilstm', 'params': {'hidden_units': 6}},
        {'name': 'grid', 'kind': 'gru', 'search': 'grid',
         'params': {'epochs': 7},
         'grid': {'hidden_units': [4, 8], 'learning_rate': [0.1, 0.01]}},
        {'name': 'random', 'kind': 'gbt', 'search': 'random',
         'random': {'space': {'rounds': {'low': 10, 'high': 50},
                              'max_depth': [2, 3]}, 'count': 3}},
    ]
    config = parse_config(run_config(tmp_path, models=models, seed=21))

    plain = config.model('plain').candidates(config.seed)
    assert plain == [RecurrentConfig('bilstm', hidden_units=6, seed=21)]

    grid = config.model('grid').candidates(config.seed)
    assert len(grid) == 4
    assert all(c.cell == 'gru' and c.epochs == 7 and c.seed == 21
               for c in grid)

    random = config.model('random').candidates(config.seed)
    assert len(random) == 3
    assert all(isinstance(c, TreeConfig) and 10 <= c.rounds <= 50
               for c in random)
    assert random == config.model('random').candidates(config.seed)

    with pytest.raises(ConfigError):
        config.model('absent')


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match='not found'):
        load_config(tmp_path / 'absent.json')
    bad = tmp_path / 'bad.json'
    bad.write_text('{"models": [')
    with pytest.raises(ConfigError, match='not valid JSON'):
        load_config(bad)
    bad.write_text('[1, 2]')
    with pytest.raises(ConfigError, match='object'):
        load_config(bad)


def test_schema():
    doc = schema()
    assert {'models', 'split', 'features', 'alpha'} <= set(doc['properties'])
    assert 'split' in doc['required']
    json.dumps(doc)
