import numpy as np
import pytest

from ..models import (ModelError, RecurrentConfig, TrainingError,
                      WindowedDataset, predict, recurrent_forward,
                      train_recurrent)
from ..models import recurrent
from ..models.recurrent import (init_parameters, loss_and_gradients,
                                numerical_gradients, parameter_shapes)


CELLS = ['lstm', 'bilstm', 'gru']


@pytest.mark.parametrize('cell', CELLS)
def test_zero_network_outputs_zero(cell):
    config = RecurrentConfig(cell, hidden_units=3)
    params = {k: np.zeros(s) for k, s in parameter_shapes(config, 2).items()}
    window = np.random.default_rng(0).normal(size=(5, 2))
    assert recurrent_forward(config, params, window) == 0.0


def test_saturated_gru_is_finite():
    config = RecurrentConfig('gru', hidden_units=3)
    params = init_parameters(config, 2)
    params['b'][:] = 50.0
    window = np.full((20, 2), 1e3)
    assert np.isfinite(recurrent_forward(config, params, window))


@pytest.mark.parametrize('cell', CELLS)
def test_forward_is_deterministic(cell):
    config = RecurrentConfig(cell, hidden_units=4, seed=42)
    window = np.array([[0.5, -1.0], [2.0, 0.25]])
    first = recurrent_forward(config, init_parameters(config, 2), window)
    second = recurrent_forward(config, init_parameters(config, 2), window)
    assert first == second


def test_forward_checks_shapes():
    config = RecurrentConfig('lstm', hidden_units=3)
    params = init_parameters(config, 2)
    with pytest.raises(ModelError):
        recurrent_forward(config, params, np.zeros((4, 3)))
    with pytest.raises(ModelError):
        recurrent_forward(config, params, np.zeros(4))
    del params['w_out']
    with pytest.raises(ModelError):
        recurrent_forward(config, params, np.zeros((4, 2)))


def test_lstm_forget_bias_starts_at_one():
    config = RecurrentConfig('lstm', hidden_units=3)
    b = init_parameters(config, 2)['b']
    assert list(b) == [0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0, 0]
    gru = init_parameters(RecurrentConfig('gru', hidden_units=3), 2)
    assert not gru['b'].any()


def relative_error(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b),
                                       1e-6)


@pytest.mark.parametrize('cell', CELLS)
def test_gradients_match_finite_differences(cell):
    for seed in range(50):
        rng = np.random.default_rng(seed)
        hidden = int(rng.integers(1, 9))
        n_features = int(rng.integers(1, 4))
        steps = int(rng.integers(2, 4))
        config = RecurrentConfig(cell, hidden_units=hidden, seed=seed)
        params = {k: rng.normal(0, 0.5, size=s)
                  for k, s in parameter_shapes(config, n_features).items()}
        xs = rng.normal(size=(3, steps, n_features))
        ys = rng.normal(size=3)

        _, analytic = loss_and_gradients(config, params, xs, ys)
        numeric = numerical_gradients(config, params, xs, ys, step=1e-5)
        for name in params:
            assert relative_error(analytic[name], numeric[name]) < 1e-4, \
                (cell, seed, name)


def constant_dataset(m=100, lookback=5, n_features=2):
    rng = np.random.default_rng(7)
    return WindowedDataset(rng.normal(size=(m, lookback, n_features)),
                           np.zeros(m))


def test_fits_constant_target():
    dataset = constant_dataset()
    config = RecurrentConfig('lstm', hidden_units=4, epochs=50,
                             learning_rate=0.01, batch_size=8, seed=0)
    forecaster = train_recurrent(dataset, config)
    assert len(forecaster.loss_trace) == 50
    assert forecaster.loss_trace[-1] < 1e-3
    assert np.all(np.abs(predict(forecaster, dataset)) < 0.1)


def sine_dataset(n=205, lookback=5):
    t = np.arange(n)
    driver = np.sin(t / 8.0)
    target = 0.8 * np.roll(driver, 2) + 0.1 * np.cos(t / 3.0)
    X = np.column_stack([driver, target])
    windows = np.stack([X[i:i + lookback] for i in range(n - lookback)])
    return WindowedDataset(windows, target[lookback:])


def test_training_reduces_loss():
    config = RecurrentConfig('gru', hidden_units=8, epochs=200,
                             learning_rate=1e-3, seed=0)
    forecaster = train_recurrent(sine_dataset(), config)
    assert forecaster.loss_trace[-1] < forecaster.loss_trace[0]


@pytest.mark.parametrize('cell', CELLS)
def test_training_is_deterministic(cell):
    dataset = sine_dataset(n=60)
    config = RecurrentConfig(cell, hidden_units=3, epochs=5, seed=11)
    first = train_recurrent(dataset, config)
    second = train_recurrent(dataset, config)
    assert first.loss_trace == second.loss_trace
    np.testing.assert_array_equal(predict(first, dataset),
                                  predict(second, dataset))
    other = train_recurrent(dataset, RecurrentConfig(cell, hidden_units=3,
                                                     epochs=5, seed=12))
    assert other.loss_trace != first.loss_trace


def test_divergence_reports_epoch():
    dataset = WindowedDataset(np.ones((10, 3, 1)), np.full(10, 1e200))
    config = RecurrentConfig('lstm', hidden_units=2, epochs=5)
    with pytest.raises(TrainingError) as info:
        train_recurrent(dataset, config)
    assert info.value.epoch == 0


def test_early_stopping(monkeypatch):
    # a flat epoch loss never improves after the first epoch
    monkeypatch.setattr(recurrent, 'forward_batch',
                        lambda config, params, xs: np.zeros(len(xs)))
    dataset = constant_dataset(m=40)
    config = RecurrentConfig('gru', hidden_units=2, epochs=500, patience=3)
    forecaster = train_recurrent(dataset, config)
    assert forecaster.loss_trace == (0.0,) * 4


def test_empty_dataset():
    with pytest.raises(ModelError):
        train_recurrent(WindowedDataset(np.zeros((0, 3, 1)), np.zeros(0)),
                        RecurrentConfig())


def test_config_validation():
    for bad in ({'hidden_units': 0}, {'epochs': 0}, {'learning_rate': 0},
                {'batch_size': 0}, {'patience': 0}):
        with pytest.raises(ModelError):
            RecurrentConfig(**bad)
    config = RecurrentConfig('GRU', hidden_units=5)
    assert config.kind == 'gru'
    assert RecurrentConfig.from_dict(config.to_dict()) == config
