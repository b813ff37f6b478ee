import math

import numpy as np
import pytest

from ..metrics import (MetricError, MetricReport, forecast_bias, mae,
                       metric_report, pda, rmse, smape)


def test_examples():
    assert mae([0, 0], [1, 3]) == 2
    assert rmse([0, 0], [3, 4]) == pytest.approx(math.sqrt(25 / 2))
    assert smape([100], [100]) == 0
    assert smape([100], [50]) == pytest.approx(66.6667, abs=1e-4)
    assert smape([0], [0]) == 0
    assert forecast_bias([1, 2, 3], [2, 2, 2]) == 0
    assert forecast_bias([10, 10], [8, 8]) == 2
    assert pda([1, 2, 1, 2], [0, 1, 0, 1]) == 100
    assert pda([1, 2], [2, 1]) == 0
    assert pda([1, 1], [1, 1]) == 100


def test_identity():
    y = np.array([3.0, 1.0, 4.0, 1.0, 5.0])
    report = metric_report(y, y, 'test')
    assert (report.mae, report.rmse, report.smape, report.forecast_bias,
            report.pda) == (0, 0, 0, 0, 100)
    assert report.n == 5


def test_errors():
    for metric in (mae, rmse, smape, forecast_bias, pda):
        with pytest.raises(MetricError):
            metric([1.0, 2.0], [1.0])
        with pytest.raises(MetricError):
            metric([], [])
    with pytest.raises(MetricError):
        pda([1.0], [1.0])
    with pytest.raises(MetricError):
        metric_report([1.0, np.nan], [1.0, 2.0], 'test')
    with pytest.raises(MetricError):
        metric_report([1.0, 2.0], [1.0, 2.0], 'validation')


def test_identities_on_random_pairs():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(2, 30))
        y = rng.normal(size=n) * rng.choice([1, 100])
        y_hat = y + rng.standard_t(3, size=n)
        assert rmse(y, y_hat) >= mae(y, y_hat)
        assert forecast_bias(y, y_hat) == -forecast_bias(y_hat, y)
        assert 0 <= smape(y, y_hat) <= 200
        assert smape(y, y_hat) == pytest.approx(smape(y_hat, y))
        assert 0 <= pda(y, y_hat) <= 100


def test_rmse_bound_with_equal_error_sizes():
    # sqrt(mean(e**2)) alone can round below mean(|e|) here
    rng = np.random.default_rng(2)
    for _ in range(5000):
        n = int(rng.integers(2, 40))
        size = rng.uniform(0.001, 1000)
        y = rng.normal(size=n) * 100
        y_hat = y + size * rng.choice([-1.0, 1.0], size=n)
        assert rmse(y, y_hat) >= mae(y, y_hat)
    assert rmse([0.0, 0.0, 0.0], [0.1, -0.1, 0.1]) >= \
        mae([0.0, 0.0, 0.0], [0.1, -0.1, 0.1])


def test_order_and_scale():
    rng = np.random.default_rng(1)
    y = np.cumsum(rng.normal(size=50))
    y_hat = y + rng.normal(size=50)
    order = rng.permutation(50)
    for metric in (mae, rmse, smape, forecast_bias):
        assert metric(y[order], y_hat[order]) == pytest.approx(
            metric(y, y_hat))
    # direction accuracy depends on the order of the pairs
    assert pda([0, 1, 2], [0, 1, 0]) == 50
    assert pda([0, 2, 1], [0, 0, 1]) == 0

    assert mae(4 * y, 4 * y_hat) == pytest.approx(4 * mae(y, y_hat))
    assert rmse(4 * y, 4 * y_hat) == pytest.approx(4 * rmse(y, y_hat))
    assert smape(4 * y, 4 * y_hat) == pytest.approx(smape(y, y_hat))
    assert pda(4 * y, 4 * y_hat) == pda(y, y_hat)


def test_report_format():
    published = {'mae': 19.468, 'rmse': 24.195, 'smape': 6.943,
                 'forecast_bias': -12.295, 'pda': 13.225, 'n': 138,
                 'tag': 'test'}
    report = MetricReport.from_dict(published)
    assert report.to_dict() == published
    row = report.to_row('lstm', digits=1)
    assert row == {'model': 'lstm', 'dataset': 'test', 'n': 138,
                   'mae': 19.5, 'rmse': 24.2, 'smape': 6.9,
                   'forecast_bias': -12.3, 'pda': 13.2}
    with pytest.raises(MetricError):
        MetricReport(0, 0, 0, 0, 100, 2, 'other')
