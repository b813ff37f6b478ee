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
"""Synthetic wells with known physics.

Daily rates follow the Wiggins inflow performance relationship under a
linearly declining reservoir pressure and a piecewise-constant
bottom-hole pressure schedule. Interventions shift the schedule or
shut the well in, producing structural breaks. The noise-free rates
are emitted as the "simulated" columns OPR, WPR, GPR, BHP and their
noisy counterparts as the history columns OPR_H, WPR_H, GPR_H, BHP_H.
"""
from dataclasses import asdict, dataclass, field
from datetime import date
from typing import List, Optional

import numpy as np
import pandas as pd
from structlog import get_logger

from ._utils import WellcastError
from .features import wiggins_oil_ratio, wiggins_water_ratio
from .ingest import DATE_COLUMN, HISTORY_COLUMNS, SeriesFrame


UNITS = {
    'OPR_H': 'bbl/day', 'WPR_H': 'bbl/day', 'GPR_H': 'scf/day',
    'BHP_H': 'psi', 'OPR': 'bbl/day', 'WPR': 'bbl/day', 'GPR': 'scf/day',
    'BHP': 'psi',
}


class GeneratorError(WellcastError, ValueError):
    """Invalid physics or intervention schedule."""


@dataclass(frozen=True)
class WellPhysics:
    """Parameters of a synthetic well.

    Parameters
    ----------
    p_res_initial : float
        Reservoir pressure on day 0, psi.
    decline_rate : float
        Reservoir pressure lost per day.
    q_o_max, q_w_max : float
        Oil and water rates at full drawdown (p_wf = 0).
    noise_std : float
        Standard deviation of the Gaussian noise on the liquid rates;
        gas noise is scaled by the gas-oil ratio.
    seed : int
    bhp_initial : float, optional
        Baseline flowing pressure; half of 'p_res_initial' by default.
    bhp_period : int
        Days between changes of the flowing-pressure schedule.
    bhp_jitter : float
        Standard deviation of each schedule level around the baseline.
    water_cut_start, water_cut_end : float
        The water rate is scaled by a water cut ramping linearly between
        these two fractions over the series.
    gor_initial, gor_drift : float
        Gas-oil ratio on day 0 and its change per day.
    missing_fraction : float
        Fraction of history cells blanked at random, to exercise
        imputation.
    start_date : datetime.date
    """
    p_res_initial: float = 3000.0
    decline_rate: float = 0.2
    q_o_max: float = 1000.0
    q_w_max: float = 800.0
    noise_std: float = 5.0
    seed: int = 0
    bhp_initial: Optional[float] = None
    bhp_period: int = 30
    bhp_jitter: float = 0.0
    water_cut_start: float = 0.05
    water_cut_end: float = 0.60
    gor_initial: float = 800.0
    gor_drift: float = 0.1
    missing_fraction: float = 0.0
    start_date: date = date(2008, 1, 1)

    def __post_init__(self):
        if not self.q_o_max > 0:
            raise GeneratorError('q_o_max must be positive')
        if not self.p_res_initial > 0:
            raise GeneratorError('p_res_initial must be positive')
        for name in ('decline_rate', 'q_w_max', 'noise_std', 'bhp_jitter'):
            if getattr(self, name) < 0:
                raise GeneratorError(f'{name} must be non-negative')
        if self.bhp_period < 1:
            raise GeneratorError('bhp_period must be positive')
        if not 0 <= self.missing_fraction < 1:
            raise GeneratorError('missing_fraction must lie in [0, 1)')
        for name in ('water_cut_start', 'water_cut_end'):
            if not 0 <= getattr(self, name) <= 1:
                raise GeneratorError(f'{name} must lie in [0, 1]')

    @property
    def baseline_bhp(self):
        if self.bhp_initial is None:
            return self.p_res_initial / 2
        return self.bhp_initial

    def to_dict(self):
        d = asdict(self)
        d['start_date'] = self.start_date.isoformat()
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if isinstance(d.get('start_date'), str):
            d['start_date'] = date.fromisoformat(d['start_date'])
        return cls(**d)


@dataclass(frozen=True)
class Intervention:
    """An event on 'day': a persistent BHP shift and/or a shut-in."""
    day: int
    bhp_shift: float = 0.0
    shut_in_days: int = 0

    def __post_init__(self):
        if self.shut_in_days < 0:
            raise GeneratorError('shut_in_days must be non-negative')

    def to_dict(self):
        return asdict(self)


def reservoir_pressure(physics: WellPhysics, n_days):
    """p_res(t) = p_res_initial - decline_rate * t, floored at zero."""
    t = np.arange(n_days, dtype=float)
    return np.maximum(physics.p_res_initial - physics.decline_rate * t, 0.0)


def bhp_schedule(physics: WellPhysics, schedule: List[Intervention], n_days,
                 rng=None):
    """Flowing bottom-hole pressure before shut-ins, clamped to [0, p_res]."""
    if rng is None:
        rng = np.random.default_rng(physics.seed)
    n_periods = -(-n_days // physics.bhp_period)
    levels = physics.baseline_bhp + physics.bhp_jitter * rng.standard_normal(
        n_periods)
    bhp = np.repeat(levels, physics.bhp_period)[:n_days]
    for event in schedule:
        bhp[event.day:] += event.bhp_shift
    return np.clip(bhp, 0.0, reservoir_pressure(physics, n_days))


def _check_schedule(schedule, n_days):
    for event in schedule:
        if not 0 <= event.day < n_days:
            raise GeneratorError(f'intervention day {event.day} outside '
                                 f'[0, {n_days})')


def generate_well(physics: WellPhysics, schedule: List[Intervention] = (),
                  n_days=1000):
    """Generate a daily well history and its noise-free simulation.

    Returns
    -------
    SeriesFrame with columns OPR_H, WPR_H, GPR_H, BHP_H, OPR, WPR, GPR,
    BHP. All rates are non-negative; shut-in days produce nothing and
    sit at reservoir pressure.

    Raises
    ------
    GeneratorError if n_days < 2 or an intervention falls outside the
    series.
    """
    if n_days < 2:
        raise GeneratorError('n_days must be at least 2')
    schedule = sorted(schedule, key=lambda e: e.day)
    _check_schedule(schedule, n_days)
    rng = np.random.default_rng(physics.seed)

    p_res = reservoir_pressure(physics, n_days)
    bhp = bhp_schedule(physics, schedule, n_days, rng)
    producing = p_res > 0
    for event in schedule:
        producing[event.day:event.day + event.shut_in_days] = False

    oil_ratio = np.zeros(n_days)
    water_ratio = np.zeros(n_days)
    oil_ratio[producing] = wiggins_oil_ratio(bhp[producing], p_res[producing])
    water_ratio[producing] = wiggins_water_ratio(bhp[producing],
                                                 p_res[producing])

    t = np.arange(n_days, dtype=float)
    water_cut = np.linspace(physics.water_cut_start, physics.water_cut_end,
                            n_days)
    gor = np.maximum(physics.gor_initial + physics.gor_drift * t, 0.0)
    opr = physics.q_o_max * oil_ratio
    wpr = physics.q_w_max * water_ratio * water_cut
    gpr = gor * opr
    bhp = np.where(producing, bhp, p_res)

    noise = physics.noise_std * rng.standard_normal((3, n_days))
    history = {
        'OPR_H': np.where(producing, np.maximum(opr + noise[0], 0.0), 0.0),
        'WPR_H': np.where(producing, np.maximum(wpr + noise[1], 0.0), 0.0),
        'GPR_H': np.where(producing, np.maximum(gpr + gor * noise[2], 0.0),
                          0.0),
        'BHP_H': bhp.copy(),
    }
    if physics.missing_fraction > 0:
        blank = rng.random((len(HISTORY_COLUMNS), n_days))
        for row, column in zip(blank, HISTORY_COLUMNS):
            history[column][row < physics.missing_fraction] = np.nan

    index = pd.date_range(physics.start_date, periods=n_days, freq='D',
                          name=DATE_COLUMN)
    data = pd.DataFrame({**history, 'OPR': opr, 'WPR': wpr, 'GPR': gpr,
                         'BHP': bhp}, index=index)
    get_logger(__name__).info('generated well', days=n_days,
                              interventions=len(schedule),
                              seed=physics.seed)
    return SeriesFrame(data, dict(UNITS))
