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
"""Run configuration: a validated JSON document driving every stage."""

import json
from datetime import date
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ._utils import WellcastError, config_hash
from .models import config_class, grid_candidates, random_candidates
from .synth import Intervention, WellPhysics


class ConfigError(WellcastError, ValueError):
    """The run configuration is unreadable or invalid."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class RealRange(_Strict):
    low: float
    high: float
    log: bool = False

    @model_validator(mode='after')
    def _ordered(self):
        if not self.low < self.high:
            raise ValueError('low must be below high')
        if self.log and self.low <= 0:
            raise ValueError('log ranges need low > 0')
        return self


class RandomSearch(_Strict):
    space: Dict[str, Union[List[Any], RealRange]]
    count: int = Field(10, ge=1)


class ModelSettings(_Strict):
    """One model to train; the fitted file is named after 'name'."""
    name: str = Field(pattern=r'^[A-Za-z0-9_.-]+$')
    kind: Literal['lstm', 'bilstm', 'gru', 'gbt']
    params: Dict[str, Any] = Field(default_factory=dict)
    search: Literal['none', 'grid', 'random'] = 'none'
    grid: Optional[Dict[str, List[Any]]] = None
    random: Optional[RandomSearch] = None
    validation_split: float = Field(0.2, gt=0, lt=1)

    @model_validator(mode='after')
    def _consistent(self):
        if self.search == 'random' and self.random is None:
            raise ValueError("search 'random' needs a 'random' section")
        for key in ('seed', 'cell'):
            if key in self.params:
                raise ValueError(f"'{key}' is set by the run, not by params")
        try:
            self.base_config(0)
        except TypeError as error:
            raise ValueError(f'bad model params: {error}') from None
        return self

    def base_config(self, seed):
        cls = config_class(self.kind)
        fixed = dict(self.params, seed=seed)
        if self.kind != 'gbt':
            fixed['cell'] = self.kind
        return cls(**fixed)

    def candidates(self, seed):
        """Candidate model configs, all seeded with the run seed."""
        base = self.base_config(seed)
        if self.search == 'grid':
            return grid_candidates(self.kind, self.grid, seed, base)
        if self.search == 'random':
            space = {k: (v.model_dump() if isinstance(v, RealRange) else v)
                     for k, v in self.random.space.items()}
            return random_candidates(self.kind, space, self.random.count,
                                     seed, base)
        return [base]


class FeatureSettings(_Strict):
    target: str = 'OPR_H'
    exogenous: List[str] = ['WPR_H', 'GPR_H', 'BHP_H']
    # horizon source for each input column; simulator outputs by default
    oos_inputs: Dict[str, str] = {'WPR_H': 'WPR', 'GPR_H': 'GPR',
                                  'BHP_H': 'BHP'}
    simulated_target: Optional[str] = 'OPR'
    # windows see the exogenous inputs of the day they predict
    same_day_inputs: bool = True
    derived_p_res: Optional[float] = Field(None, gt=0)

    @model_validator(mode='after')
    def _distinct(self):
        if self.target in self.exogenous:
            raise ValueError('the target cannot also be exogenous')
        return self


class SplitSettings(_Strict):
    train_fraction: float = Field(0.8, gt=0, lt=1)
    oos_start: date
    oos_end: date
    strict_calibration: bool = False

    @model_validator(mode='after')
    def _ordered(self):
        if self.oos_start > self.oos_end:
            raise ValueError('oos_start is after oos_end')
        return self


class ImputeSettings(_Strict):
    k: int = Field(5, ge=1)
    columns: Optional[List[str]] = None


class ChangepointSettings(_Strict):
    column: Optional[str] = None
    algorithms: List[Literal['pelt', 'binseg']] = ['pelt', 'binseg']
    penalty: Optional[float] = Field(None, ge=0)
    max_bkps: Optional[int] = Field(None, ge=0)
    restrict_training: bool = False


class InterventionSettings(_Strict):
    day: int = Field(ge=0)
    bhp_shift: float = 0.0
    shut_in_days: int = Field(0, ge=0)


class SynthSettings(_Strict):
    n_days: int = Field(1000, ge=2)
    physics: Dict[str, Any] = Field(default_factory=dict)
    interventions: List[InterventionSettings] = []

    @model_validator(mode='after')
    def _valid_physics(self):
        try:
            self.well_physics(0)
        except TypeError as error:
            raise ValueError(f'bad physics: {error}') from None
        return self

    def well_physics(self, seed):
        fields = dict(self.physics)
        fields.setdefault('seed', seed)
        return WellPhysics.from_dict(fields)

    def schedule(self):
        return [Intervention(**i.model_dump()) for i in self.interventions]


class RunConfig(_Strict):
    """Everything a run needs.

    'input_csv' defaults to the 'well.csv' written by the synth stage
    into 'out_dir'. The config hash, embedded in every artifact,
    covers everything except 'out_dir'.
    """
    input_csv: Optional[str] = None
    units: Dict[str, str] = Field(default_factory=dict)
    column_aliases: Dict[str, str] = Field(default_factory=dict)
    features: FeatureSettings = FeatureSettings()
    lookback: int = Field(30, ge=1)
    split: SplitSettings
    impute: ImputeSettings = ImputeSettings()
    changepoints: ChangepointSettings = ChangepointSettings()
    models: List[ModelSettings] = Field(min_length=1)
    alpha: float = Field(0.05, gt=0, lt=1)
    oos_target_feed: Literal['recursive', 'simulated'] = 'recursive'
    clamp_nonnegative: bool = False
    seed: int = 0
    out_dir: str = 'out'
    synth: Optional[SynthSettings] = None

    @model_validator(mode='after')
    def _unique_names(self):
        names = [m.name for m in self.models]
        if len(set(names)) != len(names):
            raise ValueError('model names must be unique')
        if (self.oos_target_feed == 'simulated'
                and self.features.simulated_target is None):
            raise ValueError("oos_target_feed 'simulated' needs "
                             'features.simulated_target')
        return self

    @property
    def out(self):
        return Path(self.out_dir)

    @property
    def digest(self):
        return config_hash(self.model_dump(mode='json', exclude={'out_dir'}))

    def model(self, name):
        for settings in self.models:
            if settings.name == name:
                return settings
        raise ConfigError(f'no model named {name!r} in the config')


def schema():
    """The published JSON schema of the run configuration."""
    return RunConfig.model_json_schema()


def parse_config(obj, out_dir=None, seed=None):
    """Validate a config mapping, applying command-line overrides."""
    obj = dict(obj)
    if out_dir is not None:
        obj['out_dir'] = str(out_dir)
    if seed is not None:
        obj['seed'] = int(seed)
    try:
        return RunConfig.model_validate(obj)
    except ValidationError as error:
        raise ConfigError(f'invalid run config:\n{error}') from None


def load_config(path, out_dir=None, seed=None):
    """Read and validate a JSON run config.

    Raises
    ------
    ConfigError if the file is missing, is not JSON, or violates the
    schema.
    """
    try:
        obj = json.loads(Path(path).read_text(encoding='utf-8'))
    except FileNotFoundError:
        raise ConfigError(f'config file {path} not found') from None
    except ValueError as error:
        raise ConfigError(f'{path} is not valid JSON: {error}') from None
    if not isinstance(obj, dict):
        raise ConfigError(f'{path} must hold a JSON object')
    return parse_config(obj, out_dir=out_dir, seed=seed)
