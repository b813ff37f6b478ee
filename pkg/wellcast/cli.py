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
"""Command-line interface to wellcast."""

import sys
import json
import logging
import argparse
import traceback

import structlog
from termcolor import colored

from . import __version__, pipeline
from .config import load_config, schema as config_schema
from ._utils import WellcastError, translate_errors


EXIT_OK = 0
EXIT_STAGE_ERROR = 2


class StageError(RuntimeError):
    """Signal the command-line interface that a stage failed."""


stage = translate_errors(WellcastError, FileNotFoundError, into=StageError)


def main(argv=None):
    """Execute the wellcast command-line interface"""
    args = parse_arguments(argv)

    command = globals()[f'cmd_{args.command}']

    setup_logging(args)

    try:
        command(args)
        returncode = EXIT_OK
    except StageError as error:
        print(f"{colored('Error', 'red', attrs=['bold'])}:", error,
              file=sys.stderr)
        returncode = EXIT_STAGE_ERROR

    return returncode


def render_logs(logger, method, event):
    """Render logs into a format suitable for CLI output."""
    if event.get('exc_info'):
        msg = ''.join(traceback.format_exception(*sys.exc_info()))
    else:
        context = ' '.join(f'{k}={v}' for k, v in event.items()
                           if k not in ('event', 'timestamp', 'level',
                                        'logger'))
        msg = f"{event['event']} {context}".rstrip()
    if method in ('warning', 'error', 'critical'):
        msg = colored(msg, 'yellow' if method == 'warning' else 'red')
    return f"[{colored(logger.name, attrs=['bold'])}] {msg}"


def setup_logging(args):
    """Set up logging."""
    cfg = structlog.get_config()
    # replace the plain key=value renderer
    cfg['processors'][-1] = render_logs

    logging.basicConfig(
        stream=sys.stderr,
        level=(logging.DEBUG if getattr(args, 'debug', False)
               else logging.INFO),
        format='%(message)s',
    )


def parse_arguments(argv=None):
    """Return the parsed arguments of the wellcast command-line interface."""
    parser = argparse.ArgumentParser(
        'wellcast',
        description='Well production forecasting with conformal '
                    'prediction intervals')
    subparsers = parser.add_subparsers(dest='command')

    parser.add_argument('--version', action='version',
                        version=f'wellcast {__version__}')

    def _stage(name, help, description=None, multiple=False):
        sub = subparsers.add_parser(name, help=help,
                                    description=description or help)
        sub.add_argument('--config', required=True,
                         action='append' if multiple else 'store',
                         help='Path to the JSON run config'
                              + (' (repeatable)' if multiple else ''))
        sub.add_argument('--out', type=str,
                         help="Output directory, overriding the config's "
                              "'out_dir'")
        sub.add_argument('--seed', type=int,
                         help="Random seed, overriding the config's 'seed'")
        sub.add_argument('--debug', action='store_true',
                         help='Print debugging information')
        return sub

    _stage('synth', 'Generate a synthetic well (well.csv, physics.json)')
    _stage('impute', 'Resample daily and impute missing cells (imputed.csv)')
    _stage('changepoints', 'Detect structural breaks in the target series',
           description="Run PELT and/or binary segmentation on the "
                       "pre-horizon part of the target column and write "
                       "the breakpoints as JSON and a plot-ready CSV.")
    _stage('train', 'Tune and train every configured model')
    forecast_parser = _stage(
        'forecast', 'Predict the test period and the blind horizon',
        description="Predict the test period, calibrate conformal "
                    "intervals on it, and forecast the out-of-sample "
                    "horizon from simulated inputs. With '--model', use "
                    "that model file instead of the configured models, "
                    "e.g. one trained on another well.")
    forecast_parser.add_argument('--model', type=str,
                                 help='Path to a model file')
    _stage('evaluate', 'Score forecasts and baselines (metrics.csv)')
    _stage('compare', 'Tabulate the metrics of several runs side by side',
           multiple=True)

    subparsers.add_parser(
        'schema',
        help='Print the JSON schema of the run config')

    args = parser.parse_args(argv)

    if not args.command:
        parser.error('no command provided')

    return args


def _config(args):
    return load_config(args.config, out_dir=args.out, seed=args.seed)


def _report(paths):
    log = structlog.get_logger(__name__)
    for path in paths:
        log.info('wrote', path=str(path))


# Subcommands

@stage
def cmd_synth(args):
    """Generate a synthetic well."""
    _report(pipeline.synthesize(_config(args)))


@stage
def cmd_impute(args):
    """Resample and impute the well data."""
    _report(pipeline.impute(_config(args)))


@stage
def cmd_changepoints(args):
    """Detect structural breaks."""
    _report(pipeline.changepoints(_config(args)))


@stage
def cmd_train(args):
    """Train the configured models."""
    _report(pipeline.train(_config(args)))


@stage
def cmd_forecast(args):
    """Forecast with the trained models."""
    _report(pipeline.forecast(_config(args), model_file=args.model))


@stage
def cmd_evaluate(args):
    """Compute metrics for the forecasts."""
    _report(pipeline.evaluate(_config(args)))


@stage
def cmd_compare(args):
    """Compare several runs."""
    configs = [load_config(path, seed=args.seed) for path in args.config]
    _report(pipeline.compare(configs, out=args.out))


def cmd_schema(_):
    """Print the run-config JSON schema."""
    print(json.dumps(config_schema(), indent=2, sort_keys=True))


if __name__ == '__main__':
    sys.exit(main())
