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
"""Structural break detection in univariate series.

All detectors minimize the same penalized objective,

    sum over segments of l2_cost(segment) + penalty * (number of breakpoints)

where the L2 cost of a segment is its sum of squared deviations from the
segment mean. `pelt` finds the exact optimum, `binseg` approximates it by
greedy splitting, and `brute_force_segmentation` enumerates every
segmentation of a short series and is used to check the other two.

A breakpoint `b` separates the segments [.., b) and [b, ..); breakpoints
never include 0 or n. Every segment holds at least `min_size` samples.
"""
import itertools
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from structlog import get_logger

from ._utils import WellcastError


MIN_SIZE = 2
ORACLE_MAX_LENGTH = 16
ALGORITHMS = ('pelt', 'binseg')


class SegmentError(WellcastError, ValueError):
    """Invalid series, segment bounds or penalty."""


class OracleError(WellcastError, ValueError):
    """Series too long for exhaustive search."""


@dataclass(frozen=True)
class Segmentation:
    """Breakpoints of a series and the value of the penalized objective."""
    breakpoints: Tuple[int, ...]
    total_cost: float
    n: int

    def __post_init__(self):
        bkps = self.breakpoints
        if any(b <= 0 or b >= self.n for b in bkps):
            raise SegmentError('breakpoints must lie strictly inside (0, n)')
        if any(a >= b for a, b in zip(bkps, bkps[1:])):
            raise SegmentError('breakpoints must be strictly increasing')

    @property
    def segments(self):
        """(start, end) pairs partitioning [0, n)."""
        bounds = (0, *self.breakpoints, self.n)
        return list(zip(bounds, bounds[1:]))

    def to_dict(self, algorithm, penalty):
        return {
            'algorithm': algorithm,
            'penalty': float(penalty),
            'breakpoints': [int(b) for b in self.breakpoints],
            'total_cost': float(self.total_cost),
        }


class L2Cost:
    """Segment costs in O(1) from cumulative sums.

    The series is shifted by its first value before accumulating, so
    adding a constant to the series leaves every cost unchanged.
    """

    def __init__(self, series):
        x = np.asarray(series, dtype=float)
        x = x - x[0]
        self.n = x.size
        self._sum = np.concatenate([[0.0], np.cumsum(x)])
        self._sum_sq = np.concatenate([[0.0], np.cumsum(x * x)])

    def __call__(self, start, end):
        """Cost of [start, end); 'start' may be an integer array."""
        start = np.asarray(start)
        length = end - start
        total = self._sum[end] - self._sum[start]
        cost = self._sum_sq[end] - self._sum_sq[start] - total * total / length
        # cumulative sums can leave a tiny negative residue
        return np.maximum(cost, 0.0)


def _as_series(series):
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise SegmentError('series must be one-dimensional')
    if x.size < 2:
        raise SegmentError('series must have at least 2 samples')
    if not np.all(np.isfinite(x)):
        raise SegmentError('series contains non-finite values')
    return x


def _check_penalty(penalty):
    if not penalty >= 0:
        raise SegmentError(f'penalty must be non-negative, got {penalty}')
    return float(penalty)


def l2_cost(series, i, j):
    """Return the sum of squared deviations from the mean of series[i:j].

    Raises
    ------
    SegmentError unless 0 <= i < j <= len(series).
    """
    x = np.asarray(series, dtype=float)
    if not 0 <= i < j <= x.size:
        raise SegmentError(f'empty or out-of-range segment [{i}, {j})')
    segment = x[i:j]
    return float(((segment - segment.mean()) ** 2).sum())


def segmentation_cost(series, breakpoints, penalty):
    """Penalized objective of a given set of breakpoints."""
    cost = L2Cost(series)
    bounds = (0, *breakpoints, len(series))
    total = sum(float(cost(a, b)) for a, b in zip(bounds, bounds[1:]))
    return total + penalty * len(breakpoints)


def default_penalty(series):
    """Return 2 * sigma^2 * log(n), sigma^2 estimated from first differences.

    Differencing removes level shifts, so var(diff) / 2 estimates the
    noise variance even when the series has breaks.
    """
    x = _as_series(series)
    sigma2 = np.var(np.diff(x)) / 2
    return float(2 * sigma2 * np.log(x.size))


def _result(x, breakpoints, penalty):
    breakpoints = tuple(sorted(int(b) for b in breakpoints))
    return Segmentation(breakpoints,
                        segmentation_cost(x, breakpoints, penalty), x.size)


def pelt(series, penalty, min_size=MIN_SIZE):
    """Exact penalized segmentation by pruned dynamic programming.

    F(t), the optimal objective of series[:t], satisfies

        F(t) = min over tau of F(tau) + cost(tau, t) + penalty

    with F(0) = -penalty. A candidate tau with
    F(tau) + cost(tau, t) >= F(t) can never again be the unique best
    last breakpoint (the L2 cost is superadditive, pruning constant 0),
    so it is discarded once the segment [t, s) can satisfy the minimum
    segment length, i.e. from s = t + min_size on.

    Parameters
    ----------
    series : array of float, length n >= 2
    penalty : float >= 0
        Cost added per breakpoint.
    min_size : int
        Minimum number of samples in a segment.

    Returns
    -------
    Segmentation
    """
    x = _as_series(series)
    penalty = _check_penalty(penalty)
    cost = L2Cost(x)
    n = x.size

    F = np.full(n + 1, np.inf)
    F[0] = -penalty
    last = np.zeros(n + 1, dtype=int)
    candidates = [0]
    drop_at = {}

    for t in range(min_size, n + 1):
        candidates = [tau for tau in candidates if drop_at.get(tau, t + 1) > t]
        admissible = np.array([tau for tau in candidates
                               if t - tau >= min_size], dtype=int)
        if admissible.size == 0:
            continue
        fits = F[admissible] + cost(admissible, t)
        best = int(np.argmin(fits))
        F[t] = fits[best] + penalty
        last[t] = admissible[best]
        for tau in admissible[fits >= F[t]]:
            drop_at.setdefault(int(tau), t + min_size)
        candidates.append(t)

    breakpoints = []
    t = n
    while t > 0:
        t = int(last[t])
        if t > 0:
            breakpoints.append(t)

    result = _result(x, breakpoints, penalty)
    get_logger(__name__).debug('pelt', n=n, penalty=penalty,
                               breakpoints=len(result.breakpoints))
    return result


def _best_split(cost, start, end, min_size):
    """Return (gain, position) of the best single split of [start, end)."""
    positions = np.arange(start + min_size, end - min_size + 1)
    if positions.size == 0:
        return -np.inf, None
    whole = cost(start, end)
    gains = np.array([whole - cost(start, k) - cost(k, end)
                      for k in positions])
    best = int(np.argmax(gains))
    return float(gains[best]), int(positions[best])


def binseg(series, penalty, max_bkps=None, min_size=MIN_SIZE):
    """Greedy binary segmentation.

    At each step the single split, over all current segments, that
    most reduces the total cost is made. Splitting stops when the best
    reduction is below 'penalty' (or not positive), or when 'max_bkps'
    breakpoints have been placed. The result may be worse than 'pelt',
    never better.
    """
    x = _as_series(series)
    penalty = _check_penalty(penalty)
    if max_bkps is not None and max_bkps < 0:
        raise SegmentError('max_bkps must be non-negative')
    cost = L2Cost(x)

    splits = {(0, x.size): _best_split(cost, 0, x.size, min_size)}
    breakpoints = []
    while max_bkps is None or len(breakpoints) < max_bkps:
        # lowest segment start wins ties
        segment = max(sorted(splits), key=lambda s: splits[s][0])
        gain, position = splits[segment]
        if position is None or gain < penalty or gain <= 0:
            break
        del splits[segment]
        breakpoints.append(position)
        start, end = segment
        for part in ((start, position), (position, end)):
            splits[part] = _best_split(cost, *part, min_size)

    return _result(x, breakpoints, penalty)


def _admissible_breakpoints(n, min_size):
    """Yield every breakpoint tuple whose segments all have >= min_size."""
    inner = range(min_size, n - min_size + 1)
    for k in range(0, n // min_size):
        for combo in itertools.combinations(inner, k):
            bounds = (0, *combo, n)
            if all(b - a >= min_size for a, b in zip(bounds, bounds[1:])):
                yield combo


def brute_force_segmentation(series, penalty, min_size=MIN_SIZE):
    """Exhaustive minimum of the penalized objective.

    Ties go to fewer breakpoints, then to the lexicographically
    smallest set.

    Raises
    ------
    OracleError if the series has more than 16 samples.
    """
    x = _as_series(series)
    penalty = _check_penalty(penalty)
    if x.size > ORACLE_MAX_LENGTH:
        raise OracleError(f'exhaustive search limited to {ORACLE_MAX_LENGTH} '
                          f'samples, got {x.size}')
    best = min(_admissible_breakpoints(x.size, min_size),
               key=lambda b: (segmentation_cost(x, b, penalty), len(b), b))
    return _result(x, best, penalty)


def detect(series, algorithm='pelt', penalty=None, max_bkps=None):
    """Run a detector by name, with the default penalty if none is given.

    Returns
    -------
    segmentation : Segmentation
    penalty : float
        The penalty actually used.
    """
    if algorithm not in ALGORITHMS:
        raise SegmentError(f'unknown algorithm {algorithm!r}')
    if penalty is None:
        penalty = default_penalty(series)
    if algorithm == 'pelt':
        return pelt(series, penalty), penalty
    return binseg(series, penalty, max_bkps=max_bkps), penalty
