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
"""Miscellaneous utilities."""

import os
import json
import time
import hashlib
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from decorator import decorator
from structlog import get_logger


THREADS_ENV = 'WELLCAST_THREADS'


# Errors

class WellcastError(Exception):
    """Base class for all errors raised by wellcast."""


class MultiError(WellcastError):
    """Combine several exceptions"""
    def __init__(self, *exceptions):
        super().__init__()
        self.children = exceptions

    def __str__(self):
        return ','.join(repr(c) for c in self.children)


def translate_errors(*exceptions_to_translate, into):
    """Re-raise selected exception types as 'into'.

    The original exception is chained as the cause, and its message
    is kept.
    """

    def _wrapper(func, *args, **kwargs):
        try:
            return func(*args, **kwargs)
        except into:
            raise
        except exceptions_to_translate as error:
            raise into(str(error) or repr(error)) from error

    return decorator(_wrapper)


@decorator
def timed(func, *args, **kwargs):
    """Log the wall-clock duration of the decorated function."""
    log = get_logger(func.__module__)
    start = time.perf_counter()
    result = func(*args, **kwargs)
    log.debug(f"{func.__name__} finished",
              seconds=round(time.perf_counter() - start, 3))
    return result


# Parallelism

def thread_count(default=1):
    """Return the thread cap from the WELLCAST_THREADS environment variable."""
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return default
    try:
        threads = int(raw)
    except ValueError:
        raise WellcastError(f'{THREADS_ENV} must be an integer, got {raw!r}')
    return max(1, threads)


def parallel_map(func, items, threads=None):
    """Apply 'func' to each of 'items', preserving order.

    Uses a thread pool when more than one thread is allowed. Results
    are always returned in the order of 'items', so the outcome does
    not depend on scheduling.
    """
    items = list(items)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(func, items))


# Provenance and files

def canonical_json(obj):
    """Serialize 'obj' as JSON with sorted keys and no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(',', ':'))


def config_hash(obj):
    """Return the SHA-256 hex digest of the canonical JSON of 'obj'."""
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def provenance(digest, seed):
    """Return the provenance record embedded in every artifact."""
    return {'config': digest[:16], 'seed': int(seed)}


def provenance_line(digest, seed):
    """Return the comment line that heads every CSV artifact."""
    record = provenance(digest, seed)
    return f"# wellcast config={record['config']} seed={record['seed']}\n"


def atomic_write(path, content):
    """Write text content to 'path' atomically.

    The content goes to a temporary file in the same directory which
    is then renamed over 'path', so readers never see a partial file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=f'.{path.name}.')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as file:
            file.write(content)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.remove(tmp)
        except OSError:
            pass
        raise
    return path


def write_json(path, obj):
    """Atomically write 'obj' as indented, key-sorted JSON."""
    return atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + '\n')
