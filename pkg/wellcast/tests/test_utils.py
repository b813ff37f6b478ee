import threading

import pytest

from .._utils import (MultiError, WellcastError, atomic_write, config_hash,
                      parallel_map, provenance_line, thread_count,
                      translate_errors)


class Translated(RuntimeError):
    pass


def test_translate_errors():

    @translate_errors(KeyError, ValueError, into=Translated)
    def fails(error):
        raise error

    with pytest.raises(Translated, match='bad value') as info:
        fails(ValueError('bad value'))
    assert isinstance(info.value.__cause__, ValueError)

    # untranslated types pass through
    with pytest.raises(TypeError):
        fails(TypeError())


def test_multi_error_keeps_children():
    errors = (ValueError('a'), KeyError('b'))
    multi = MultiError(*errors)
    assert multi.children == errors
    assert isinstance(multi, WellcastError)


def test_parallel_map_preserves_order():
    seen = set()

    def square(x):
        seen.add(threading.get_ident())
        return x * x

    items = list(range(50))
    assert parallel_map(square, items, threads=4) == [x * x for x in items]
    assert parallel_map(square, items, threads=1) == [x * x for x in items]


def test_thread_count(monkeypatch):
    monkeypatch.delenv('WELLCAST_THREADS', raising=False)
    assert thread_count() == 1
    monkeypatch.setenv('WELLCAST_THREADS', '3')
    assert thread_count() == 3
    monkeypatch.setenv('WELLCAST_THREADS', '0')
    assert thread_count() == 1
    monkeypatch.setenv('WELLCAST_THREADS', 'many')
    with pytest.raises(WellcastError):
        thread_count()


def test_config_hash_ignores_key_order():
    assert config_hash({'a': 1, 'b': [1, 2]}) == config_hash({'b': [1, 2],
                                                               'a': 1})
    assert config_hash({'a': 1}) != config_hash({'a': 2})


def test_provenance_line():
    line = provenance_line('0123456789abcdef0123', 7)
    assert line == '# wellcast config=0123456789abcdef seed=7\n'


def test_atomic_write(tmp_path):
    path = tmp_path / 'sub' / 'file.txt'
    atomic_write(path, 'one\n')
    atomic_write(path, 'two\n')
    assert path.read_text() == 'two\n'
    assert [p.name for p in path.parent.iterdir()] == ['file.txt']
