import numpy as np
import pytest

from coverlab import _rng


def test_streams_are_reproducible_and_distinct():
    a = _rng.replicate_stream(7, 3).random(5)
    b = _rng.replicate_stream(7, 3).random(5)
    c = _rng.replicate_stream(7, 4).random(5)
    d = _rng.replicate_stream(8, 3).random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)
    assert not np.allclose(a, d)


def test_inner_and_auxiliary_streams_differ_from_replicates():
    base = _rng.replicate_stream(1, 0).random(3)
    assert not np.allclose(base, _rng.replicate_stream(1, 0, 0).random(3))
    assert not np.allclose(base, _rng.auxiliary_stream(1, 0).random(3))


def test_subseed_matches_nested_key():
    sub = _rng.subseed(5, 0, 2)
    x = _rng.replicate_stream(sub, 1).random(3)
    y = _rng.stream(5, 0, 2, 0, 1).random(3)
    np.testing.assert_array_equal(x, y)


@pytest.mark.parametrize("n_jobs", [2, 4])
def test_replicate_map_independent_of_workers(n_jobs):
    f = lambda i, g: (i, g.random())
    serial = _rng.replicate_map(f, 11, 700, n_jobs=1, block_size=64)
    parallel = _rng.replicate_map(f, 11, 700, n_jobs=n_jobs, block_size=64)
    assert serial == parallel
    assert [i for i, _ in serial] == list(range(700))


def test_seed_required_and_nonnegative():
    with pytest.raises(ValueError):
        _rng.stream(None, 0)
    with pytest.raises(ValueError):
        _rng.stream(-1, 0)
    with pytest.raises(ValueError):
        _rng.as_generator(None)


def test_resolve_n_jobs():
    assert _rng.resolve_n_jobs(None) == 1
    assert _rng.resolve_n_jobs(3) == 3
    assert _rng.resolve_n_jobs(-1) >= 1
