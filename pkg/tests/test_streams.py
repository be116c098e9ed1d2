import numpy as np

from isotropy.streams import CHUNK, THREADS_ENV, Estimate, chunk_rng, chunk_sizes, default_workers, run_chunks


def _draw(seed, chunk, size):
    return chunk_rng(seed, chunk).integers(0, 1000, size).tolist()


def test_chunk_sizes():
    assert chunk_sizes(1) == [1]
    assert chunk_sizes(CHUNK) == [CHUNK]
    assert chunk_sizes(2 * CHUNK + 3) == [CHUNK, CHUNK, 3]


def test_streams_independent_of_worker_count():
    one = run_chunks(_draw, (), 3 * CHUNK + 10, seed=5, workers=1)
    many = run_chunks(_draw, (), 3 * CHUNK + 10, seed=5, workers=3)
    assert one == many
    assert one[0] != one[1]


def test_seeds_differ():
    assert _draw(1, 0, 5) != _draw(2, 0, 5)
    assert _draw(1, 0, 5) == _draw(1, 0, 5)


def test_default_workers(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "4")
    assert default_workers() == 4
    monkeypatch.setenv(THREADS_ENV, "junk")
    assert default_workers() == 1
    monkeypatch.delenv(THREADS_ENV)
    assert default_workers() == 1


def test_estimate():
    e = Estimate(25, 100)
    assert e.value == 0.25
    assert np.isclose(e.stderr, (0.25 * 0.75 / 100) ** 0.5)
    assert Estimate(0, 10).stderr == 0
