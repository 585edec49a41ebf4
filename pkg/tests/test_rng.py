import numpy as np
import pytest

from pollinate import rng

# published SplitMix64 test vector (seed 1234567)
VECTOR_1234567 = [
    6457827717110365317,
    3203168211198807973,
    9817491932198370423,
    4593380528125082431,
    16408922859458223821,
]


def test_published_vector():
    assert [rng.splitmix64_at(1234567, i) for i in range(5)] == VECTOR_1234567


def test_array_matches_scalar():
    seeds = np.array([0, 1, 42, 2**64 - 1, 1234567], dtype=np.uint64)
    idx = np.array([0, 5, 3, 7, 1], dtype=np.uint64)
    got = rng.splitmix64_at_array(seeds, idx)
    want = [rng.splitmix64_at(int(s), int(i)) for s, i in zip(seeds, idx)]
    assert got.tolist() == want


def test_uniforms_in_unit_interval():
    u = rng.uniform_at_array(rng.trip_seeds(9, 0, 10_000), np.zeros(10_000, dtype=np.uint64))
    assert u.min() >= 0.0 and u.max() < 1.0
    assert u.mean() == pytest.approx(0.5, abs=0.01)


def test_stream_is_sequential():
    s = rng.UniformStream(42)
    assert [s.next() for _ in range(3)] == [rng.uniform_at(42, i) for i in range(3)]


def test_trip_seed_ranges_concatenate():
    whole = rng.trip_seeds(5, 0, 100)
    parts = np.concatenate([rng.trip_seeds(5, 0, 37), rng.trip_seeds(5, 37, 100)])
    assert np.array_equal(whole, parts)
    assert int(whole[3]) == rng.trip_seed(5, 3)
