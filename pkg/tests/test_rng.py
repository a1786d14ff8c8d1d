import numpy as np
from hypothesis import given, strategies as st

from offerforge.rng import MASK64, SplitMix64, derive_seed, fnv1a_64, fnv1a_64_rows, mix64


def reference_splitmix(seed, count):
    # straight transcription of the published splitmix64 step
    out, x = [], seed
    for _ in range(count):
        x = (x + 0x9E3779B97F4A7C15) & MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return out


def test_known_first_output():
    assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF


@given(st.integers(0, MASK64))
def test_matches_reference(seed):
    rng = SplitMix64(seed)
    assert [rng.next_u64() for _ in range(5)] == reference_splitmix(seed, 5)


@given(st.integers(0, MASK64), st.integers(0, 40))
def test_array_path_matches_scalar(seed, count):
    a, b = SplitMix64(seed), SplitMix64(seed)
    assert a.u64_array(count).tolist() == [b.next_u64() for _ in range(count)]
    assert a.next_u64() == b.next_u64()


def test_random_and_below_ranges():
    rng = SplitMix64(1)
    u = [rng.random() for _ in range(1000)]
    assert all(0.0 <= x < 1.0 for x in u)
    draws = [rng.below(7) for _ in range(7000)]
    assert set(draws) == set(range(7))
    assert np.all(SplitMix64(1).random_array(100) < 1.0)


def test_fnv_vectors():
    assert fnv1a_64(b"") == 0xCBF29CE484222325
    assert fnv1a_64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a_64(b"foobar") == 0x85944171F73967E8


def test_fnv_rows():
    keys = np.frombuffer(b"abcfoo", dtype=np.uint8).reshape(2, 3)
    assert fnv1a_64_rows(keys).tolist() == [fnv1a_64(b"abc"), fnv1a_64(b"foo")]


def test_derive_seed_and_mix():
    assert derive_seed(5, "ga_segmentation") == 5 ^ fnv1a_64(b"ga_segmentation")
    assert derive_seed(5, "a") != derive_seed(5, "b")
    assert mix64(0) == 0
