import numpy as np
import pytest

from srvsim.streams import BLOCK_SIZE, RandomStream, block_ranges, check_seed


def test_same_key_same_draws():
    assert np.array_equal(RandomStream(7, 3).uniform(size=50), RandomStream(7, 3).uniform(size=50))


def test_streams_differ_by_seed_and_index():
    base = RandomStream(7, 3).uniform(size=50)
    assert not np.array_equal(base, RandomStream(8, 3).uniform(size=50))
    assert not np.array_equal(base, RandomStream(7, 4).uniform(size=50))


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_seed_range(seed):
    with pytest.raises(ValueError):
        check_seed(seed)


def test_full_64_bit_seed_accepted():
    RandomStream(2**64 - 1).uniform()


def test_block_ranges_cover_exactly():
    n = 3 * BLOCK_SIZE + 17
    blocks = list(block_ranges(n))
    assert [j for j, _ in blocks] == [0, 1, 2, 3]
    assert sum(c for _, c in blocks) == n
    assert list(block_ranges(1)) == [(0, 1)]
