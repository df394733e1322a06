import numpy as np
import pytest

from bitdram.dram import Chip, ChipConfig


@pytest.fixture
def small_config():
    return ChipConfig(
        banks=2, subarrays_per_bank=2, rows_per_subarray=64, row_bits=256
    )


@pytest.fixture
def chip(small_config):
    return Chip(small_config)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
