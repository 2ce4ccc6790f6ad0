import numpy as np
import pytest

from pilotveil import PilotConfig


@pytest.fixture
def config64():
    """Reference numerology: 64 subcarriers at 120 kHz."""
    return PilotConfig(n_subcarriers=64, subcarrier_spacing_hz=120e3)


@pytest.fixture
def config8():
    return PilotConfig(n_subcarriers=8, subcarrier_spacing_hz=120e3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
