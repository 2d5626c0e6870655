import numpy as np
import pytest

from thermossd import PRESETS


@pytest.fixture
def univ():
    return PRESETS["university"]


@pytest.fixture
def cloud():
    return PRESETS["public-cloud"]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
