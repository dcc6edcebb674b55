import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import fig34_traceset, synth_clip

from rnnfuzz import build_model


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def fig34_ts():
    return fig34_traceset()


@pytest.fixture(scope="session")
def fig34_model(fig34_ts):
    return build_model(fig34_ts, k=1, m=4, k_in=1, m_in=2)


@pytest.fixture(scope="session")
def short_clip():
    return synth_clip(7, duration=0.5)
