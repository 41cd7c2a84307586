import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mmbio.config import RunConfig
from mmbio.fp_enhance import FilterParams
from mmbio.synth import write_synth_dataset


@pytest.fixture
def params() -> FilterParams:
    return FilterParams()


@pytest.fixture
def cfg() -> RunConfig:
    return RunConfig()


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory) -> Path:
    """3-subject synthetic dataset shared by CLI and evaluation tests."""
    root = tmp_path_factory.mktemp("synth") / "data"
    write_synth_dataset(root, subjects=3, seed=777)
    return root


@pytest.fixture(scope="session")
def eval_dataset(tmp_path_factory) -> Path:
    """10-subject dataset used by the end-to-end acceptance criterion."""
    root = tmp_path_factory.mktemp("synth-eval") / "data"
    write_synth_dataset(root, subjects=10, seed=20240501)
    return root


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
