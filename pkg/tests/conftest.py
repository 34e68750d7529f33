import numpy as np
import pytest

from tiger.corpus import CorpusConfig, build_atlas


@pytest.fixture(scope="session")
def default_atlas():
    cfg = CorpusConfig(count=1)
    return build_atlas(cfg.charset, (16, 16), 0)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
