import numpy as np
import pytest

from fbmcsim import (
    Constellation,
    build_phydyas,
    generate_symbols,
    oqam_stagger,
    synthesize,
)


@pytest.fixture(scope="session")
def phydyas_4_64():
    return build_phydyas(4, 64)


@pytest.fixture(scope="session")
def frame_factory(phydyas_4_64):
    """Random QPSK frames; (seed, k, m) -> FbmcFrame, K defaults to 64."""

    cache = {64: phydyas_4_64}

    def make(seed=0, k=64, m=10, filt=None):
        if filt is None:
            filt = cache.setdefault(k, build_phydyas(4, k))
        block = generate_symbols(k, m, Constellation.QPSK, seed)
        return synthesize(oqam_stagger(block), filt)

    return make


@pytest.fixture(scope="session")
def frame_64(frame_factory):
    return frame_factory(seed=0)


def pytest_configure(config):
    np.seterr(over="raise")
