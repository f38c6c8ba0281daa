import numpy as np
import pytest
from threadpoolctl import threadpool_limits

import ekinv
from ekinv.experiments import build_linear1d, build_nonlinear2d


@pytest.fixture(scope="session", autouse=True)
def single_threaded_blas():
    # The dense blocks in this package are small; multithreaded BLAS only
    # adds overhead and breaks bit-reproducibility of reductions.
    with threadpool_limits(limits=1):
        yield


@pytest.fixture(scope="session")
def linear1d():
    """Production-scale noise-free 1-D problem (d = 255, K = 15, Gamma = I)."""
    return build_linear1d()


@pytest.fixture(scope="session")
def linear1d_small():
    """Coarse 1-D problem (d = 31) for reference-integration tests."""
    return build_linear1d(n_cells=32)


@pytest.fixture(scope="session")
def linear1d_noisy():
    """Noisy-data 1-D problem with gamma = 0.01 weighting."""
    return build_linear1d(noise_std=0.01)


@pytest.fixture(scope="session")
def fem2d():
    return ekinv.Fem2DNonlinear(n_cells=32)


@pytest.fixture(scope="session")
def nonlinear2d():
    return build_nonlinear2d()


@pytest.fixture(scope="session")
def kl5(linear1d):
    return ekinv.Ensemble(ekinv.kl_initial_ensemble(linear1d.prior, 5, seed=27))


def random_ensemble(size, dim, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return ekinv.Ensemble(scale * rng.standard_normal((size, dim)))
