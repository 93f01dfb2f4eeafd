import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from krylov_errest.sparse_ops import (SparseMatrix, SpectralInterval, build_convection_diffusion,
                                      build_diag_spectrum)

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def diag64():
    return build_diag_spectrum(64, SpectralInterval(0.0, 4.0))


@pytest.fixture(scope="session")
def convdiff4():
    h = 1 / 5
    return build_convection_diffusion(4, 2 * 3.2 / h, 2 * (128 / 30) / h)


@pytest.fixture(scope="session")
def convdiff8():
    h = 1 / 9
    return build_convection_diffusion(8, 2 * 3.2 / h, 2 * (128 / 30) / h)


def random_sparse(rng, n, density=0.2, symmetric=False):
    M = rng.standard_normal((n, n)) * (rng.random((n, n)) < density)
    M += np.diag(rng.standard_normal(n))
    if symmetric:
        M = M + M.T
    return SparseMatrix.from_dense(M)
