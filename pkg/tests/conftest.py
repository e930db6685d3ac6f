import numpy as np
import pytest

from models import BinaryMatrix, DenseMatrix
from solvers.annealer import SamplerConfig
from solvers.qubo import Qubo, build_column_qubo
from utils.matrix_io import generate_synthetic


@pytest.fixture
def planted():
    """Factory for planted instances: returns (A, B*, C*)."""
    def make(n=20, m=12, k=4, noise_sigma=0.0, density=0.5, seed=0):
        return generate_synthetic(n, m, k, noise_sigma=noise_sigma, density=density, seed=seed)
    return make


@pytest.fixture
def random_qubo():
    """Factory for QUBOs built from a random nonnegative basis and target column."""
    def make(k=6, n=10, seed=0):
        rng = np.random.default_rng(seed)
        B = DenseMatrix(np.abs(rng.standard_normal((n, k))))
        a_col = np.abs(rng.standard_normal(n)) * 2.0
        return build_column_qubo(B, a_col)
    return make


@pytest.fixture
def small_qubo():
    # linear=(-2, 0), b12 = 2: the column (1,0,1) against B=[[1,0],[0,1],[1,1]]
    return Qubo([-2.0, 0.0], [2.0], 2.0)


@pytest.fixture
def fast_sampler():
    return SamplerConfig(num_samples=20, sweeps_per_microsecond=2, seed=0)


@pytest.fixture
def identity_binary():
    def make(k):
        return BinaryMatrix(np.eye(k, dtype=np.uint8))
    return make
