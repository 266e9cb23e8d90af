import numpy as np
import pytest

from ami.synthgen import CopulaSpec, MarginalSpec, gen_copula_sample


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)


def gaussian_copula_normals(n: int, seed: int, rho: float = 0.5) -> np.ndarray:
    """Sample with a Gaussian copula and standard normal marginals."""
    spec = CopulaSpec(
        family="gaussian",
        param=rho,
        marginal_x=MarginalSpec("normal", 1.0),
        marginal_y=MarginalSpec("normal", 1.0),
        n=n,
        seed=seed,
    )
    return gen_copula_sample(spec)
