import numpy as np
import pytest

from ndsid.graphgen import erdos_renyi, laplacian_weights
from ndsid.noise import build_covariance

A2 = np.array([[0.2, 0.4], [0.4, 0.2]])


@pytest.fixture
def two_node():
    return A2.copy()


def random_instance(seed, n=None, rho=None, beta=None, osc_frac=None):
    """Symmetric Laplacian-rule A plus a random covariance satisfying the homogeneity assumptions."""
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(4, 16))
    rho = rho or float(rng.choice([0.4, 0.6, 0.8]))
    while True:
        G = erdos_renyi(n, float(rng.uniform(0.2, 0.8)), directed=False, seed=int(rng.integers(1 << 30)))
        if G.n_edges() > 0:
            break
    A = laplacian_weights(G, float(rng.uniform(0.3, 1.0)) * rho, rho)
    sigma2 = float(rng.uniform(1.0, 5.0))
    beta = float(rng.uniform(0.0, 0.3)) * sigma2 if beta is None else beta
    osc = float(rng.uniform(0.0, 0.4)) * sigma2 if osc_frac is None else osc_frac * sigma2
    osc = min(osc, 1.2 * (sigma2 - beta))
    cov = build_covariance(n, sigma2, beta, osc, seed=int(rng.integers(1 << 30)))
    return A, cov
