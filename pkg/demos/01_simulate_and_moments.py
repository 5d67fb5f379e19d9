"""Simulating a networked system and watching its lag moments converge.

A two-node undirected graph gets Laplacian-rule weights, white noise
drives the recursion, and the streaming accumulator produces empirical lag
covariances at several sample sizes in one pass.  The analytic limits come
from the series solution of the stationary covariance.
"""
import numpy as np

from ndsid.graphgen import Graph, laplacian_weights
from ndsid.moments import lag_moments_at, limit_moments
from ndsid.noise import flat_covariance
from ndsid.simulate import simulate

G = Graph(np.array([[0, 1], [1, 0]]), directed=False)
A = laplacian_weights(G, alpha=0.4, rho=0.6)
print("interaction matrix\n", A.A, "\nrow sums", A.A.sum(axis=1))

noise = flat_covariance(2, sigma2=1.0, beta=0.0)
ts = simulate(A, noise, length=200_003, seed=7)
print(f"\nsimulated {ts.length} states after a burn-in of {ts.meta['burn_in']}")

limit = limit_moments(A.A, noise, 3)
checkpoints = [1_000, 10_000, 100_000, 200_000]
empirical = lag_moments_at(ts, 3, checkpoints)

# The relative error of R_1 should shrink roughly like 1/sqrt(n).
for n in checkpoints:
    err = np.abs(empirical[n][1] - limit[1]) / np.abs(limit[1])
    print(f"n={n:>7}  max relative error of R_1: {err.max():.4f}")
