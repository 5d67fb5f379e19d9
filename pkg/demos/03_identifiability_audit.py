"""Auditing identifiability and rescuing it with an intervention.

The separability condition compares the spread of the noise
cross-correlations with a budget set by the weakest edge and the spectral
radius.  When it fails, adding independent noise of a computable variance
to every node restores it.
"""
import numpy as np

from ndsid.graphgen import erdos_renyi, laplacian_weights
from ndsid.moments import limit_moments
from ndsid.noise import covariance_at_ratio
from ndsid.theory import check_theorem2, find_threshold, min_intervention, theorem2_rhs

A = laplacian_weights(erdos_renyi(12, 0.5, seed=4), alpha=0.6, rho=0.8)
rhs = theorem2_rhs(A.a_plus_min(), A.rho)

good = covariance_at_ratio(12, sigma2=3.0, beta=2.0, ratio=0.5 * rhs, seed=1)
print(check_theorem2(A.A, good).to_text())

bad = covariance_at_ratio(12, sigma2=3.0, beta=2.0, ratio=4.0 * rhs, seed=1)
report = check_theorem2(A.A, bad)
print(f"\nspread four times the budget: {report.verdict}, margin {report.thm2_margin:.3g}")

m = limit_moments(A.A, bad, 3)
print("limit NIG still thresholdable?", find_threshold(m[1] - m[3], A.A) is not None,
      "(the condition is sufficient only)")

var = min_intervention(A.A, bad)
boosted = bad.with_intervention(var)
print(f"\nadding intervention variance {var:.4f}: {check_theorem2(A.A, boosted).verdict}")
m = limit_moments(A.A, boosted, 3)
print("limit NIG thresholdable after intervention:", find_threshold(m[1] - m[3], A.A) is not None)
