"""Pair features and a small neural classifier.

Each ordered pair of observed nodes gets a vector of lag-moment entries (F)
and inverse lag-moment entries (T).  A feedforward network trained on one
graph, across several noise correlation levels, then labels the pairs of a
different graph.
"""
import numpy as np

from ndsid.classify import GraphEstimate, TrainingSpec, accuracy, ffnn_predict, ffnn_train
from ndsid.features import build_K, pooled, standard_scale
from ndsid.graphgen import erdos_renyi, laplacian_weights, sample_observed
from ndsid.moments import lag_moments
from ndsid.noise import covariance_at_ratio
from ndsid.simulate import simulate
from ndsid.theory import theorem2_rhs

N, S, n = 20, 15, 30_000


def dataset(graph_seed, beta, seed):
    A = laplacian_weights(erdos_renyi(N, 0.5, seed=graph_seed), alpha=0.6, rho=0.8)
    cov = covariance_at_ratio(N, beta + 1.0, beta, 0.5 * theorem2_rhs(A.a_plus_min(), 0.8), seed=seed)
    s = sample_observed(N, S, seed=graph_seed)
    ts = simulate(A, cov, n + 4, seed=seed)
    K = build_K(lag_moments(ts.data[:, s.indices], 4, n))
    return K.with_labels(A.A[np.ix_(s.indices, s.indices)])


# Each dataset is standardized on its own, which removes the common drift that beta adds to every pair.
train = pooled([standard_scale(dataset(1, beta, 10 + i))[0] for i, beta in enumerate([0, 5, 10])])
print(f"training on {len(train)} pairs with {train.dim} features each")
model = ffnn_train(train.values, train.labels, TrainingSpec(epochs=150), seed=0)
print("final training loss", round(model.meta["final_loss"], 4))

test = dataset(2, 7.5, 99)
prob, _ = ffnn_predict(model, standard_scale(test)[0].values)
P = np.zeros((S, S))
P[test.pairs[:, 0], test.pairs[:, 1]] = prob
P = (P + P.T) / 2  # undirected graph: average both orientations
truth = np.zeros((S, S), dtype=int)
truth[test.pairs[:, 0], test.pairs[:, 1]] = test.labels
print("accuracy on an unseen graph:", accuracy(GraphEstimate((P > 0.5).astype(int)), truth, directed=False))
