"""scikit-learn style wrapper around the joint community fit."""

from __future__ import annotations

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .fit import MODES
from .graph import Graph
from .graph_fit import fit_graph

__all__ = ["HyperbolicCommunityModel", "check_graph", "check_node_sets", "PARAM_COLUMNS"]

PARAM_COLUMNS = ("n_c", "gamma", "h", "p", "theta", "x", "sigma", "d_in", "log_likelihood")


def check_graph(X):
    """Accept a Graph, a scipy sparse matrix or a dense square 0/1 array."""
    if isinstance(X, Graph):
        return X
    if sparse.issparse(X):
        A = sparse.coo_array(X)
    else:
        A = np.asarray(X)
        if A.ndim != 2:
            raise ValueError(f"adjacency must be 2-D, got {A.ndim}-D")
        A = sparse.coo_array(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {A.shape}")
    A.sum_duplicates()
    A.eliminate_zeros()
    if (A != A.T).nnz:
        raise ValueError("adjacency must be symmetric for an undirected graph")
    return Graph.from_edges(A.row, A.col, n=A.shape[0])


def check_node_sets(node_sets, n):
    """Validate community node sets over dense ids ``[0, n)``."""
    if node_sets is None:
        raise ValueError("community node sets are required")
    out = []
    for k, nodes in enumerate(node_sets):
        nodes = np.asarray(nodes)
        if nodes.dtype.kind not in "iu":
            raise ValueError(f"community {k}: node ids must be integers")
        nodes = nodes.astype(np.int64).ravel()
        if nodes.size < 2:
            raise ValueError(f"community {k}: at least 2 nodes needed, got {nodes.size}")
        if nodes.min() < 0 or nodes.max() >= n:
            raise ValueError(f"community {k}: node id outside [0, {n})")
        if np.unique(nodes).size != nodes.size:
            raise ValueError(f"community {k}: duplicate node ids")
        out.append(nodes)
    if not out:
        raise ValueError("at least one community is required")
    return out


class HyperbolicCommunityModel(BaseEstimator):
    """Fit hyperbolic community shapes to given node sets of a graph.

    ``fit(X, y)`` takes the graph as ``X`` and the community node sets as
    ``y``.  ``transform`` returns one row of shape parameters per community
    (columns in ``PARAM_COLUMNS``), in input order.

    Attributes
    ----------
    model_ : GraphModel
    communities_ : list of FittedCommunity in input order
    d_out_ : global outside density
    log_likelihood_ : total log-likelihood of the graph
    """

    def __init__(self, mode="full", max_rounds=50, epsilon=1e-9, n_jobs=None):
        self.mode = mode
        self.max_rounds = max_rounds
        self.epsilon = epsilon
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.max_rounds < 0:
            raise ValueError("max_rounds must be non-negative")
        graph = check_graph(X)
        node_sets = check_node_sets(y, graph.n)
        self.model_ = fit_graph(graph, node_sets, mode=self.mode, max_rounds=self.max_rounds,
                                epsilon=self.epsilon, n_jobs=self.n_jobs)
        self.communities_ = sorted(self.model_.communities, key=lambda f: f.index)
        self.d_out_ = self.model_.d_out
        self.log_likelihood_ = self.model_.log_likelihood
        self.n_features_in_ = len(PARAM_COLUMNS)
        return self

    def transform(self, X=None):
        """Parameter table of the fitted communities; ``X`` is ignored."""
        check_is_fitted(self, "model_")
        rows = []
        for f in self.communities_:
            mp = f.params
            mix = mp.mixture
            p = np.nan if mp.degenerate else float(mp.p)
            theta = np.nan if mp.degenerate else float(mp.theta)
            rows.append([f.n_c, float(mp.gamma), float(mp.h), p, theta, float(mix.x),
                         float(mix.sigma), f.counts.d_in, f.log_likelihood])
        return np.array(rows, dtype=float)

    def score(self, X=None, y=None):
        check_is_fitted(self, "model_")
        return self.log_likelihood_
