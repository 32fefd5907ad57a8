"""Scikit-learn estimator facade over the coloring engine.

Partitioning vertices into r balanced independent sets is a clustering of
the graph, so the wrapper follows the clusterer protocol: fit on a graph
(or an adjacency matrix) and read the class of vertex i from labels_[i].
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .errors import InputError
from .graph import Graph, PLANAR, SURFACES
from .solver import SolverConfig, SolverStats, equitable_color, hs_equitable


def _as_graph(X) -> Graph:
    if isinstance(X, Graph):
        return X
    arr = np.asarray(X)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"expected a square adjacency matrix, got shape {arr.shape}")
    if not np.array_equal(arr, arr.T):
        raise InputError("adjacency matrix must be symmetric")
    g = Graph(arr.shape[0])
    for u, v in zip(*np.nonzero(np.triu(arr, k=1))):
        g.add_edge(int(u), int(v))
    return g


class EquitableColorer(ClusterMixin, BaseEstimator):
    """Balanced proper-coloring clusterer.

    Parameters
    ----------
    r : number of classes.
    surface : "planar" or "nonneg-euler"; picks the degree/edge regime the
        constructive engine accepts.
    allow_degree_route : when True, inputs outside the surface regime are
        still solved whenever r >= max_degree + 1.
    audit : collect per-rule diagnostics into stats_.

    Attributes
    ----------
    labels_ : class index per vertex; adjacent vertices always differ and
        class sizes differ by at most one.
    stats_ : SolverStats for the fit.
    """

    def __init__(self, r=8, surface=PLANAR, allow_degree_route=True, audit=False):
        self.r = r
        self.surface = surface
        self.allow_degree_route = allow_degree_route
        self.audit = audit

    def fit(self, X, y=None):
        if self.surface not in SURFACES:
            raise InputError(f"unknown surface {self.surface!r}")
        g = _as_graph(X)
        stats = SolverStats()
        cfg = SolverConfig(r=self.r, surface=self.surface, audit=self.audit)
        try:
            col = equitable_color(g, cfg, stats)
        except InputError:
            if not (self.allow_degree_route and self.r >= g.max_degree() + 1):
                raise
            col = hs_equitable(g, self.r, stats)
        self.labels_ = np.asarray(col.class_of, dtype=int)
        self.stats_ = stats
        self.n_features_in_ = g.n
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X, y).labels_
