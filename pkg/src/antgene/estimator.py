"""Scikit-learn style front end, so the solver composes with the wider
ecosystem (get_params/set_params, clone, grid search over hyperparameters).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array

from .colony import AcoParams
from .genetic import GaParams
from .hybrid import HybridParams, solve
from .instance import Instance


def _instance_from_X(X, metric):
    if metric == "euclidean":
        X = check_array(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != 2:
            raise ValueError(f"euclidean input must be an (n, 2) coordinate array, got {X.shape}")
        diff = X[:, None, :] - X[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=-1))
        return Instance(X.shape[0], dist, X)
    if metric == "precomputed":
        X = check_array(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] != X.shape[1]:
            raise ValueError(f"precomputed input must be a square distance matrix, got {X.shape}")
        return Instance(X.shape[0], X)
    raise ValueError(f"metric must be 'euclidean' or 'precomputed', got {metric!r}")


class AcoGaSolver(BaseEstimator):
    """Hybrid ant-colony + genetic tour solver with a fit() interface.

    Parameters mirror the library tunables: trail exponent `alpha`,
    visibility exponent `beta`, trail persistence `delta`, ant count
    `n_ants`, deposit constant `q`, the genetic-stage rates, iteration and
    stagnation budgets, 2-opt toggle, master `seed`, and worker count
    `threads` (0 = all cores). `pop_size=None` keeps one chromosome per ant.

    After `fit(X)` the solution is available as:

    - ``tour_``: permutation of row indices (closed tour)
    - ``tour_length_``: its length
    - ``trace_``: per-iteration convergence trace
    - ``n_iter_``: iterations actually run

    `X` is an (n, 2) coordinate array for ``metric='euclidean'`` or a full
    symmetric distance matrix for ``metric='precomputed'``. Identical
    parameters give identical results, independent of `threads`.
    """

    def __init__(
        self,
        alpha=1.0,
        beta=2.0,
        delta=0.9,
        n_ants=20,
        q=1.0,
        pop_size=None,
        crossover_rate=0.9,
        mutation_rate=0.1,
        elitism=1,
        use_ga=True,
        max_iterations=500,
        stagnation_limit=100,
        local_search=True,
        seed=0,
        threads=1,
        metric="euclidean",
    ):
        self.alpha = alpha
        self.beta = beta
        self.delta = delta
        self.n_ants = n_ants
        self.q = q
        self.pop_size = pop_size
        self.crossover_rate = crossover_rate
        self.mutation_rate = mutation_rate
        self.elitism = elitism
        self.use_ga = use_ga
        self.max_iterations = max_iterations
        self.stagnation_limit = stagnation_limit
        self.local_search = local_search
        self.seed = seed
        self.threads = threads
        self.metric = metric

    def _hybrid_params(self):
        aco = AcoParams(
            alpha=self.alpha, beta=self.beta, delta=self.delta, m=self.n_ants, q=self.q
        )
        ga = GaParams(
            pop_size=self.pop_size if self.pop_size is not None else max(2, self.n_ants),
            crossover_rate=self.crossover_rate,
            mutation_rate=self.mutation_rate,
            elitism=self.elitism,
        )
        return HybridParams(
            aco=aco,
            ga=ga,
            ga_enabled=self.use_ga,
            max_iterations=self.max_iterations,
            stagnation_limit=self.stagnation_limit,
            local_search=self.local_search,
            seed=self.seed,
            threads=self.threads,
        )

    def fit(self, X, y=None):
        """Solve the instance described by X; returns self."""
        inst = _instance_from_X(X, self.metric)
        best, trace = solve(inst, self._hybrid_params())
        self.instance_ = inst
        self.tour_ = best.order
        self.tour_length_ = best.length
        self.trace_ = trace
        self.n_iter_ = len(trace.records)
        return self
