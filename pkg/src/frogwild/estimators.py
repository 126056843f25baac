"""scikit-learn style front ends.

Both estimators take a graph as ``X`` (a :class:`~frogwild.graph.DirectedGraph`
or an ``(n_edges, 2)`` integer edge array) and expose the fitted ranking as
``scores_``.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import exact
from .cluster import STRATEGIES, partition_graph
from .metrics import estimator, mass_captured
from .program import SCATTER_VARIANTS, FrogRun, run_frogwild
from .validation import check_graph, check_positive_int, check_probability


class _RankerMixin:
    def top_k(self, k):
        check_is_fitted(self, "scores_")
        return exact.top_k(self.scores_, k)

    def score(self, X, y):
        """Normalized captured mass of the fitted ranking against the
        reference ranking ``y`` at ``self.k``."""
        check_is_fitted(self, "scores_")
        y = np.asarray(y, dtype=np.float64)
        if y.shape != self.scores_.shape:
            raise ValueError("reference ranking does not match the fitted graph")
        return mass_captured(self.scores_, y, self.k) / mass_captured(y, y, self.k)


class FrogWild(_RankerMixin, BaseEstimator):
    """Approximate top-k PageRank with partially synchronized random walks.

    Parameters
    ----------
    n_frogs : int
        Number of walkers released at uniformly random vertices.
    p_T : float
        Per-step death (teleport) probability.
    t_max : int
        Maximum number of steps; survivors halt after the last superstep.
    p_s : float
        Probability that a mirror is synchronized in a superstep.
    machines : int
        Number of simulated machines.
    partition : {"random-edge", "greedy-vertex-cut"}
    scatter : {"ceil", "binomial"}
    k : int
        Cut-off used by :meth:`score`.
    random_state : int
    n_threads : int
        Worker threads for per-machine work; does not change results.

    Attributes
    ----------
    scores_ : ndarray of shape (n_vertices,)
    counters_ : ndarray of shape (n_vertices,)
    ledger_ : TrafficLedger
    partition_ : Partition
    population_ : list of int
    """

    def __init__(self, n_frogs=100_000, p_T=0.15, t_max=20, p_s=1.0, machines=8,
                 partition="random-edge", scatter="ceil", k=10, random_state=0, n_threads=1):
        self.n_frogs = n_frogs
        self.p_T = p_T
        self.t_max = t_max
        self.p_s = p_s
        self.machines = machines
        self.partition = partition
        self.scatter = scatter
        self.k = k
        self.random_state = random_state
        self.n_threads = n_threads

    def fit(self, X, y=None):
        g = check_graph(X)
        if self.partition not in STRATEGIES:
            raise ValueError(f"partition must be one of {STRATEGIES}")
        if self.scatter not in SCATTER_VARIANTS:
            raise ValueError(f"scatter must be one of {SCATTER_VARIANTS}")
        seed = check_positive_int(self.random_state, "random_state", allow_zero=True)
        run = FrogRun(self.n_frogs, self.p_T, self.t_max, self.p_s, self.scatter)
        part = partition_graph(g, self.machines, self.partition, seed)
        result = run_frogwild(g, part, run, seed, n_threads=self.n_threads)
        self.graph_ = g
        self.partition_ = part
        self.counters_ = result.counters
        self.ledger_ = result.ledger
        self.population_ = result.population
        self.n_counted_ = result.n_counted
        self.scores_ = estimator(result.counters, result.n_counted)
        return self


class PowerIterationPageRank(_RankerMixin, BaseEstimator):
    """PageRank by power iteration on the teleporting chain.

    With ``strict=False`` an iteration cap below convergence is accepted and
    the capped iterate is kept, which is how the reduced-iteration baseline
    is produced.
    """

    def __init__(self, p_T=0.15, tol=1e-10, max_iter=1000, strict=True, k=10):
        self.p_T = p_T
        self.tol = tol
        self.max_iter = max_iter
        self.strict = strict
        self.k = k

    def fit(self, X, y=None):
        g = check_graph(X)
        check_probability(self.p_T, "p_T", allow_zero=False)
        result = exact.power_iteration(g, self.p_T, self.tol, self.max_iter)
        if self.strict and not result.converged:
            raise exact.ConvergenceError(result.iterations, result.residual)
        self.graph_ = g
        self.scores_ = result.scores
        self.n_iter_ = result.iterations
        self.residual_ = result.residual
        self.converged_ = result.converged
        return self
