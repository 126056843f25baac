"""Input validation helpers shared by the estimators and the functional API."""

import numbers

import numpy as np


def check_probability(value, name, *, allow_zero=True, allow_one=True):
    """Return ``value`` as a float after checking it lies in [0, 1]."""
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    lo_ok = value > 0 or (allow_zero and value == 0)
    hi_ok = value < 1 or (allow_one and value == 1)
    if not (lo_ok and hi_ok):
        lo = "[" if allow_zero else "("
        hi = "]" if allow_one else ")"
        raise ValueError(f"{name} must lie in {lo}0, 1{hi}, got {value}")
    return value


def check_positive_int(value, name, *, allow_zero=False):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else ">= 1"
        raise ValueError(f"{name} must be {bound}, got {value}")
    return value


def check_vertex(g, j):
    if isinstance(j, bool) or not isinstance(j, numbers.Integral):
        raise TypeError(f"vertex id must be an integer, got {type(j).__name__}")
    if not 0 <= j < g.n:
        raise IndexError(f"vertex {j} out of range for graph with {g.n} vertices")
    return int(j)


def check_distribution(x, n=None, *, name="x", atol=1e-9):
    """Validate that ``x`` is a point of the probability simplex.

    Returns a float64 copy. ``n`` optionally pins the length.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {x.shape}")
    if n is not None and x.shape[0] != n:
        raise ValueError(f"{name} has length {x.shape[0]}, expected {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.any(x < 0):
        raise ValueError(f"{name} has negative entries")
    total = x.sum()
    if abs(total - 1.0) > atol:
        raise ValueError(f"{name} sums to {total!r}, not 1")
    return x.copy()


def check_k(k, n):
    k = check_positive_int(k, "k")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of vertices {n}")
    return k


def check_graph(X):
    """Coerce ``X`` into a :class:`~frogwild.graph.DirectedGraph`.

    Accepts a graph instance or an integer array of shape (n_edges, 2)
    holding ``src, dst`` pairs.
    """
    from .graph import DirectedGraph

    if isinstance(X, DirectedGraph):
        return X
    arr = np.asarray(X)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(
            f"expected a DirectedGraph or an (n_edges, 2) edge array, got shape {arr.shape}"
        )
    if arr.shape[0] == 0:
        raise ValueError("edge array is empty")
    if not np.issubdtype(arr.dtype, np.integer):
        raise TypeError("edge array must hold integers")
    return DirectedGraph.from_edges(arr[:, 0], arr[:, 1])
