"""The built-in small-graph suite used by the verification harness.

Suite graphs are generated deterministically and cached as edge lists. The
cache location defaults to ``~/.cache/frogwild/suite`` and can be moved with
the ``FROGWILD_SUITE_DIR`` environment variable.
"""

import os
from pathlib import Path

import numpy as np

from .graph import DirectedGraph, load_edge_list, write_edge_list

SUITE = ("two-cycle", "self-loop", "five-vertex", "complete-20", "pa-200")
PA_SEED = 20150401


def suite_dir():
    env = os.environ.get("FROGWILD_SUITE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "frogwild" / "suite"


def two_cycle():
    return DirectedGraph.from_edges([0, 1], [1, 0])


def self_loop():
    return DirectedGraph.from_edges([0], [0])


def five_vertex():
    return DirectedGraph.from_edges([0, 1, 2, 3, 4], [1, 2, 0, 0, 0])


def complete(n=20):
    src, dst = np.divmod(np.arange(n * n), n)
    return DirectedGraph.from_edges(src, dst)


def preferential_attachment(n=200, out_edges=3, seed=PA_SEED):
    """Directed preferential-attachment graph with no dangling vertices.

    Vertices ``0..out_edges`` form a directed cycle. Every later vertex links
    to ``out_edges`` distinct earlier vertices chosen with probability
    proportional to ``in_degree + 1`` and receives one link from a uniformly
    chosen earlier vertex, so the seed cycle does not absorb the walk.
    """
    rng = np.random.default_rng(seed)
    m0 = out_edges + 1
    src = list(range(m0))
    dst = [(v + 1) % m0 for v in range(m0)]
    weight = np.zeros(n)
    weight[:m0] = 2.0
    for v in range(m0, n):
        p = weight[:v] / weight[:v].sum()
        targets = rng.choice(v, size=out_edges, replace=False, p=p)
        src.extend([v] * out_edges)
        dst.extend(targets.tolist())
        weight[targets] += 1.0
        src.append(int(rng.integers(0, v)))
        dst.append(v)
        weight[v] = 2.0
    return DirectedGraph.from_edges(src, dst, n)


_BUILDERS = {
    "two-cycle": two_cycle,
    "self-loop": self_loop,
    "five-vertex": five_vertex,
    "complete-20": complete,
    "pa-200": preferential_attachment,
}


def suite_graph(name, *, cache=True):
    """Return the named suite graph, reading it from the cache when present."""
    if name not in _BUILDERS:
        raise KeyError(f"unknown suite graph {name!r}; choose from {SUITE}")
    if not cache:
        return _BUILDERS[name]()
    path = suite_dir() / f"{name}.txt"
    if path.exists():
        return load_edge_list(path, "plain-pairs")
    g = _BUILDERS[name]()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        write_edge_list(g, path)
    except OSError:
        pass
    return g


def iter_suite(names=SUITE):
    for name in names:
        yield name, suite_graph(name)
