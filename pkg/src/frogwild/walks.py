"""Independent-walker processes and edge-erasure models.

These are the abstractions the accuracy analysis reasons about: walkers
under the teleporting chain for a fixed number of steps, walkers on the
original graph for a truncated geometric number of steps, and single walkers
facing randomly erased out-edges.
"""

from dataclasses import dataclass

import numpy as np

from .graph import advance
from .rng import keyed_stream
from .validation import check_positive_int, check_probability

ERASURE_KINDS = ("independent", "at-least-one")


@dataclass(frozen=True)
class ErasureModel:
    """Per-step random disabling of out-edges.

    ``independent`` keeps every edge with probability ``p_s``;
    ``at-least-one`` does the same and, when a vertex lost all its out-edges,
    re-enables one of them chosen uniformly.
    """

    kind: str = "at-least-one"
    p_s: float = 1.0

    def __post_init__(self):
        if self.kind not in ERASURE_KINDS:
            raise ValueError(f"kind must be one of {ERASURE_KINDS}, got {self.kind!r}")
        check_probability(self.p_s, "p_s")


def sample_enabled(degrees, model, rng):
    """Draw enabled-edge masks for consecutive segments of sizes ``degrees``.

    Returns a flat boolean array of length ``degrees.sum()``.
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    total = int(degrees.sum())
    enabled = rng.random(total) < model.p_s
    if model.kind == "at-least-one" and total:
        starts = np.concatenate([[0], np.cumsum(degrees)[:-1]])
        has_edges = degrees > 0
        counts = np.add.reduceat(enabled.astype(np.int64), starts[has_edges]) if has_edges.any() else np.zeros(0)
        empty = np.flatnonzero(has_edges)[counts == 0]
        if empty.size:
            pick = (rng.random(empty.size) * degrees[empty]).astype(np.int64)
            enabled[starts[empty] + np.minimum(pick, degrees[empty] - 1)] = True
    return enabled


def apply_erasures(g, model, step, seed):
    """Enabled out-edges of every vertex at ``step``, as a mask aligned with
    the graph's CSR edge order."""
    if not isinstance(model, ErasureModel):
        raise TypeError("model must be an ErasureModel")
    rng = keyed_stream(seed, "erasure", step)
    return sample_enabled(g.out_degree, model, rng)


def _uniform_start(g, walkers, rng):
    return rng.integers(0, g.n, size=walkers)


def walk_fixed_step(g, p_T, t, walkers, seed):
    """Final positions of independent walkers making exactly ``t`` steps of
    the teleporting chain from uniform starts."""
    p_T = check_probability(p_T, "p_T")
    t = check_positive_int(t, "t", allow_zero=True)
    walkers = check_positive_int(walkers, "walkers")
    rng = keyed_stream(seed, "walk", 0)
    pos = _uniform_start(g, walkers, rng)
    for _ in range(t):
        teleport = rng.random(walkers) < p_T
        pos = advance(g, pos, rng)
        n_tel = int(teleport.sum())
        pos[teleport] = rng.integers(0, g.n, size=n_tel)
    return pos


def geometric_lifespans(p_T, t, walkers, rng):
    """``min(X, t)`` with ``P(X = k) = p_T (1 - p_T)^k`` for ``k >= 0``."""
    return np.minimum(rng.geometric(p_T, size=walkers) - 1, t)


def walk_truncated_geometric(g, p_T, t, walkers, seed):
    """Final positions of independent walkers making ``min(Geom(p_T), t)``
    steps of the original chain (no teleportation) from uniform starts."""
    p_T = check_probability(p_T, "p_T", allow_zero=False)
    t = check_positive_int(t, "t", allow_zero=True)
    walkers = check_positive_int(walkers, "walkers")
    rng = keyed_stream(seed, "walk", 1)
    pos = _uniform_start(g, walkers, rng)
    life = geometric_lifespans(p_T, t, walkers, rng)
    for step in range(t):
        moving = np.flatnonzero(life > step)
        if moving.size == 0:
            break
        pos[moving] = advance(g, pos[moving], rng)
    return pos


def _erased_step(g, pos, model, rng):
    """Move each walker to a uniformly chosen enabled out-edge, re-drawing
    erasures for walkers that found none enabled."""
    out = pos.copy()
    deg = g.out_degree[pos]
    dangling = deg == 0
    if dangling.any():
        out[dangling] = rng.integers(0, g.n, size=int(dangling.sum()))
    pending = np.flatnonzero(~dangling)
    while pending.size:
        d = deg[pending]
        enabled = sample_enabled(d, model, rng)
        starts = np.concatenate([[0], np.cumsum(d)[:-1]])
        n_en = np.add.reduceat(enabled.astype(np.int64), starts)
        ok = n_en > 0
        # rank r among the enabled edges of each segment
        r = (rng.random(pending.size) * np.maximum(n_en, 1)).astype(np.int64)
        r = np.minimum(r, np.maximum(n_en - 1, 0))
        seg_cum = np.cumsum(enabled) - np.repeat(np.cumsum(n_en) - n_en, d)
        target = enabled & (seg_cum - 1 == np.repeat(r, d))
        hit = np.flatnonzero(target)
        seg_of_hit = np.repeat(np.arange(pending.size), d)[hit]
        offset = hit - starts[seg_of_hit]
        chosen = pending[seg_of_hit]
        out[chosen] = g.indices[g.indptr[pos[chosen]] + offset]
        pending = pending[~ok]
    return out


def walk_with_erasures(g, model, p_T, t, walkers, seed):
    """Independent single-frog runs under an erasure model.

    Each walker starts uniformly, lives ``min(Geom(p_T), t)`` steps and at
    every step picks uniformly among the out-edges left enabled at its
    vertex. Erasures are drawn afresh per walker and per step.
    """
    if not isinstance(model, ErasureModel):
        raise TypeError("model must be an ErasureModel")
    p_T = check_probability(p_T, "p_T", allow_zero=False)
    t = check_positive_int(t, "t", allow_zero=True)
    walkers = check_positive_int(walkers, "walkers")
    if model.kind == "independent" and model.p_s == 0:
        raise ValueError("independent erasures with p_s=0 never enable an edge")
    rng = keyed_stream(seed, "walk", 2)
    pos = _uniform_start(g, walkers, rng)
    life = geometric_lifespans(p_T, t, walkers, rng)
    for step in range(t):
        moving = np.flatnonzero(life > step)
        if moving.size == 0:
            break
        pos[moving] = _erased_step(g, pos[moving], model, rng)
    return pos
