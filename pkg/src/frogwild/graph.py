"""Directed graphs in compressed sparse row form, edge-list ingestion and
the random-walk transition semantics of the original (non-teleporting) graph.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .validation import check_vertex

logger = logging.getLogger(__name__)

FORMATS = ("plain-pairs", "snap-with-comments")
_MAX_ID = np.iinfo(np.int64).max


class EdgeListError(ValueError):
    """Raised for malformed or unusable edge-list input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """Immutable directed graph on vertices ``0..n-1``.

    Out-edges of ``j`` are ``indices[indptr[j]:indptr[j + 1]]``, sorted
    ascending. ``labels[v]`` is the id ``v`` carried in the source file.
    """

    indptr: np.ndarray
    indices: np.ndarray
    labels: np.ndarray
    duplicates_collapsed: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for arr in (self.indptr, self.indices, self.labels):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, src, dst, n=None, *, labels=None):
        """Build a graph from parallel ``src``/``dst`` arrays.

        With ``n=None`` the ids are densified: the sorted distinct ids map to
        ``0..n-1``. With an explicit ``n`` the ids are used as-is and vertices
        without edges are allowed (they become dangling).
        """
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ValueError("src and dst must have the same length")
        if n is None:
            if src.size == 0:
                raise EdgeListError("graph has no edges")
            uniq, inverse = np.unique(np.concatenate([src, dst]), return_inverse=True)
            n = uniq.size
            src, dst = inverse[: src.size], inverse[src.size :]
            if labels is None:
                labels = uniq
        else:
            if n < 1:
                raise ValueError("graph needs at least one vertex")
            if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
                raise ValueError(f"edge endpoint outside 0..{n - 1}")
            if labels is None:
                labels = np.arange(n, dtype=np.int64)
        # collapse duplicates: A is a 0/1 matrix
        key = src * n + dst
        uniq_key = np.unique(key)
        dups = key.size - uniq_key.size
        src, dst = np.divmod(uniq_key, n)
        counts = np.bincount(src, minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(indptr, dst.astype(np.int64), np.asarray(labels, dtype=np.int64), int(dups))

    @property
    def n(self):
        return self.indptr.size - 1

    @property
    def n_edges(self):
        return self.indices.size

    @property
    def out_degree(self):
        if "out_degree" not in self._cache:
            deg = np.diff(self.indptr)
            deg.setflags(write=False)
            self._cache["out_degree"] = deg
        return self._cache["out_degree"]

    @property
    def in_degree(self):
        if "in_degree" not in self._cache:
            deg = np.bincount(self.indices, minlength=self.n)
            deg.setflags(write=False)
            self._cache["in_degree"] = deg
        return self._cache["in_degree"]

    @property
    def dangling(self):
        """Sorted ids of vertices with zero out-degree."""
        if "dangling" not in self._cache:
            d = np.flatnonzero(self.out_degree == 0)
            d.setflags(write=False)
            self._cache["dangling"] = d
        return self._cache["dangling"]

    def out_edges(self, j):
        j = check_vertex(self, j)
        return self.indices[self.indptr[j] : self.indptr[j + 1]]

    def edges(self):
        """Return ``(src, dst)`` arrays in CSR order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.out_degree)
        return src, self.indices

    def transition_matrix(self):
        """Sparse ``P`` with ``P[i, j] = 1/d_out(j)`` (columns sum to 1,
        except dangling columns, which are all zero)."""
        if "P" not in self._cache:
            src, dst = self.edges()
            w = 1.0 / self.out_degree[src]
            self._cache["P"] = sp.csr_matrix((w, (dst, src)), shape=(self.n, self.n))
        return self._cache["P"]

    def summary(self):
        return {
            "n": self.n,
            "edges": self.n_edges,
            "dangling": int(self.dangling.size),
            "duplicates_collapsed": self.duplicates_collapsed,
        }

    def __repr__(self):
        return f"DirectedGraph(n={self.n}, edges={self.n_edges}, dangling={self.dangling.size})"


def load_edge_list(path, format="snap-with-comments"):
    """Read a whitespace-separated ``src dst`` edge list.

    In ``snap-with-comments`` mode lines starting with ``#`` are skipped; in
    ``plain-pairs`` mode they are malformed. Blank lines are skipped in both.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown edge-list format {format!r}; choose from {FORMATS}")
    skip_comments = format == "snap-with-comments"
    src, dst = [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if skip_comments:
                    continue
                raise EdgeListError("comment line in plain-pairs file", lineno)
            parts = line.split()
            if len(parts) != 2:
                raise EdgeListError(f"expected 2 fields, got {len(parts)}: {line!r}", lineno)
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListError(f"non-integer vertex id in {line!r}", lineno) from None
            if a < 0 or b < 0:
                raise EdgeListError(f"negative vertex id in {line!r}", lineno)
            if a > _MAX_ID or b > _MAX_ID:
                raise EdgeListError(f"vertex id overflows int64 in {line!r}", lineno)
            src.append(a)
            dst.append(b)
    if not src:
        raise EdgeListError(f"{path}: no edges found")
    g = DirectedGraph.from_edges(src, dst)
    logger.info(
        "loaded %s: n=%d edges=%d dangling=%d duplicates_collapsed=%d",
        path, g.n, g.n_edges, g.dangling.size, g.duplicates_collapsed,
    )
    return g


def write_edge_list(g, path, *, original_labels=False):
    src, dst = g.edges()
    if original_labels:
        src, dst = g.labels[src], g.labels[dst]
    with open(path, "w") as fh:
        for a, b in zip(src.tolist(), dst.tolist()):
            fh.write(f"{a} {b}\n")


def step_distribution(g, j):
    """Column ``j`` of the transition matrix, with the dangling repair:
    a dangling vertex moves to a uniformly random vertex."""
    j = check_vertex(g, j)
    out = np.zeros(g.n)
    succ = g.out_edges(j)
    if succ.size == 0:
        out[:] = 1.0 / g.n
    else:
        out[succ] = 1.0 / succ.size
    return out


def sample_step(g, j, rng):
    """Draw one successor of ``j`` according to :func:`step_distribution`."""
    j = check_vertex(g, j)
    return int(advance(g, np.array([j]), rng)[0])


def advance(g, positions, rng):
    """Move every walker in ``positions`` one step under ``P``.

    Vectorised form of :func:`sample_step`; dangling walkers jump uniformly.
    """
    positions = np.asarray(positions, dtype=np.int64)
    deg = g.out_degree[positions]
    u = rng.random(positions.size)
    offsets = np.minimum((u * np.maximum(deg, 1)).astype(np.int64), np.maximum(deg - 1, 0))
    nxt = np.empty_like(positions)
    live = deg > 0
    nxt[live] = g.indices[g.indptr[positions[live]] + offsets[live]]
    n_dead = int((~live).sum())
    if n_dead:
        nxt[~live] = rng.integers(0, g.n, size=n_dead)
    return nxt


def apply_P(g, x):
    """Matrix-free ``P x`` with dangling mass spread uniformly."""
    y = g.transition_matrix() @ x
    if g.dangling.size:
        y += x[g.dangling].sum() / g.n
    return y
