"""Single-process simulation of a vertex-cut graph engine.

Edges are placed on machines; every vertex has a master replica and zero or
more mirrors. Each superstep gathers incoming messages at masters, runs the
program's apply there, synchronizes each mirror of an active vertex with
probability ``p_s``, and scatters only on the master machine and on the
mirrors that were synchronized. The :class:`TrafficLedger` counts the
master-to-mirror synchronization messages and the combined cross-machine
messages produced by scatter.
"""

import csv
import logging
import warnings
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .rng import keyed_stream
from .validation import check_positive_int, check_probability

logger = logging.getLogger(__name__)

STRATEGIES = ("random-edge", "greedy-vertex-cut")
SYNC_BYTES = 16
FROG_BYTES = 24


@dataclass(frozen=True, eq=False)
class Partition:
    """Vertex-cut placement.

    ``edge_owner[e]`` is the machine of the ``e``-th edge in the graph's CSR
    order. ``replicas[v, m]`` is True when machine ``m`` holds a copy of
    ``v``; exactly one of those copies, ``master[v]``, is the master.
    """

    machines: int
    edge_owner: np.ndarray
    master: np.ndarray
    replicas: np.ndarray
    strategy: str = "explicit"
    seed: int = 0

    @classmethod
    def from_assignment(cls, g, edge_owner, machines, *, seed=0, master=None, strategy="explicit"):
        """Derive replicas and masters from a per-edge machine assignment.

        Unless given, the master is drawn uniformly among the machines that
        hold the vertex; a vertex without edges gets a uniform machine.
        """
        machines = check_positive_int(machines, "machines")
        edge_owner = np.asarray(edge_owner, dtype=np.int64)
        if edge_owner.shape != (g.n_edges,):
            raise ValueError(f"edge_owner must have length {g.n_edges}")
        if edge_owner.size and (edge_owner.min() < 0 or edge_owner.max() >= machines):
            raise ValueError("edge_owner holds a machine id out of range")
        src, dst = g.edges()
        replicas = np.zeros((g.n, machines), dtype=bool)
        replicas[src, edge_owner] = True
        replicas[dst, edge_owner] = True
        if master is None:
            rng = keyed_stream(seed, "master")
            u = rng.random(g.n)
            n_rep = replicas.sum(axis=1)
            bare = n_rep == 0
            pick = np.minimum((u * np.where(bare, machines, n_rep)).astype(np.int64),
                              np.where(bare, machines, n_rep) - 1)
            ranks = np.cumsum(replicas, axis=1) - 1
            master = np.argmax(replicas & (ranks == pick[:, None]), axis=1)
            master[bare] = pick[bare]
        master = np.asarray(master, dtype=np.int64)
        if master.shape != (g.n,):
            raise ValueError(f"master must have length {g.n}")
        replicas[np.arange(g.n), master] = True
        for arr in (edge_owner, master, replicas):
            arr.setflags(write=False)
        return cls(machines, edge_owner, master, replicas, strategy, seed)

    @property
    def mirror_counts(self):
        return self.replicas.sum(axis=1) - 1

    def mirrors(self, v):
        row = self.replicas[v].copy()
        row[self.master[v]] = False
        return set(np.flatnonzero(row).tolist())

    @property
    def replication_factor(self):
        return float(self.replicas.sum()) / self.replicas.shape[0]

    def cut_edges(self, g):
        """Edges whose owner is not the master machine of their destination,
        i.e. edges whose per-edge message must cross the network."""
        _, dst = g.edges()
        return int(np.count_nonzero(self.edge_owner != self.master[dst]))


def check_partition(g, part):
    """Exhaustively verify the partition invariants; raise AssertionError."""
    src, dst = g.edges()
    owner = part.edge_owner
    assert part.replicas[src, owner].all(), "edge owner lacks a replica of the source"
    assert part.replicas[dst, owner].all(), "edge owner lacks a replica of the destination"
    assert part.replicas[np.arange(g.n), part.master].all(), "master is not a replica"
    rf = part.replication_factor
    assert rf >= 1.0
    assert (rf == 1.0) == (part.mirror_counts.sum() == 0)


def partition_graph(g, machines, strategy="random-edge", seed=0):
    """Place every edge on one of ``machines`` machines.

    ``random-edge`` hashes each edge to a uniform machine.
    ``greedy-vertex-cut`` streams edges in a random order and places each on
    the machine maximising (replicas of the endpoints already there) plus a
    load-balance term in [0, 1); ties go to the lowest machine id.
    """
    machines = check_positive_int(machines, "machines")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if machines > g.n_edges:
        warnings.warn(
            f"{machines} machines for {g.n_edges} edges: some machines stay empty",
            stacklevel=2,
        )
    rng = keyed_stream(seed, "partition", STRATEGIES.index(strategy))
    if strategy == "random-edge":
        owner = rng.integers(0, machines, size=g.n_edges)
    else:
        owner = _greedy_owner(g, machines, rng)
    part = Partition.from_assignment(g, owner, machines, seed=seed, strategy=strategy)
    logger.debug("partition %s M=%d RF=%.3f", strategy, machines, part.replication_factor)
    return part


def _greedy_owner(g, machines, rng):
    src, dst = g.edges()
    held = [0] * g.n  # bitmask of machines holding each vertex
    load = [0] * machines
    owner = np.empty(g.n_edges, dtype=np.int64)
    bits = [1 << m for m in range(machines)]
    for e in rng.permutation(g.n_edges).tolist():
        u, v = int(src[e]), int(dst[e])
        hu, hv = held[u], held[v]
        hi, lo = max(load), min(load)
        span = 1.0 + hi - lo
        best, best_score = 0, -1.0
        for m in range(machines):
            b = bits[m]
            score = ((hu & b) != 0) + ((hv & b) != 0) + (hi - load[m]) / span
            if score > best_score:
                best, best_score = m, score
        owner[e] = best
        load[best] += 1
        held[u] |= bits[best]
        held[v] |= bits[best]
    return owner


def sync_messages_expectation(partition, p_s, active):
    """Expected number of sync messages when ``active`` vertices flip one
    ``p_s`` coin per mirror."""
    p_s = check_probability(p_s, "p_s")
    active = np.asarray(active, dtype=np.int64)
    return p_s * float(partition.mirror_counts[active].sum())


@dataclass
class TrafficLedger:
    """Per-superstep message counts.

    ``frog_messages`` holds the program's combined cross-machine scatter
    messages (for the power-iteration baseline: one per cut edge).
    """

    sync_bytes: int = SYNC_BYTES
    frog_bytes: int = FROG_BYTES
    sync_messages: list = field(default_factory=list)
    frog_messages: list = field(default_factory=list)
    flags: Counter = field(default_factory=Counter)

    def record(self, sync, frog):
        if sync < 0 or frog < 0:
            raise ValueError("message counts must be non-negative")
        self.sync_messages.append(int(sync))
        self.frog_messages.append(int(frog))

    @property
    def supersteps(self):
        return len(self.sync_messages)

    @property
    def bytes_sent(self):
        return [s * self.sync_bytes + f * self.frog_bytes
                for s, f in zip(self.sync_messages, self.frog_messages)]

    @property
    def total_sync(self):
        return sum(self.sync_messages)

    @property
    def total_frog(self):
        return sum(self.frog_messages)

    @property
    def total_messages(self):
        return self.total_sync + self.total_frog

    @property
    def total_bytes(self):
        return sum(self.bytes_sent)

    def rows(self):
        return [
            (i + 1, s, f, b)
            for i, (s, f, b) in enumerate(zip(self.sync_messages, self.frog_messages, self.bytes_sent))
        ]

    def to_csv(self, path, manifest=None):
        with open(path, "w", newline="") as fh:
            if manifest is not None:
                fh.write(f"# manifest={manifest}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["superstep", "sync_messages", "frog_messages", "bytes"])
            w.writerows(self.rows())


@dataclass(frozen=True)
class SyncPolicy:
    """Each mirror of an active vertex is synchronized independently with
    probability ``p_s`` in every superstep."""

    p_s: float = 1.0
    seed: int = 0

    def __post_init__(self):
        check_probability(self.p_s, "p_s")


@dataclass
class SuperstepStats:
    superstep: int
    active: np.ndarray
    sync_messages: int
    frog_messages: int
    sync_expectation: float


class Engine:
    """Bulk-synchronous engine over a vertex-cut partition.

    The engine owns the message inbox, the superstep counter and the ledger;
    the vertex program owns its per-vertex state. A program implements

    ``apply(machine, vertices, incoming, rng) -> amounts``
        runs at the master machine; returns how much each vertex scatters.
    ``allocate(vertex, amount, machines, rng) -> per-machine amounts``
        decides how the amount is spread over the synchronized machines that
        hold out-edges of ``vertex``. An all-zero answer means the program
        kept the amount (it must account for it itself).
    ``split(vertex, amount, local_dst, rng) -> per-edge amounts``
        runs on a receiving machine over its local out-edges of ``vertex``.

    Dangling vertices scatter from their master to uniformly random vertices.
    Randomness is keyed by ``(seed, purpose, superstep, machine)`` so results
    do not depend on ``n_threads``.
    """

    def __init__(self, g, partition, policy, *, program_seed=0, n_threads=1,
                 sync_bytes=SYNC_BYTES, frog_bytes=FROG_BYTES):
        if partition.replicas.shape[0] != g.n or partition.edge_owner.size != g.n_edges:
            raise ValueError("partition does not match the graph")
        self.g = g
        self.partition = partition
        self.policy = policy
        self.program_seed = program_seed
        self.n_threads = check_positive_int(n_threads, "n_threads")
        self.ledger = TrafficLedger(sync_bytes, frog_bytes)
        self.history = []
        self.superstep = 0
        self.inbox = np.zeros(g.n, dtype=np.int64)

        M = partition.machines
        src, dst = g.edges()
        key = partition.edge_owner * g.n + src
        order = np.argsort(key, kind="stable")
        self._local_dst = dst[order]
        self.local_count = np.bincount(key, minlength=M * g.n).reshape(M, g.n).T.copy()
        starts = np.zeros(M * g.n, dtype=np.int64)
        np.cumsum(np.bincount(key, minlength=M * g.n)[:-1], out=starts[1:])
        self._local_start = starts.reshape(M, g.n).T.copy()
        self.master_vertices = [np.flatnonzero(partition.master == m) for m in range(M)]
        self._is_dangling = g.out_degree == 0
        self._mirror_mask = partition.replicas.copy()
        self._mirror_mask[np.arange(g.n), partition.master] = False

    def local_out_edges(self, vertex, machine):
        s = self._local_start[vertex, machine]
        return self._local_dst[s : s + self.local_count[vertex, machine]]

    def _map(self, fn, items):
        if self.n_threads == 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(self.n_threads) as pool:
            return list(pool.map(fn, items))

    def run_superstep(self, program):
        """Execute one gather/apply/sync/scatter cycle and update the ledger."""
        g, part, M = self.g, self.partition, self.partition.machines
        self.superstep += 1
        s = self.superstep
        incoming, self.inbox = self.inbox, np.zeros(g.n, dtype=np.int64)

        def apply_on(m):
            verts = self.master_vertices[m]
            rng = keyed_stream(self.program_seed, "apply", s, m)
            out = np.asarray(program.apply(m, verts, incoming[verts], rng))
            if out.shape != verts.shape:
                raise ValueError(f"program returned {out.shape[0]} amounts for {verts.size} vertices")
            if np.any(out < 0):
                raise ValueError("program returned a negative scatter amount")
            return out

        amounts = np.zeros(g.n, dtype=np.int64)
        for m, out in enumerate(self._map(apply_on, range(M))):
            amounts[self.master_vertices[m]] = out
        active = np.flatnonzero(amounts > 0)

        def sync_on(m):
            verts = active[part.master[active] == m]
            rng = keyed_stream(self.policy.seed, "sync", s, m)
            coins = rng.random((verts.size, M)) < self.policy.p_s
            synced = self._mirror_mask[verts] & coins
            return verts, synced

        synced = np.zeros((g.n, M), dtype=bool)
        n_sync = 0
        for verts, mask in self._map(sync_on, range(M)):
            synced[verts] = mask
            n_sync += int(mask.sum())
        synced[active, part.master[active]] = True

        def allocate_on(m):
            verts = active[part.master[active] == m]
            rng = keyed_stream(self.program_seed, "scatter", s, m, 0)
            plan = []
            for v in verts.tolist():
                if self._is_dangling[v]:
                    plan.append((m, v, int(amounts[v]), True))
                    continue
                machines = np.flatnonzero(synced[v] & (self.local_count[v] > 0))
                shares = np.asarray(program.allocate(v, int(amounts[v]), machines, rng))
                if shares.shape != machines.shape:
                    raise ValueError(f"program allocated over {shares.size} machines, expected {machines.size}")
                for r, k in zip(machines.tolist(), shares.tolist()):
                    if k > 0:
                        plan.append((r, v, int(k), False))
            return plan

        per_machine = [[] for _ in range(M)]
        for plan in self._map(allocate_on, range(M)):
            for r, v, k, dangling in plan:
                per_machine[r].append((v, k, dangling))

        def scatter_on(r):
            rng = keyed_stream(self.program_seed, "scatter", s, r, 1)
            dst_parts, cnt_parts = [], []
            for v, k, dangling in sorted(per_machine[r]):
                if dangling:
                    dst, cnt = np.unique(rng.integers(0, g.n, size=k), return_counts=True)
                else:
                    dst = self.local_out_edges(v, r)
                    cnt = np.asarray(program.split(v, k, dst, rng))
                dst_parts.append(dst)
                cnt_parts.append(cnt)
            if not dst_parts:
                return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), 0
            dst = np.concatenate(dst_parts)
            cnt = np.concatenate(cnt_parts).astype(np.int64)
            hit = dst[cnt > 0]
            remote = np.unique(hit[part.master[hit] != r])
            return dst, cnt, int(remote.size)

        n_frog = 0
        for dst, cnt, msgs in self._map(scatter_on, range(M)):
            if dst.size:
                self.inbox += np.bincount(dst, weights=cnt, minlength=g.n).astype(np.int64)
            n_frog += msgs

        self.ledger.record(n_sync, n_frog)
        stats = SuperstepStats(s, active, n_sync, n_frog,
                               sync_messages_expectation(part, self.policy.p_s, active))
        self.history.append(stats)
        return stats


def baseline_ledger(g, partition, iterations, *, sync_bytes=SYNC_BYTES, frog_bytes=FROG_BYTES):
    """Traffic of power iteration on the same engine: every iteration sends
    one message per cut edge and synchronizes every mirror."""
    ledger = TrafficLedger(sync_bytes, frog_bytes)
    sync = int(partition.mirror_counts.sum())
    cut = partition.cut_edges(g)
    for _ in range(iterations):
        ledger.record(sync, cut)
    return ledger
