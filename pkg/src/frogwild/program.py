"""The FrogWild vertex program: identityless random walkers ("frogs") that
die with probability ``p_T`` at every apply and otherwise hop along the
out-edges exposed by the synchronized replicas of their vertex.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .cluster import Engine, SyncPolicy
from .rng import keyed_stream
from .validation import check_positive_int, check_probability

SCATTER_VARIANTS = ("ceil", "binomial")


@dataclass(frozen=True)
class FrogRun:
    """Configuration of one FrogWild execution.

    ``t_max`` is the cutoff: a frog performs at most ``t_max`` steps and all
    frogs still alive after superstep ``t_max`` halt where they stand.
    """

    n_frogs: int = 100_000
    p_T: float = 0.15
    t_max: int = 20
    p_s: float = 1.0
    scatter: str = "ceil"

    def __post_init__(self):
        check_positive_int(self.n_frogs, "n_frogs")
        check_probability(self.p_T, "p_T", allow_zero=False)
        check_positive_int(self.t_max, "t_max")
        check_probability(self.p_s, "p_s")
        if self.scatter not in SCATTER_VARIANTS:
            raise ValueError(f"scatter must be one of {SCATTER_VARIANTS}, got {self.scatter!r}")

    def as_dict(self):
        return asdict(self)


def scatter_ceil(k, machines, rng):
    """Spread ``k`` frogs over ``machines`` synchronized machines.

    Recipients, in a uniformly random order, receive ``ceil(k / machines)``
    frogs each until fewer remain; the last recipient gets the remainder, so
    the total is exactly ``k``. With ``machines == 0`` nothing is sent.
    """
    k = check_positive_int(k, "k", allow_zero=True)
    machines = check_positive_int(machines, "machines", allow_zero=True)
    if machines == 0:
        return np.zeros(0, dtype=np.int64)
    out = np.zeros(machines, dtype=np.int64)
    if k == 0:
        return out
    chunk = -(-k // machines)
    sizes = np.clip(k - chunk * np.arange(machines), 0, chunk)
    out[rng.permutation(machines)] = sizes
    return out


def binomial_probability(d_out, p_s):
    """Per-edge success probability ``1 / (d_out p_s)``, clamped to 1.

    Returns ``(probability, clamped)``.
    """
    raw = math.inf if p_s == 0 else 1.0 / (d_out * p_s)
    return min(raw, 1.0), raw > 1.0


def scatter_binomial(k, d_out, p_s, rng, n_synchronized=None):
    """Independent ``Bin(k, 1/(d_out p_s))`` draws, one per synchronized
    out-edge (all ``d_out`` edges by default)."""
    k = check_positive_int(k, "k", allow_zero=True)
    d_out = check_positive_int(d_out, "d_out")
    p_s = check_probability(p_s, "p_s")
    n_sync = d_out if n_synchronized is None else n_synchronized
    prob, _ = binomial_probability(d_out, p_s)
    return rng.binomial(k, prob, size=n_sync).astype(np.int64)


def uniform_split(k, d, rng):
    """Drop ``k`` frogs uniformly at random on ``d`` edges."""
    if k == 0:
        return np.zeros(d, dtype=np.int64)
    if k < 4 * d:
        return np.bincount(rng.integers(0, d, size=k), minlength=d)
    return rng.multinomial(k, np.full(d, 1.0 / d))


class FrogWildProgram:
    """Per-vertex state and callbacks for the engine.

    ``counters`` holds stopped frogs, ``held`` holds survivors that found no
    synchronized machine with an out-edge and wait for the next superstep
    (waiting does not cost them another death coin).
    """

    def __init__(self, g, run):
        self.g = g
        self.run = run
        self.counters = np.zeros(g.n, dtype=np.int64)
        self.held = np.zeros(g.n, dtype=np.int64)
        self.flags = {"held": 0, "binomial_clamped": 0}

    def apply(self, machine, vertices, incoming, rng):
        deaths = rng.binomial(incoming, self.run.p_T)
        self.counters[vertices] += deaths
        survivors = incoming - deaths + self.held[vertices]
        self.held[vertices] = 0
        return survivors

    def allocate(self, vertex, amount, machines, rng):
        if machines.size == 0:
            self.held[vertex] += amount
            self.flags["held"] += amount
            return np.zeros(0, dtype=np.int64)
        if self.run.scatter == "ceil":
            return scatter_ceil(amount, machines.size, rng)
        # binomial: every synchronized machine sees all K frogs and draws per edge
        _, clamped = binomial_probability(int(self.g.out_degree[vertex]), self.run.p_s)
        if clamped:
            self.flags["binomial_clamped"] += 1
        return np.full(machines.size, amount, dtype=np.int64)

    def split(self, vertex, amount, local_dst, rng):
        if self.run.scatter == "ceil":
            return uniform_split(amount, local_dst.size, rng)
        return scatter_binomial(amount, int(self.g.out_degree[vertex]), self.run.p_s, rng,
                                n_synchronized=local_dst.size)

    def halt(self, arrivals):
        self.counters += arrivals + self.held
        self.held[:] = 0

    def in_flight(self, inbox):
        return int(self.counters.sum() + self.held.sum() + inbox.sum())


@dataclass
class FrogWildResult:
    counters: np.ndarray
    ledger: object
    partition: object
    run: FrogRun
    seed: int
    # total frogs (stopped + held + in transit) at each barrier, births first
    population: list = field(default_factory=list)
    history: list = field(default_factory=list, repr=False)

    @property
    def n_counted(self):
        return int(self.counters.sum())


def run_frogwild(g, partition, run, seed=0, *, n_threads=1, sync_bytes=16, frog_bytes=24):
    """Execute FrogWild on the simulated engine.

    Frogs are born on independent uniform vertices, then ``run.t_max``
    supersteps are executed; frogs arriving after the last superstep halt
    where they land. With the ``ceil`` scatter the population is conserved
    exactly at every barrier; the ``binomial`` scatter conserves it only in
    expectation.
    """
    if not isinstance(run, FrogRun):
        raise TypeError("run must be a FrogRun")
    seed = check_positive_int(seed, "seed", allow_zero=True)
    policy = SyncPolicy(run.p_s, seed)
    engine = Engine(g, partition, policy, program_seed=seed, n_threads=n_threads,
                    sync_bytes=sync_bytes, frog_bytes=frog_bytes)
    program = FrogWildProgram(g, run)
    births = keyed_stream(seed, "birth").integers(0, g.n, size=run.n_frogs)
    engine.inbox = np.bincount(births, minlength=g.n).astype(np.int64)
    population = [program.in_flight(engine.inbox)]
    for _ in range(run.t_max):
        engine.run_superstep(program)
        population.append(program.in_flight(engine.inbox))
        if run.scatter == "ceil" and population[-1] != run.n_frogs:
            raise AssertionError(
                f"frog conservation violated at superstep {engine.superstep}: "
                f"{population[-1]} != {run.n_frogs}"
            )
    program.halt(engine.inbox)
    engine.inbox = np.zeros(g.n, dtype=np.int64)
    population.append(program.in_flight(engine.inbox))
    engine.ledger.flags.update({k: v for k, v in program.flags.items() if v})
    return FrogWildResult(program.counters, engine.ledger, partition, run, seed,
                          population, engine.history)


def write_counters(path, counters, manifest=None):
    with open(path, "w") as fh:
        if manifest is not None:
            fh.write(f"# manifest={manifest}\n")
        fh.write("vertex,c\n")
        for v, c in enumerate(np.asarray(counters).tolist()):
            fh.write(f"{v},{c}\n")


def read_counters(path):
    out = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("vertex"):
                continue
            out.append(int(line.strip().split(",")[1]))
    return np.asarray(out, dtype=np.int64)
