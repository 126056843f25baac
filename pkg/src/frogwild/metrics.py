"""Estimator, top-k accuracy metrics and the error/intersection bounds."""

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

from .exact import top_k
from .graph import advance
from .rng import keyed_stream
from .validation import check_k, check_positive_int, check_probability

REPORT_HEADER = ("k", "mass", "normalized_mass", "exact_id", "epsilon_bound", "bound_ok")


def estimator(counters, n_frogs):
    """Fraction of the ``n_frogs`` frogs that stopped at each vertex."""
    counters = np.asarray(counters)
    if np.any(counters < 0):
        raise ValueError("counters must be non-negative")
    total = int(counters.sum())
    if total != n_frogs:
        raise ValueError(f"counters sum to {total}, expected {n_frogs}")
    return counters / float(n_frogs)


def mass_captured(v, pi, k):
    """True mass ``pi`` of the ``k`` vertices ranked highest by ``v``."""
    pi = np.asarray(pi, dtype=np.float64)
    if np.shape(v) != pi.shape:
        raise ValueError("v and pi must have the same shape")
    # summing in id order makes equal sets give bit-identical mass
    return float(pi[np.sort(top_k(v, k))].sum())


def exact_identification(v, pi, k):
    """Fraction of the top-``k`` of ``v`` that belongs to the top-``k`` of ``pi``."""
    if np.shape(v) != np.shape(pi):
        raise ValueError("v and pi must have the same shape")
    shared = np.intersect1d(top_k(v, k), top_k(pi, k))
    return shared.size / k


def epsilon_bound(p_T, t, k, delta, n_frogs, p_s, p_cap):
    """Right-hand side of the mass-captured error bound.

    A mixing term ``sqrt((1-p_T)^(t+1) / p_T)`` plus a sampling/correlation
    term ``sqrt(k/delta * (1/N + (1 - p_s^2) p_cap))``.
    """
    p_T = check_probability(p_T, "p_T", allow_zero=False)
    p_s = check_probability(p_s, "p_s")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if p_cap < 0:
        raise ValueError("p_cap must be non-negative")
    check_positive_int(t, "t", allow_zero=True)
    check_positive_int(k, "k")
    check_positive_int(n_frogs, "n_frogs")
    mixing = math.sqrt((1.0 - p_T) ** (t + 1) / p_T)
    sampling = math.sqrt(k / delta * (1.0 / n_frogs + (1.0 - p_s**2) * p_cap))
    return mixing + sampling


def intersection_bound(n, t, pi_max, p_T):
    """Upper bound on the probability that two independent uniform-start
    walkers under the teleporting chain meet within ``t`` steps."""
    return 1.0 / n + t * pi_max / p_T


@dataclass(frozen=True)
class IntersectionEstimate:
    estimate: float
    low: float
    high: float
    meets: int
    trials: int


def intersection_probability_mc(g, p_T, t, trials, seed, *, confidence=0.99, chunk=250_000):
    """Monte-Carlo estimate of the meeting probability with a Wilson interval.

    Each trial runs two independent walkers under the teleporting chain from
    uniform starts and records whether they share a vertex at any step
    ``0..t``.
    """
    p_T = check_probability(p_T, "p_T")
    t = check_positive_int(t, "t", allow_zero=True)
    trials = check_positive_int(trials, "trials")
    meets = 0
    for c, lo in enumerate(range(0, trials, chunk)):
        size = min(chunk, trials - lo)
        rng = keyed_stream(seed, "meet", c)
        a = rng.integers(0, g.n, size=size)
        b = rng.integers(0, g.n, size=size)
        met = a == b
        for _ in range(t):
            live = np.flatnonzero(~met)
            if live.size == 0:
                break
            a_l, b_l = advance(g, a[live], rng), advance(g, b[live], rng)
            for walker in (a_l, b_l):
                tel = rng.random(live.size) < p_T
                walker[tel] = rng.integers(0, g.n, size=int(tel.sum()))
            a[live], b[live] = a_l, b_l
            met[live] = a_l == b_l
        meets += int(met.sum())
    ci = binomtest(meets, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return IntersectionEstimate(meets / trials, float(ci.low), float(ci.high), meets, trials)


def sample_size_hint(k, mu_k, p_T=0.15):
    """Suggested ``(t, N)`` from the logarithmic/quadratic scaling rule.

    ``t = ceil(log(1/mu_k) / log(1/(1-p_T))) + 3`` and ``N = ceil(4k / mu_k^2)``;
    the constants 3 and 4 are calibration choices.
    """
    k = check_positive_int(k, "k")
    if not 0 < mu_k <= 1:
        raise ValueError(f"mu_k must lie in (0, 1], got {mu_k}")
    p_T = check_probability(p_T, "p_T", allow_zero=False)
    if p_T == 1.0 or mu_k == 1.0:
        t = 3
    else:
        t = math.ceil(math.log(1.0 / mu_k) / math.log(1.0 / (1.0 - p_T)) - 1e-9) + 3
    N = math.ceil(4.0 * k / mu_k**2 - 1e-9)
    return t, N


@dataclass(frozen=True)
class AccuracyReport:
    k: int
    mass_captured: float
    normalized_mass: float
    exact_identification: float
    bound_epsilon: float = None
    bound_satisfied: bool = None

    def row(self):
        # repr is the shortest text that reads back to the same float
        eps = "" if self.bound_epsilon is None else repr(float(self.bound_epsilon))
        ok = "" if self.bound_satisfied is None else str(bool(self.bound_satisfied)).lower()
        return (self.k, repr(float(self.mass_captured)), repr(float(self.normalized_mass)),
                repr(float(self.exact_identification)), eps, ok)


def accuracy_report(v, pi, k, epsilon=None):
    """Score ``v`` against the reference ``pi``; with ``epsilon`` also check
    ``mass >= optimum - epsilon``."""
    pi = np.asarray(pi, dtype=np.float64)
    k = check_k(k, pi.shape[0])
    mass = mass_captured(v, pi, k)
    best = mass_captured(pi, pi, k)
    ok = None if epsilon is None else bool(mass >= best - epsilon)
    return AccuracyReport(k, mass, mass / best, exact_identification(v, pi, k), epsilon, ok)


def write_report(path, reports, manifest=None):
    with open(path, "w", newline="") as fh:
        if manifest is not None:
            fh.write(f"# manifest={manifest}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for r in reports:
            w.writerow(r.row())
