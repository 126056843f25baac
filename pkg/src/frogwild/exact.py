"""Reference PageRank: power iteration, a dense linear-solve oracle, exact
distribution evolution under the teleporting chain, and the chi-square
contrast used to measure mixing.

The teleporting chain is ``Q = (1 - p_T) P + (p_T / n) 11'``; columns are
indexed by the source vertex and sum to one, so ``pi = Q pi``.
"""

from dataclasses import dataclass, field

import numpy as np

from .graph import apply_P
from .validation import check_distribution, check_k, check_positive_int, check_probability

DEFAULT_TELEPORT = 0.15
ORACLE_MAX_N = 2000


class ConvergenceError(RuntimeError):
    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"power iteration did not converge in {iterations} iterations "
            f"(l1 residual {residual:.3e})"
        )


@dataclass
class PowerIterationResult:
    scores: np.ndarray
    iterations: int
    residual: float
    converged: bool
    residuals: list = field(default_factory=list, repr=False)


def apply_Q(g, x, p_T):
    """One application of the teleporting chain to ``x``."""
    return (1.0 - p_T) * apply_P(g, x) + p_T * x.sum() / g.n


def power_iteration(g, p_T=DEFAULT_TELEPORT, tol=1e-10, max_iters=1000):
    """Run power iteration on ``Q`` from the uniform vector.

    Stops once ``||Q x - x||_1 <= tol`` or after ``max_iters`` applications
    of ``Q``, whichever comes first; never raises on non-convergence.
    """
    p_T = check_probability(p_T, "p_T", allow_zero=False)
    max_iters = check_positive_int(max_iters, "max_iters")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    x = np.full(g.n, 1.0 / g.n)
    residuals = []
    for it in range(1, max_iters + 1):
        y = apply_Q(g, x, p_T)
        res = float(np.abs(y - x).sum())
        residuals.append(res)
        # Q contracts zero-sum vectors by (1 - p_T), so y is at least as close as x
        x = y / y.sum()
        if res <= tol:
            return PowerIterationResult(x, it, res, True, residuals)
    return PowerIterationResult(x, max_iters, residuals[-1], False, residuals)


def exact_pagerank(g, p_T=DEFAULT_TELEPORT, tol=1e-10, max_iters=1000):
    """PageRank by power iteration, raising :class:`ConvergenceError` if the
    l1 residual is still above ``tol`` after ``max_iters`` iterations."""
    result = power_iteration(g, p_T, tol, max_iters)
    if not result.converged:
        raise ConvergenceError(result.iterations, result.residual)
    return result.scores


def dense_oracle(g, p_T=DEFAULT_TELEPORT):
    """Solve ``(I - (1 - p_T) P) x = (p_T / n) 1`` by dense elimination.

    Independent of :func:`power_iteration`; limited to ``n <= 2000``.
    """
    p_T = check_probability(p_T, "p_T", allow_zero=False)
    n = g.n
    if n > ORACLE_MAX_N:
        raise ValueError(f"dense oracle is limited to n <= {ORACLE_MAX_N}, got n={n}")
    P = np.zeros((n, n))
    src, dst = g.edges()
    P[dst, src] = 1.0 / g.out_degree[src]
    P[:, g.dangling] = 1.0 / n
    A = np.eye(n) - (1.0 - p_T) * P
    x = np.linalg.solve(A, np.full(n, p_T / n))
    return x / x.sum()


def evolve_distribution(g, x, p_T=DEFAULT_TELEPORT, steps=1):
    """Return ``Q^steps x`` computed exactly, without forming ``Q``."""
    x = check_distribution(x, g.n)
    p_T = check_probability(p_T, "p_T")
    steps = check_positive_int(steps, "steps", allow_zero=True)
    for _ in range(steps):
        x = apply_Q(g, x, p_T)
    return x


def chi2_contrast(alpha, beta):
    """Chi-square contrast of ``alpha`` with respect to ``beta``."""
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    if alpha.shape != beta.shape:
        raise ValueError(f"shape mismatch: {alpha.shape} vs {beta.shape}")
    if np.any(beta <= 0):
        raise ValueError("beta must be strictly positive")
    return float(np.sum((alpha - beta) ** 2 / beta))


def top_k(v, k):
    """Indices of the ``k`` largest entries, ties broken by ascending id."""
    v = np.asarray(v)
    k = check_k(k, v.shape[0])
    return np.argsort(-v, kind="stable")[:k]


def write_scores(path, scores, manifest=None):
    with open(path, "w") as fh:
        if manifest is not None:
            fh.write(f"# manifest={manifest}\n")
        fh.write("vertex,score\n")
        for v, s in enumerate(np.asarray(scores).tolist()):
            fh.write(f"{v},{s:.17g}\n")


def read_scores(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("vertex"):
                continue
            v, s = line.strip().split(",")
            rows.append((int(v), float(s)))
    out = np.zeros(len(rows))
    for v, s in rows:
        out[v] = s
    return out
