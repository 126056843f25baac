"""Chi-square goodness-of-fit helpers with sparse-cell pooling."""

import numpy as np
from scipy.stats import chi2_contingency, chisquare


def _pool(expected, min_expected):
    """Group cells so that every group has expected count >= min_expected.

    Cells are visited in ascending order of expected count and merged into
    a running bin; returns a list of index arrays.
    """
    order = np.argsort(expected, kind="stable")
    groups, current, acc = [], [], 0.0
    for i in order.tolist():
        current.append(i)
        acc += expected[i]
        if acc >= min_expected:
            groups.append(np.array(current))
            current, acc = [], 0.0
    if current:
        if groups:
            groups[-1] = np.concatenate([groups[-1], current])
        else:
            groups.append(np.array(current))
    return groups


def gof_pvalue(counts, probs, min_expected=5.0):
    """P-value of a chi-square goodness-of-fit test of ``counts`` against
    ``probs``. Zero-probability cells must be empty (else p = 0)."""
    counts = np.asarray(counts, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64)
    total = counts.sum()
    zero = probs <= 0
    if np.any(counts[zero] > 0):
        return 0.0
    counts, probs = counts[~zero], probs[~zero] / probs[~zero].sum()
    expected = probs * total
    groups = _pool(expected, min_expected)
    if len(groups) < 2:
        return 1.0
    obs = np.array([counts[g].sum() for g in groups])
    exp = np.array([expected[g].sum() for g in groups])
    return float(chisquare(obs, exp).pvalue)


def two_sample_pvalue(a, b, min_expected=5.0):
    """P-value of a chi-square test that two count vectors share one law."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    pooled = a + b
    keep = pooled > 0
    a, b, pooled = a[keep], b[keep], pooled[keep]
    smaller = min(a.sum(), b.sum()) / (a.sum() + b.sum())
    groups = _pool(pooled * smaller, min_expected)
    if len(groups) < 2:
        return 1.0
    table = np.array([[a[g].sum() for g in groups], [b[g].sum() for g in groups]])
    return float(chi2_contingency(table, correction=False).pvalue)


def histogram(samples, n):
    return np.bincount(np.asarray(samples, dtype=np.int64), minlength=n)


def total_variation(p, q):
    return 0.5 * float(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)).sum())
