"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line that is printed with the test
and repeated in the terminal summary.
"""
import time

import numpy as np

from conftest import ACCEPTANCE
from frogwild import cli, exact
from frogwild.cluster import baseline_ledger, partition_graph
from frogwild.metrics import (accuracy_report, intersection_bound, intersection_probability_mc,
                              estimator)
from frogwild.program import FrogRun, run_frogwild
from frogwild.stats import histogram, two_sample_pvalue
from frogwild.suite import SUITE
from frogwild.verify import random_graph, thm1_failure_rates
from frogwild.walks import ErasureModel, walk_fixed_step, walk_truncated_geometric, \
    walk_with_erasures

ALPHA = 0.001


def record(number, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert passed, line


def test_c1_oracle_equivalence():
    start = time.perf_counter()
    graphs = [random_graph(n, d, seed)
              for seed, (n, d) in enumerate([(n, d) for n in (5, 17, 50, 120, 200)
                                             for d in (0.5, 1.5, 3.0, 8.0)])]
    worst = max(np.abs(exact.exact_pagerank(g, 0.15, tol=1e-12, max_iters=5000)
                       - exact.dense_oracle(g, 0.15)).max() for g in graphs)
    seconds = time.perf_counter() - start
    ok = len(graphs) >= 20 and worst <= 1e-8 and seconds < 10
    record(1, ok, f"{len(graphs)} random graphs, max l_inf {worst:.2e} <= 1e-8, {seconds:.1f} s < 10 s")


def test_c2_mixing_bound(suite_graphs):
    worst = -np.inf
    for g in suite_graphs.values():
        pi = exact.dense_oracle(g, 0.15)
        x = np.full(g.n, 1.0 / g.n)
        for t in range(41):
            worst = max(worst, exact.chi2_contrast(x, pi) - 0.85 / 0.15 * 0.85**t)
            x = exact.apply_Q(g, x, 0.15)
    record(2, worst <= 1e-9, f"max chi2 - bound over t = 0..40 is {worst:.3e} <= 1e-9")


def test_c3_process_equivalence(suite_graphs):
    start = time.perf_counter()
    pmin = 1.0
    for i, name in enumerate(SUITE):
        g = suite_graphs[name]
        a = histogram(walk_fixed_step(g, 0.15, 20, 100_000, 2 * i), g.n)
        b = histogram(walk_truncated_geometric(g, 0.15, 20, 100_000, 2 * i + 1), g.n)
        pmin = min(pmin, two_sample_pvalue(a, b))
    seconds = time.perf_counter() - start
    ok = pmin >= ALPHA and seconds < 30
    record(3, ok, f"min p-value {pmin:.4f} >= {ALPHA} on {len(SUITE)} graphs, {seconds:.1f} s < 30 s")


def test_c4_intersection_bound(suite_graphs):
    start = time.perf_counter()
    worst = -np.inf
    for i, name in enumerate(SUITE):
        g = suite_graphs[name]
        pi = exact.dense_oracle(g, 0.15)
        for t in (1, 5, 20):
            est = intersection_probability_mc(g, 0.15, t, 1_000_000, 100 * i + t)
            worst = max(worst, est.high - intersection_bound(g.n, t, pi.max(), 0.15))
    seconds = time.perf_counter() - start
    ok = worst <= 0 and seconds < 60
    record(4, ok, f"max (Wilson upper - bound) {worst:.4f} <= 0, {seconds:.1f} s < 60 s")


def test_c5_main_bound():
    start = time.perf_counter()
    rates, (t, N) = thm1_failure_rates(100)
    seconds = time.perf_counter() - start
    worst = max(rates.values())
    ok = worst <= 0.15 and seconds < 300
    shown = ", ".join(f"p_s={p}: {r:.2f}" for p, r in rates.items())
    record(5, ok, f"failure rates {shown} <= 0.15 (t={t}, N={N}), {seconds:.1f} s < 300 s")


def test_c6_traffic_scaling(suite_graphs):
    g = suite_graphs["pa-200"]
    part = partition_graph(g, 8, "random-edge", 0)
    worst = 0.0
    for p_s in (0.3, 0.7, 1.0):
        observed = expected = 0.0
        for seed in range(50):
            res = run_frogwild(g, part, FrogRun(10_000, 0.15, 20, p_s), seed)
            observed += sum(h.sync_messages for h in res.history)
            expected += sum(h.sync_expectation for h in res.history)
        worst = max(worst, abs(observed / expected - 1))
    # traffic ratio in the 4-superstep setting used for the traffic experiments,
    # against power iteration run to the baseline tolerance
    baseline = baseline_ledger(g, part, exact.power_iteration(g, 0.15, tol=1e-6).iterations)
    ratios = {}
    for p_s in (0.1, 0.4, 0.7, 1.0):
        totals = [run_frogwild(g, part, FrogRun(10_000, 0.15, 4, p_s), seed).ledger.total_messages
                  for seed in range(50)]
        ratios[p_s] = np.mean(totals) / baseline.total_messages
    ok = worst <= 0.05 and max(ratios.values()) <= 0.10
    shown = ", ".join(f"p_s={p}: {r:.3f}" for p, r in ratios.items())
    record(6, ok, f"sync relative error {worst:.4f} <= 0.05; FrogWild / baseline messages "
                  f"{shown} (need <= 0.10)")


def test_c7_accuracy_trend(suite_graphs):
    g = suite_graphs["pa-200"]
    pi = exact.dense_oracle(g, 0.15)
    mass_ok = ident_ok = 0
    for seed in range(30):
        res = run_frogwild(g, partition_graph(g, 8, "random-edge", seed),
                           FrogRun(100_000, 0.15, 20, 0.7), seed)
        report = accuracy_report(estimator(res.counters, res.n_counted), pi, 10)
        mass_ok += report.normalized_mass >= 0.9
        ident_ok += report.exact_identification >= 0.7
    ok = mass_ok >= 27 and ident_ok >= 27
    record(7, ok, f"normalized mass >= 0.9 on {mass_ok}/30, exact id >= 0.7 on {ident_ok}/30 "
                  "(need 27)")


def test_c8_conservation_and_determinism(suite_graphs, tmp_path):
    runs = bad = 0
    for name, g in suite_graphs.items():
        for machines, strategy in ((1, "random-edge"), (4, "random-edge"), (8, "greedy-vertex-cut")):
            part = partition_graph(g, machines, strategy, 5)
            for p_s in (0.0, 0.4, 1.0):
                res = run_frogwild(g, part, FrogRun(10_000, 0.15, 15, p_s), runs)
                bad += res.population != [10_000] * 17 or res.counters.sum() != 10_000
                runs += 1
    differing = 0
    for args in (("--ps", 0.5), ("--ps", 0.2, "--partition", "greedy-vertex-cut"),
                 ("--graph", "suite:complete-20", "--machines", 3)):
        outs = []
        for threads in (1, 4):
            out = tmp_path / f"{len(outs)}-{differing}-{args[1]}"
            cli.main([str(a) for a in ("frogwild", "--frogs", 20_000, "--seed", 3, *args,
                                       "--threads", threads, "--out", out)])
            outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        differing += outs[0] != outs[1]
    ok = bad == 0 and differing == 0
    record(8, ok, f"conservation broken in {bad}/{runs} runs, "
                  f"{differing}/3 CLI configs differ between 1 and 4 threads")


def test_c9_marginal_invariance(suite_graphs):
    configs = [(kind, p_s) for kind in ("independent", "at-least-one") for p_s in (0.3, 1.0)]
    pmin = 1.0
    for name in SUITE:
        g = suite_graphs[name]
        hists = [histogram(walk_with_erasures(g, ErasureModel(kind, p_s), 0.15, 20, 100_000, i), g.n)
                 for i, (kind, p_s) in enumerate(configs)]
        for a in range(len(hists)):
            for b in range(a + 1, len(hists)):
                pmin = min(pmin, two_sample_pvalue(hists[a], hists[b]))
    record(9, pmin >= ALPHA, f"min pairwise p-value {pmin:.4f} >= {ALPHA} over "
                             f"{len(configs)} erasure settings on {len(SUITE)} graphs")
