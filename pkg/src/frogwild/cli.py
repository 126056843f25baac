"""Command-line front end.

Every command writes CSV files plus ``manifest.txt`` into ``--out``; each
CSV starts with a ``# manifest=manifest.txt`` line, and ``frogwild replay``
re-executes a manifest.
"""

import argparse
import csv
import logging
import sys
import warnings
from pathlib import Path

from . import exact
from .cluster import STRATEGIES, baseline_ledger, partition_graph
from .config import COMMANDS, SWEEP_AXES, WALK_PROCESSES, RunConfig
from .graph import FORMATS, DirectedGraph, EdgeListError, load_edge_list
from .metrics import (REPORT_HEADER, accuracy_report, epsilon_bound, estimator, intersection_bound,
                      write_report)
from .program import SCATTER_VARIANTS, FrogRun, run_frogwild, write_counters
from .rng import keyed_stream
from .stats import histogram
from .suite import SUITE, suite_graph
from .verify import SUITES, dump_report, run_suite
from .walks import ERASURE_KINDS, ErasureModel, walk_fixed_step, walk_truncated_geometric, \
    walk_with_erasures

MANIFEST = "manifest.txt"
LEDGER_TOTALS = ("sync_messages", "frog_messages", "bytes")

log = logging.getLogger("frogwild")


class CommandError(Exception):
    """A user-facing failure; reported without a traceback."""


def load_graph(config):
    if config.graph.startswith("suite:"):
        name = config.graph[len("suite:"):]
        if name not in SUITE:
            raise CommandError(f"unknown suite graph {name!r}; choose from {', '.join(SUITE)}")
        return suite_graph(name)
    try:
        return load_edge_list(config.graph, config.format)
    except FileNotFoundError:
        raise CommandError(f"graph file not found: {config.graph}") from None
    except EdgeListError as exc:
        raise CommandError(f"{config.graph}: {exc}") from None


def reference_scores(g, p_T):
    """Exact PageRank used to score approximations."""
    if g.n <= exact.ORACLE_MAX_N:
        return exact.dense_oracle(g, p_T)
    return exact.exact_pagerank(g, p_T, tol=1e-10, max_iters=10_000)


def _check_k(config, g):
    if config.k > g.n:
        raise CommandError(f"--k {config.k} exceeds the number of vertices ({g.n})")


def _partition(g, config, seed):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return partition_graph(g, config.machines, config.partition, seed)


def _outdir(config):
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / MANIFEST).write_text(config.to_text(manifest=True))
    return out


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# manifest={MANIFEST}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _ledger_totals(ledger):
    return (ledger.total_sync, ledger.total_frog, ledger.total_bytes)


def frogwild_once(g, config, seed, pi):
    """One FrogWild run and its accuracy report for the given seed."""
    run = FrogRun(config.frogs, config.pt, config.t_max, config.ps, config.scatter)
    part = _partition(g, config, seed)
    res = run_frogwild(g, part, run, seed, n_threads=config.threads,
                       sync_bytes=config.sync_bytes, frog_bytes=config.frog_bytes)
    scores = estimator(res.counters, res.n_counted)
    p_cap = min(1.0, intersection_bound(g.n, config.t_max, pi.max(), config.pt))
    eps = epsilon_bound(config.pt, config.t_max, config.k, config.delta, config.frogs,
                        config.ps, p_cap)
    return res, scores, accuracy_report(scores, pi, config.k, eps)


def cmd_exact(config):
    g = load_graph(config)
    _check_k(config, g)
    out = _outdir(config)
    capped = config.iters is not None
    result = exact.power_iteration(g, config.pt, config.tol, config.iters or 1000)
    if not result.converged:
        msg = (f"power iteration stopped after {result.iterations} iterations "
               f"(l1 residual {result.residual:.3e} > tol {config.tol:g})")
        if not capped:
            raise CommandError(msg)
        log.info(msg)
    exact.write_scores(out / "scores.csv", result.scores, MANIFEST)
    part = _partition(g, config, config.seed)
    ledger = baseline_ledger(g, part, result.iterations, sync_bytes=config.sync_bytes,
                             frog_bytes=config.frog_bytes)
    ledger.to_csv(out / "ledger.csv", MANIFEST)
    report = accuracy_report(result.scores, reference_scores(g, config.pt), config.k)
    write_report(out / "report.csv", [report], MANIFEST)
    print(f"exact: n={g.n} iterations={result.iterations} residual={result.residual:.3e} "
          f"messages={ledger.total_messages}")
    return 0


def cmd_frogwild(config):
    g = load_graph(config)
    _check_k(config, g)
    out = _outdir(config)
    pi = reference_scores(g, config.pt)
    res, scores, report = frogwild_once(g, config, config.seed, pi)
    write_counters(out / "counters.csv", res.counters, MANIFEST)
    exact.write_scores(out / "scores.csv", scores, MANIFEST)
    res.ledger.to_csv(out / "ledger.csv", MANIFEST)
    write_report(out / "report.csv", [report], MANIFEST)
    print(f"frogwild: n={g.n} frogs={res.n_counted} mass={report.mass_captured:.6f} "
          f"normalized={report.normalized_mass:.6f} exact_id={report.exact_identification:g} "
          f"messages={res.ledger.total_messages}")
    return 0


_AXIS_TYPES = {"ps": float, "frogs": int, "iters": int, "machines": int}


def parse_values(axis, text):
    if axis not in SWEEP_AXES:
        raise CommandError(f"--axis must be one of {', '.join(SWEEP_AXES)}")
    if not text:
        raise CommandError("--values must list at least one value")
    try:
        values = [_AXIS_TYPES[axis](v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CommandError(f"invalid value in --values {text!r} for axis {axis}") from None
    if not values:
        raise CommandError("--values must list at least one value")
    return values


def cmd_sweep(config):
    values = parse_values(config.axis, config.values)
    g = load_graph(config)
    _check_k(config, g)
    pi = reference_scores(g, config.pt)
    runs = []
    for value in values:
        try:
            cfg = config.replace(**{config.axis: value})
        except (TypeError, ValueError) as exc:
            raise CommandError(f"invalid {config.axis} value {value}: {exc}") from None
        for s in range(config.seeds):
            res, _, report = frogwild_once(g, cfg, config.seed + s, pi)
            runs.append((config.axis, value, config.seed + s, *report.row(),
                         *_ledger_totals(res.ledger)))
    out = _outdir(config)
    _write_rows(out / "sweep.csv", ("axis", "value", "seed", *REPORT_HEADER, *LEDGER_TOTALS), runs)
    print(f"sweep: {len(runs)} runs over {config.axis}={values}")
    return 0


def sparsify(g, keep, seed):
    """Keep each edge independently with probability ``keep``; vertices stay."""
    src, dst = g.edges()
    kept = keyed_stream(seed, "sparsify").random(g.n_edges) < keep
    if not kept.any():
        raise CommandError(f"--keep {keep} removed every edge")
    return DirectedGraph.from_edges(src[kept], dst[kept], g.n)


def cmd_compare_sparsify(config):
    g = load_graph(config)
    _check_k(config, g)
    pi = reference_scores(g, config.pt)
    iters = config.iters or 2
    rows = []
    first = None
    for s in range(config.seeds):
        seed = config.seed + s
        h = g if config.keep == 1.0 else sparsify(g, config.keep, seed)
        result = exact.power_iteration(h, config.pt, config.tol, iters)
        ledger = baseline_ledger(h, _partition(h, config, seed), result.iterations,
                                 sync_bytes=config.sync_bytes, frog_bytes=config.frog_bytes)
        report = accuracy_report(result.scores, pi, config.k)
        rows.append((config.keep, seed, h.n_edges, result.iterations, *report.row(),
                     *_ledger_totals(ledger)))
        if first is None:
            first = (result.scores, ledger)
    out = _outdir(config)
    exact.write_scores(out / "scores.csv", first[0], MANIFEST)
    first[1].to_csv(out / "ledger.csv", MANIFEST)
    _write_rows(out / "sparsify.csv",
                ("keep", "seed", "edges", "iterations", *REPORT_HEADER, *LEDGER_TOTALS), rows)
    print(f"compare-sparsify: keep={config.keep} iterations={iters} seeds={config.seeds}")
    return 0


def cmd_walk(config):
    g = load_graph(config)
    t = config.t_max
    if config.process == "fixed-step":
        pos = walk_fixed_step(g, config.pt, t, config.frogs, config.seed)
    elif config.process == "truncated-geometric":
        pos = walk_truncated_geometric(g, config.pt, t, config.frogs, config.seed)
    else:
        try:
            pos = walk_with_erasures(g, ErasureModel(config.erasure, config.ps), config.pt, t,
                                     config.frogs, config.seed)
        except ValueError as exc:
            raise CommandError(str(exc)) from None
    counts = histogram(pos, g.n)
    out = _outdir(config)
    _write_rows(out / "walk.csv", ("vertex", "count"), enumerate(counts.tolist()))
    print(f"walk: {config.process} walkers={config.frogs} t={t}")
    return 0


RUNNERS = {
    "exact": cmd_exact,
    "frogwild": cmd_frogwild,
    "sweep": cmd_sweep,
    "compare-sparsify": cmd_compare_sparsify,
    "walk": cmd_walk,
}


def cmd_verify(suite, out=None):
    report = run_suite(suite)
    if out is None:
        dump_report(report, sys.stdout)
    else:
        Path(out).mkdir(parents=True, exist_ok=True)
        with open(Path(out) / "verify.json", "w") as fh:
            dump_report(report, fh)
    for row in report["properties"]:
        print(f"{row['verdict'].upper():4} {row['module']}/{row['property']}: "
              f"{row['statistic']:.4g} (threshold {row['threshold']:.4g})", file=sys.stderr)
    return 0 if report["passed"] else 1


def _add_run_flags(p, command):
    d = RunConfig()
    p.add_argument("--graph", default=d.graph,
                   help="edge-list path, or suite:NAME for a built-in graph (%(default)s)")
    p.add_argument("--format", choices=FORMATS, default=d.format)
    p.add_argument("--machines", type=int, default=d.machines)
    p.add_argument("--partition", choices=STRATEGIES, default=d.partition)
    p.add_argument("--ps", type=float, default=d.ps, help="mirror synchronization probability")
    p.add_argument("--pt", type=float, default=d.pt, help="teleport / death probability")
    p.add_argument("--frogs", type=int, default=d.frogs, help="number of frogs or walkers")
    p.add_argument("--iters", type=int, default=None,
                   help="supersteps (frogwild, walk: default 20) or power-iteration cap")
    p.add_argument("--k", type=int, default=d.k)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--seeds", type=int, default=d.seeds, help="number of consecutive seeds")
    p.add_argument("--scatter", choices=SCATTER_VARIANTS, default=d.scatter)
    p.add_argument("--erasure", choices=ERASURE_KINDS, default=d.erasure)
    p.add_argument("--delta", type=float, default=d.delta, help="failure probability of the bound")
    p.add_argument("--tol", type=float, default=d.tol, help="l1 residual tolerance")
    p.add_argument("--sync-bytes", type=int, default=d.sync_bytes)
    p.add_argument("--frog-bytes", type=int, default=d.frog_bytes)
    p.add_argument("--out", default=d.out)
    p.add_argument("--threads", type=int, default=d.threads,
                   help="worker threads; never changes results")
    if command == "sweep":
        p.add_argument("--axis", choices=SWEEP_AXES, required=True)
        p.add_argument("--values", required=True, help="comma-separated axis values")
    if command == "compare-sparsify":
        p.add_argument("--keep", type=float, default=d.keep, help="edge keep probability")
    if command == "walk":
        p.add_argument("--process", choices=WALK_PROCESSES, default=d.process)


HELP = {
    "exact": "power-iteration PageRank with baseline traffic",
    "frogwild": "one FrogWild run: counters, scores, traffic and accuracy",
    "sweep": "FrogWild over a list of values of one parameter",
    "compare-sparsify": "power iteration on uniformly sparsified graphs",
    "walk": "final positions of independent single walkers",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="frogwild", description="FrogWild approximate PageRank on a simulated vertex-cut engine")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        _add_run_flags(sub.add_parser(command, parents=[common], help=HELP[command]), command)
    v = sub.add_parser("verify", parents=[common], help="run the property suite")
    v.add_argument("--suite", choices=SUITES, default="fast")
    v.add_argument("--out", default=None, help="write verify.json here instead of stdout")
    r = sub.add_parser("replay", parents=[common], help="re-run the command recorded in a manifest")
    r.add_argument("manifest")
    r.add_argument("--out", default=None)
    r.add_argument("--threads", type=int, default=1)
    return parser


def config_from_args(args):
    fields = dict(vars(args))
    for key in ("verbose",):
        fields.pop(key, None)
    fields = {k.replace("-", "_"): v for k, v in fields.items()}
    return RunConfig(**fields)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "verify":
            return cmd_verify(args.suite, args.out)
        if args.command == "replay":
            path = Path(args.manifest)
            overrides = {"threads": args.threads,
                         "out": args.out if args.out is not None else str(path.parent)}
            config = RunConfig.from_text(path.read_text(), **overrides)
        else:
            config = config_from_args(args)
        return RUNNERS[config.command](config)
    except CommandError as exc:
        print(f"frogwild: error: {exc}", file=sys.stderr)
        return 1
    except (TypeError, ValueError, OSError) as exc:
        print(f"frogwild: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
