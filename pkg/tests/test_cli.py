import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frogwild import cli, exact
from frogwild.config import RunConfig
from frogwild.program import read_counters
from frogwild.suite import suite_graph


def run(*argv):
    return cli.main([str(a) for a in argv])


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "# manifest=manifest.txt"
    header = lines[1].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[2:]]


def snapshot(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


class TestRunConfig:
    def test_round_trip_fixed_point(self):
        c = RunConfig(command="sweep", graph="g.txt", ps=0.35, iters=7, axis="frogs",
                      values="10,100", tol=1e-6, seeds=4)
        text = c.to_text()
        assert RunConfig.from_text(text).to_text() == text
        assert RunConfig.from_text(text) == c

    def test_manifest_skips_execution_details(self):
        text = RunConfig(out="x", threads=8).to_text(manifest=True)
        assert "out=" not in text and "threads=" not in text

    @pytest.mark.parametrize("kwargs", [
        {"ps": 1.5}, {"pt": 0.0}, {"frogs": 0}, {"machines": 0}, {"k": 0}, {"command": "plot"},
        {"scatter": "floor"}, {"erasure": "burst"}, {"axis": "k"}, {"delta": 1.0}, {"keep": 0.0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises((ValueError, TypeError)):
            RunConfig(**kwargs)

    def test_unknown_manifest_key(self):
        with pytest.raises(ValueError, match="line 2"):
            RunConfig.from_text("command=exact\ncolour=blue\n")

    @settings(max_examples=50, deadline=None)
    @given(ps=st.floats(0, 1), pt=st.floats(0.01, 1), frogs=st.integers(1, 10**7),
           iters=st.none() | st.integers(1, 100), seed=st.integers(0, 2**31))
    def test_round_trip_property(self, ps, pt, frogs, iters, seed):
        c = RunConfig(ps=ps, pt=pt, frogs=frogs, iters=iters, seed=seed)
        assert RunConfig.from_text(c.to_text()) == c


class TestExactCommand:
    def test_two_cycle(self, tmp_path, capsys):
        assert run("exact", "--graph", "suite:two-cycle", "--k", 1, "--out", tmp_path) == 0
        rows = read_csv(tmp_path / "scores.csv")
        assert [float(r["score"]) for r in rows] == [0.5, 0.5]
        assert "exact:" in capsys.readouterr().out

    def test_full_teleport(self, tmp_path):
        assert run("exact", "--graph", "suite:five-vertex", "--pt", 1.0, "--k", 2, "--out", tmp_path) == 0
        assert np.allclose(exact.read_scores(tmp_path / "scores.csv"), 0.2, atol=1e-15)

    def test_matches_oracle(self, tmp_path):
        assert run("exact", "--out", tmp_path) == 0
        scores = exact.read_scores(tmp_path / "scores.csv")
        assert np.abs(scores - exact.dense_oracle(suite_graph("pa-200"))).max() <= 1e-8
        report = read_csv(tmp_path / "report.csv")[0]
        assert float(report["normalized_mass"]) == 1.0
        ledger = read_csv(tmp_path / "ledger.csv")
        assert len(ledger) > 10 and len({r["bytes"] for r in ledger}) == 1

    def test_cap_is_not_fatal(self, tmp_path):
        assert run("exact", "--iters", 3, "--out", tmp_path) == 0
        assert len(read_csv(tmp_path / "ledger.csv")) == 3

    def test_nonconvergence_is_reported(self, tmp_path, capsys):
        assert run("exact", "--tol", 1e-300, "--out", tmp_path) == 1
        assert "residual" in capsys.readouterr().err

    def test_edge_list_file(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("# comment\n10 20\n20 10\n20 30\n")
        assert run("exact", "--graph", path, "--k", 1, "--out", tmp_path / "o") == 0
        assert len(read_csv(tmp_path / "o" / "scores.csv")) == 3

    def test_malformed_file(self, tmp_path, capsys):
        path = tmp_path / "g.txt"
        path.write_text("0 1\n1\n")
        assert run("exact", "--graph", path, "--out", tmp_path / "o") == 1
        assert "line 2" in capsys.readouterr().err

    def test_unknown_suite_graph(self, tmp_path):
        assert run("exact", "--graph", "suite:nope", "--out", tmp_path) == 1


class TestFrogWildCommand:
    def test_all_die_at_birth(self, tmp_path):
        assert run("frogwild", "--frogs", 100, "--pt", 1.0, "--out", tmp_path) == 0
        assert read_counters(tmp_path / "counters.csv").sum() == 100

    def test_outputs_name_manifest(self, tmp_path):
        run("frogwild", "--frogs", 1000, "--out", tmp_path)
        assert {p.name for p in tmp_path.iterdir()} == {
            "manifest.txt", "counters.csv", "scores.csv", "ledger.csv", "report.csv"}
        for name in ("counters.csv", "scores.csv", "ledger.csv", "report.csv"):
            assert (tmp_path / name).read_text().startswith("# manifest=manifest.txt\n")
        assert RunConfig.from_text((tmp_path / "manifest.txt").read_text()).frogs == 1000

    def test_same_seed_byte_identical(self, tmp_path):
        args = ("frogwild", "--frogs", 20_000, "--ps", 0.4, "--seed", 5)
        run(*args, "--out", tmp_path / "a")
        run(*args, "--out", tmp_path / "b")
        run(*args, "--out", tmp_path / "c", "--threads", 4)
        assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b") == snapshot(tmp_path / "c")

    def test_replay(self, tmp_path):
        run("frogwild", "--frogs", 5_000, "--ps", 0.3, "--partition", "greedy-vertex-cut",
            "--out", tmp_path / "a")
        assert run("replay", tmp_path / "a" / "manifest.txt", "--out", tmp_path / "b",
                   "--threads", 2) == 0
        assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b")

    def test_two_cycle_accuracy(self, tmp_path):
        assert run("frogwild", "--graph", "suite:two-cycle", "--pt", 0.15, "--iters", 30,
                   "--frogs", 100_000, "--machines", 2, "--ps", 0.7, "--k", 1, "--out", tmp_path) == 0
        report = read_csv(tmp_path / "report.csv")[0]
        # both vertices hold half the mass, so the raw top-1 mass is always 0.5
        assert float(report["mass"]) == 0.5
        assert float(report["normalized_mass"]) >= 0.98

    def test_k_too_large(self, tmp_path):
        assert run("frogwild", "--graph", "suite:two-cycle", "--k", 3, "--out", tmp_path) == 1

    def test_invalid_probability(self, tmp_path):
        assert run("frogwild", "--ps", 2, "--out", tmp_path) == 2


class TestSweep:
    def test_degenerate(self, tmp_path):
        run("sweep", "--axis", "ps", "--values", "1.0", "--frogs", 10_000, "--out", tmp_path / "s")
        run("frogwild", "--frogs", 10_000, "--out", tmp_path / "f")
        rows = read_csv(tmp_path / "s" / "sweep.csv")
        report = read_csv(tmp_path / "f" / "report.csv")[0]
        ledger = read_csv(tmp_path / "f" / "ledger.csv")
        assert len(rows) == 1
        assert {k: rows[0][k] for k in report} == report
        assert int(rows[0]["sync_messages"]) == sum(int(r["sync_messages"]) for r in ledger)
        assert int(rows[0]["bytes"]) == sum(int(r["bytes"]) for r in ledger)

    def test_sync_monotone_in_ps(self, tmp_path):
        run("sweep", "--axis", "ps", "--values", "0.1,0.4,0.7,1.0", "--frogs", 10_000,
            "--seeds", 3, "--out", tmp_path)
        rows = read_csv(tmp_path / "sweep.csv")
        for seed in {r["seed"] for r in rows}:
            sync = [int(r["sync_messages"]) for r in rows if r["seed"] == seed]
            assert sync == sorted(sync)

    def test_mass_grows_with_frogs(self, tmp_path):
        run("sweep", "--axis", "frogs", "--values", "1000,10000,100000", "--seeds", 50,
            "--out", tmp_path)
        rows = read_csv(tmp_path / "sweep.csv")
        ok = 0
        for seed in {r["seed"] for r in rows}:
            mass = [float(r["mass"]) for r in rows if r["seed"] == seed]
            ok += mass == sorted(mass)
        assert ok >= 45, f"mass nondecreasing in N on {ok} of 50 seeds"

    @pytest.mark.parametrize("values", ["", "0.1,x", "1.5"])
    def test_bad_values(self, tmp_path, values):
        assert run("sweep", "--axis", "ps", "--values", values, "--out", tmp_path) == 1


class TestCompareSparsify:
    def test_keep_all_matches_exact(self, tmp_path):
        run("compare-sparsify", "--keep", 1.0, "--iters", 2, "--out", tmp_path / "s")
        run("exact", "--iters", 2, "--out", tmp_path / "e")
        for name in ("scores.csv", "ledger.csv"):
            assert (tmp_path / "s" / name).read_bytes() == (tmp_path / "e" / name).read_bytes()

    def test_two_cycle_surviving_edges(self, tmp_path):
        g = suite_graph("two-cycle")
        seed = next(s for s in range(100) if cli.sparsify(g, 0.5, s).n_edges == 2)
        assert run("compare-sparsify", "--graph", "suite:two-cycle", "--keep", 0.5, "--k", 1,
                   "--seed", seed, "--out", tmp_path) == 0
        assert exact.read_scores(tmp_path / "scores.csv").tolist() == [0.5, 0.5]

    def test_accuracy_grows_with_keep(self, tmp_path):
        mass = {}
        for q in (0.3, 0.6, 1.0):
            run("compare-sparsify", "--keep", q, "--seeds", 10, "--out", tmp_path / str(q))
            mass[q] = [float(r["mass"]) for r in read_csv(tmp_path / str(q) / "sparsify.csv")]
        ok = sum(a <= b <= c for a, b, c in zip(mass[0.3], mass[0.6], mass[1.0]))
        assert ok >= 8

    def test_empty_graph(self, tmp_path, capsys):
        assert run("compare-sparsify", "--graph", "suite:self-loop", "--keep", 1e-9, "--k", 1,
                   "--out", tmp_path) == 1
        assert "removed every edge" in capsys.readouterr().err


class TestWalkCommand:
    @pytest.mark.parametrize("process", ["fixed-step", "truncated-geometric", "erasure"])
    def test_counts(self, tmp_path, process):
        assert run("walk", "--process", process, "--graph", "suite:five-vertex", "--frogs", 500,
                   "--erasure", "independent", "--ps", 0.5, "--out", tmp_path) == 0
        assert sum(int(r["count"]) for r in read_csv(tmp_path / "walk.csv")) == 500


class TestVerifyCommand:
    def test_fast_suite_passes(self, tmp_path):
        assert run("verify", "--suite", "fast", "--out", tmp_path) == 0
        report = json.loads((tmp_path / "verify.json").read_text())
        assert report["passed"]
        for row in report["properties"]:
            assert {"property", "statistic", "threshold", "verdict"} <= set(row)


def test_suite_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("FROGWILD_SUITE_DIR", str(tmp_path / "cache"))
    g = suite_graph("five-vertex")
    assert (tmp_path / "cache" / "five-vertex.txt").exists()
    assert suite_graph("five-vertex").n_edges == g.n_edges == 5
