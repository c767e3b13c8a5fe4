import csv
import json

import pytest

from trine import rt
from trine.ac23 import GRID_CSV_COLUMNS
from trine.cli import main


def run_cli(*argv) -> int:
    return main(list(argv))


class TestTrace:
    def test_fixture_trace(self, capsys):
        assert run_cli("trace", "--mask", "1,1", "--L", "3", "--start", "ABA") == 0
        out = capsys.readouterr().out
        assert "T=3" in out
        assert "ACA" in out and "CBC" in out and "BAB" in out
        assert "mirror CAC" in out

    def test_degenerate_start(self, capsys):
        assert run_cli("trace", "--mask", "1,1", "--L", "3", "--start", "AAA") == 0
        assert "degenerate" in capsys.readouterr().out

    def test_witness_trace_shows_failure(self, capsys):
        assert run_cli("trace", "--mask", "1,5", "--L", "7", "--start", "BABAAAA") == 0
        out = capsys.readouterr().out
        assert "FAILED condition: div3" in out

    def test_trace_files(self, tmp_path, capsys):
        out = tmp_path / "t"
        assert run_cli("trace", "--mask", "1,1", "--L", "3", "--start", "ABA",
                       "--out", str(out)) == 0
        trace = (out / "trace.csv").read_text()
        assert trace.splitlines()[0] == "t,coloring"
        assert "1,ACA" in trace
        report = json.loads((out / "ipf.json").read_text())
        assert report["T"] == 3 and report["K"] == 2
        run = json.loads((out / "run.json").read_text())
        assert run["run"]["states"] == ["ACA", "CBC", "BAB"]

    def test_graph_file_input(self, tmp_path, capsys):
        graph = {"nodes": 3, "directed": [], "undirected": [[0, 1], [1, 2], [0, 2]]}
        path = tmp_path / "ring.json"
        path.write_text(json.dumps(graph))
        assert run_cli("trace", "--graph", str(path), "--start", "ABA") == 0
        assert "T=3" in capsys.readouterr().out

    def test_missing_arguments(self, capsys):
        assert run_cli("trace", "--start", "ABA") == 1


class TestCheckMask:
    def test_incorrect_exits_2(self, capsys, tmp_path):
        out = tmp_path / "v.json"
        code = run_cli("check-mask", "--n", "1", "--m", "5",
                       "--lmax", "8", "--samples", "0", "--json", str(out))
        assert code == 2
        assert "witness: L=7 start=BABAAAA condition=div3" in capsys.readouterr().out
        verdict = json.loads(out.read_text())
        assert verdict["status"] == "Incorrect"

    def test_correct_exits_0(self, capsys):
        assert run_cli("check-mask", "--n", "1", "--m", "1",
                       "--lmax", "7", "--samples", "0") == 0
        assert "CorrectSoFar" in capsys.readouterr().out

    def test_bad_usage_exits_1(self):
        assert run_cli("check-mask", "--n", "1") == 1
        assert run_cli("nonsense") == 1


class TestGrid:
    def test_grid_csv(self, tmp_path, capsys):
        out = tmp_path / "grid.csv"
        code = run_cli("grid", "--max", "5", "--out", str(out),
                       "--lmax", "7", "--cutoff", "7", "--samples", "0")
        assert code == 0
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == GRID_CSV_COLUMNS
        assert len(rows) == 10  # header + 3x3 cells
        by_mask = {(r[0], r[1]): r[3] for r in rows[1:]}
        assert by_mask[("1", "5")] == "Incorrect"
        assert by_mask[("1", "1")] == "CorrectSoFar"

    def test_even_max_rejected(self, capsys):
        assert run_cli("grid", "--max", "4", "--out", "x.csv") == 1

    def test_resume_matches_fresh(self, tmp_path, capsys):
        flags = ["--max", "5", "--lmax", "6", "--cutoff", "6", "--samples", "0"]
        fresh = tmp_path / "fresh.csv"
        assert run_cli("grid", *flags, "--out", str(fresh)) == 0

        partial = tmp_path / "partial.csv"
        lines = fresh.read_text().splitlines(keepends=True)
        partial.write_text("".join(lines[:5]))  # header + 4 cells
        assert run_cli("grid", *flags, "--out", str(partial), "--resume") == 0
        assert partial.read_bytes() == fresh.read_bytes()

    def test_cr_annotations_from_directory(self, tmp_path, capsys):
        rtdir = tmp_path / "rt"
        rtdir.mkdir()
        assert run_cli("rt", "build-1-2k1", "--k", "2",
                       "--step-table", "builtin:all-combos",
                       "--out", str(rtdir / "1_3.rt")) == 0
        out = tmp_path / "grid.csv"
        gridjson = tmp_path / "grid.json"
        assert run_cli("grid", "--max", "3", "--out", str(out),
                       "--lmax", "6", "--cutoff", "6", "--samples", "0",
                       "--json", str(gridjson), "--cr-from", str(rtdir)) == 0
        cells = json.loads(gridjson.read_text())["cells"]
        annotated = {(c["mask"]["n"], c["mask"]["m"]): c.get("C_R") for c in cells}
        assert annotated[(1, 3)] == 27
        assert annotated[(1, 1)] is None


class TestRtCommands:
    @pytest.fixture
    def tables(self, tmp_path):
        a = tmp_path / "1_3.rt"
        b = tmp_path / "3_1.rt"
        assert run_cli("rt", "build-1-2k1", "--k", "2",
                       "--step-table", "builtin:all-combos", "--out", str(a)) == 0
        assert run_cli("rt", "reflect", str(a), "--out", str(b)) == 0
        return a, b

    def test_build_and_reflect(self, tables, capsys):
        a, b = tables
        ta, tb = rt.load_table(a), rt.load_table(b)
        assert ta.row_count == 27
        assert tb.mask.n == 3 and tb.mask.m == 1

    def test_intersect_union(self, tables, tmp_path, capsys):
        a, b = tables
        out = tmp_path / "i.rt"
        assert run_cli("rt", "intersect", str(a), str(b), "--out", str(out)) == 0
        assert "C_R=" in capsys.readouterr().out
        assert run_cli("rt", "union", str(a), str(b)) == 0

    def test_includes(self, tables, capsys):
        a, b = tables
        assert run_cli("rt", "includes", str(a), str(b)) == 0
        assert capsys.readouterr().out.strip() in ("true", "false")

    def test_classify_and_scounts(self, tables, tmp_path, capsys):
        a, _ = tables
        assert run_cli("rt", "classify", str(a)) == 0
        assert "Small" in capsys.readouterr().out
        out = tmp_path / "s.csv"
        assert run_cli("rt", "scounts", str(a), "--csv", str(out)) == 0
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == rt.SCOUNTS_CSV_COLUMNS
        assert rows[1][3] == "27"

    def test_expand(self, tables, tmp_path):
        a, _ = tables
        outdir = tmp_path / "subs"
        assert run_cli("rt", "expand", str(a), "--outdir", str(outdir)) == 0
        files = sorted(p.name for p in outdir.iterdir())
        assert len(files) == 6
        assert "sub_0.rt" in files and "sub_m2.rt" in files

    def test_extract(self, tmp_path, capsys):
        out = tmp_path / "e.rt"
        assert run_cli("rt", "extract", "--n", "1", "--m", "1",
                       "--lmin", "3", "--lmax", "5", "--cutoff", "5",
                       "--out", str(out)) == 0
        table = rt.load_table(out)
        assert table.experimental
        assert table.hypothesis == rt.EXTRACTION_HYPOTHESIS
        assert "[EXPERIMENTAL" in capsys.readouterr().out

    def test_integral_compatible(self, tmp_path, capsys):
        a = tmp_path / "a.rt"
        b = tmp_path / "b.rt"
        rt.save_table(rt.ResolutionTable(4, [(1, 1, 1, 1), (1, 1, 1, 4)]), a)
        rt.save_table(rt.ResolutionTable(4, [(1, 1, 1, 2)]), b)
        assert run_cli("rt", "integral", str(a), str(b)) == 0
        assert "integral C_R=3" in capsys.readouterr().out

    def test_integral_incompatible(self, tmp_path, capsys):
        a = tmp_path / "a.rt"
        b = tmp_path / "b.rt"
        rt.save_table(rt.ResolutionTable(3, [(0, 1, 1)]), a)
        rt.save_table(rt.ResolutionTable(3, [(2, 0, 0)]), b)
        assert run_cli("rt", "integral", str(a), str(b)) == 1
        assert "incompatible" in capsys.readouterr().err

    def test_coincide(self, tables, tmp_path, capsys):
        a, b = tables
        out = tmp_path / "c.csv"
        assert run_cli("rt", "coincide", str(a), str(b), "--csv", str(out)) == 0
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["a", "b", "relation", "intersectionCR", "group"]

    def test_missing_file(self, capsys):
        assert run_cli("rt", "classify", "no-such-file.rt") == 1


class TestBundle:
    def test_bundle_determinism(self, tmp_path, capsys):
        flags = ["--grid-max", "3", "--lmin", "3", "--lmax", "5",
                 "--cutoff", "5", "--samples", "0"]
        one = tmp_path / "one"
        two = tmp_path / "two"
        assert run_cli("bundle", "--out", str(one), *flags) == 0
        assert run_cli("bundle", "--out", str(two), *flags) == 0

        files_one = sorted(p.relative_to(one) for p in one.rglob("*") if p.is_file())
        files_two = sorted(p.relative_to(two) for p in two.rglob("*") if p.is_file())
        assert files_one == files_two
        for rel in files_one:
            assert (one / rel).read_bytes() == (two / rel).read_bytes(), rel

    def test_manifest_contents(self, tmp_path):
        out = tmp_path / "b"
        assert run_cli("bundle", "--out", str(out), "--grid-max", "3",
                       "--lmax", "5", "--cutoff", "5", "--samples", "0") == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["tool"]["name"] == "trine"
        assert "configHash" in manifest
        assert "grid.csv" in manifest["files"]
        for rel, digest in manifest["files"].items():
            import hashlib

            actual = hashlib.sha256((out / rel).read_bytes()).hexdigest()
            assert actual == digest


class TestConfigPlumbing:
    def test_config_file(self, tmp_path, capsys):
        cfg = {"lmin": 3, "lmax": 6, "exhaustive_cutoff": 6, "samples_per_L": 0}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        assert run_cli("check-mask", "--n", "1", "--m", "1",
                       "--config", str(path)) == 0
        assert "L=3..6" in capsys.readouterr().out

    def test_threads_env_override(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("TRINE_THREADS", "2")
        assert run_cli("check-mask", "--n", "1", "--m", "5",
                       "--lmax", "8", "--samples", "0") == 2

    def test_bad_config_key(self, tmp_path, capsys):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"bogus": 1}))
        assert run_cli("check-mask", "--n", "1", "--m", "1",
                       "--config", str(path)) == 1
