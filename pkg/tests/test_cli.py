"""Tests for the command-line front end."""

import json

import pytest

from polyopf.cli import main
from polyopf.sdp import read_sdpa, solve


@pytest.fixture(autouse=True)
def corpus(no_corpus_env):
    """Every command reads the bundled corpus."""


class TestSolve:
    def test_uncertified_bound_exits_two(self, capsys):
        code = main(["solve", "WB2", "--set", "V2max=1.022", "--output", "json"])
        doc = json.loads(capsys.readouterr().out)
        assert code == 2
        (report,) = doc["reports"]
        assert report["status"] == "BoundOnly"
        assert report["lower_bound"] == pytest.approx(888.08, rel=1e-3)
        assert report["overrides"] == {"V2max": "1.022"}
        assert set(report["timings"]) == {"parse", "build", "solve", "extract"}

    def test_table_output(self, capsys):
        main(["solve", "WB2", "--set", "V2max=1.022", "--method", "dense"])
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].split()[:3] == ["case", "method", "form"]
        assert "888.08" in lines[1]

    def test_invalid_combination_exits_one(self, capsys):
        code = main(["solve", "WB2", "--method", "digs", "--formulation", "op4"])
        assert code == 1
        assert capsys.readouterr().err.startswith("error: method digs requires formulation op2")

    def test_unknown_case_exits_one(self, capsys):
        assert main(["solve", "case9999"]) == 1
        assert "case9999" in capsys.readouterr().err

    def test_bad_override_exits_one(self):
        assert main(["solve", "WB2", "--set", "V9max=1.0"]) == 1

    def test_digs_history(self, tmp_path, capsys):
        history = tmp_path / "history.csv"
        saved = tmp_path / "report.json"
        code = main([
            "solve", "WB2", "--set", "V2max=1.022", "--method", "digs", "--eps", "inf",
            "--history", str(history), "--save", str(saved),
        ])
        assert code == 2
        assert history.read_text().splitlines()[0] == "iteration,bound,subproblem_objective,seconds"
        assert json.loads(saved.read_text())["reports"][0]["method"] == "digs"

    def test_config_file_with_flag_precedence(self, tmp_path, capsys):
        path = tmp_path / "run.toml"
        path.write_text('case = "WB2"\nmethod = "dense"\noutput = "json"\n\n[overrides]\n"V2max" = 1.022\n')
        main(["solve", "-c", str(path), "--method", "sparse"])
        (report,) = json.loads(capsys.readouterr().out)["reports"]
        assert report["method"] == "sparse"
        assert report["case"] == "WB2"

    def test_case_file_path(self, case2_file, capsys):
        code = main(["solve", str(case2_file), "--output", "json"])
        (report,) = json.loads(capsys.readouterr().out)["reports"]
        assert code in (0, 2)
        assert report["lower_bound"] > 0.0


class TestSweep:
    def test_table(self, capsys):
        code = main([
            "sweep", "WB2", "--parameter", "V2max", "--values", "0.976,1.022", "--methods", "sparse-op2-1",
        ])
        lines = capsys.readouterr().out.splitlines()
        assert code == 0
        assert lines[0] == "# WB2"
        assert lines[3].split()[:2] == ["1.022", "888.08"]

    def test_no_values(self, capsys):
        assert main(["sweep", "WB2", "--parameter", "V2max"]) == 0

    def test_unknown_parameter_exits_one(self):
        assert main(["sweep", "WB2", "--parameter", "V7max", "--values", "1.0"]) == 1

    def test_json(self, capsys):
        main(["sweep", "WB2", "--parameter", "V2max", "--values", "1.022", "--output", "json"])
        doc = json.loads(capsys.readouterr().out)
        assert doc["methods"] == ["sparse-op2-1"]
        assert doc["rows"][0]["value"] == 1.022


class TestOtherCommands:
    def test_cases(self, capsys):
        assert main(["cases"]) == 0
        out = capsys.readouterr().out
        for name in ("WB2", "LMBM3", "WB5", "case39"):
            assert f"  {name} " in out

    def test_cases_from_environment(self, corpus_copy, monkeypatch, capsys):
        monkeypatch.setenv("POLYOPF_CASES", str(corpus_copy))
        main(["cases"])
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == f"Corpus: {corpus_copy}"
        assert lines[1].split()[:3] == ["case2", "2", "buses"]

    def test_dump_cliques(self, capsys):
        assert main(["dump-cliques", "WB2", "--names"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("0 parent=-1 size=4: ")
        assert "ReV[1]" in out

    def test_export_sdpa(self, tmp_path, capsys):
        path = tmp_path / "wb2.dat-s"
        assert main(["export-sdpa", "WB2", "--set", "V2max=1.022", "-o", str(path)]) == 0
        assert capsys.readouterr().out.startswith("Wrote ")
        assert solve(read_sdpa(path.read_text())).bound == pytest.approx(888.08, rel=1e-3)

    def test_export_to_stdout(self, capsys):
        main(["export-sdpa", "WB2"])
        assert capsys.readouterr().out.startswith('"')
