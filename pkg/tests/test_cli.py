"""Command-line client: exit codes, file plumbing, campaign end to end.

`main()` is invoked directly with argv lists; subcommands run against the
in-process service instance, exactly as users without a daemon get.
"""

import json

import pytest

from difffuzz.cli import (
    EXIT_EQUIVALENT,
    EXIT_EXCLUDED,
    EXIT_HARNESS_ERROR,
    EXIT_NON_EQUIVALENT,
    main,
)
from difffuzz.corpus import mini_corpus_paths

INT_SCHEMA_OBJ = {"params": [{"name": "x", "kind": "int", "bounds": [-30, 30]}]}


@pytest.fixture
def schema_file(tmp_path):
    path = tmp_path / "schema.json"
    path.write_text(json.dumps(INT_SCHEMA_OBJ), encoding="utf-8")
    return str(path)


def source_file(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestGenInputs:
    def test_writes_jsonl_to_stdout(self, schema_file, capsys):
        code = main(["gen-inputs", "--schema", schema_file, "--seed", "3",
                     "--n", "5"])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 5
        first = json.loads(lines[0])
        assert first["index"] == 0
        assert -30 <= first["values"][0] <= 30

    def test_writes_jsonl_to_file(self, schema_file, tmp_path, capsys):
        out = tmp_path / "inputs.jsonl"
        code = main(["gen-inputs", "--schema", schema_file, "--n", "4",
                     "--out", str(out)])
        assert code == 0
        assert len(out.read_text(encoding="utf-8").strip().splitlines()) == 4

    def test_same_seed_same_bytes(self, schema_file, capsys):
        main(["gen-inputs", "--schema", schema_file, "--seed", "9", "--n", "6"])
        first = capsys.readouterr().out
        main(["gen-inputs", "--schema", schema_file, "--seed", "9", "--n", "6"])
        assert capsys.readouterr().out == first

    def test_missing_schema_file_exits_3(self, capsys):
        code = main(["gen-inputs", "--schema", "/nonexistent/schema.json"])
        assert code == EXIT_HARNESS_ERROR
        assert "error" in capsys.readouterr().err


class TestCheckExitCodes:
    def check(self, tmp_path, schema_file, original, refactored, *extra):
        return main([
            "check",
            "--original", source_file(tmp_path, "original.py", original),
            "--refactored", source_file(tmp_path, "refactored.py", refactored),
            "--schema", schema_file, "--entry-point", "f", "--n", "25",
            *extra])

    def test_equivalent_exits_0(self, tmp_path, schema_file, capsys):
        code = self.check(tmp_path, schema_file,
                          "def f(x):\n    return x + x\n",
                          "def f(x):\n    return 2 * x\n")
        assert code == EXIT_EQUIVALENT
        verdict = json.loads(capsys.readouterr().out)
        assert verdict["status"] == "Equivalent"

    def test_nonequivalent_exits_1(self, tmp_path, schema_file, capsys):
        code = self.check(tmp_path, schema_file,
                          "def f(x):\n    return abs(x)\n",
                          "def f(x):\n    return x\n",
                          "--mode", "full_scan")
        assert code == EXIT_NON_EQUIVALENT
        verdict = json.loads(capsys.readouterr().out)
        assert verdict["status"] == "NonEquivalent"
        assert verdict["witness"] is not None

    def test_excluded_exits_2(self, tmp_path, schema_file, capsys):
        code = self.check(tmp_path, schema_file,
                          "def f(x):\n    return x\n",
                          "def f(:\n")
        assert code == EXIT_EXCLUDED
        assert json.loads(capsys.readouterr().out)["status"] == \
            "ExcludedNonExecutable"

    def test_harness_error_exits_3(self, tmp_path, schema_file, capsys):
        code = self.check(tmp_path, schema_file,
                          "def f(:\n",
                          "def f(x):\n    return x\n")
        assert code == EXIT_HARNESS_ERROR
        assert "error" in capsys.readouterr().err


class TestCampaignCommand:
    def test_mini_corpus_end_to_end(self, tmp_path, capsys):
        problems_path, refactorings_path = mini_corpus_paths()
        out_dir = tmp_path / "out"
        code = main([
            "campaign", "--corpus", problems_path,
            "--refactorings", refactorings_path,
            "--seed", "0", "--n-function", "40", "--n-program", "20",
            "--timeout", "0.2", "--out-dir", str(out_dir)])
        assert code == 0
        printed = capsys.readouterr().out
        assert "Divergence" in printed
        report = json.loads((out_dir / "report.json").read_text(encoding="utf-8"))
        assert report["exclusions"] == {"timeout": 1}
        assert report["table2"]["overall"][0]["pct_noneq"] == 26.32

    def test_failures_exit_3(self, tmp_path, capsys):
        corpus = tmp_path / "problems.jsonl"
        corpus.write_text(json.dumps({
            "problem_id": "bad", "dataset": "adhoc", "level": "function",
            "source": "def f(:\n", "entry_point": "f",
            "schema": INT_SCHEMA_OBJ}) + "\n", encoding="utf-8")
        refactorings = tmp_path / "refactorings.jsonl"
        refactorings.write_text(json.dumps({
            "problem_id": "bad", "model": "m", "refactor_type": "optimization",
            "source": "def f(x):\n    return x\n"}) + "\n", encoding="utf-8")
        code = main([
            "campaign", "--corpus", str(corpus),
            "--refactorings", str(refactorings),
            "--n-function", "5", "--out-dir", str(tmp_path / "out")])
        assert code == EXIT_HARNESS_ERROR
        assert "harness errors" in capsys.readouterr().err

    def test_duplicate_ids_across_corpus_files(self, tmp_path, capsys):
        problems_path, refactorings_path = mini_corpus_paths()
        code = main([
            "campaign", "--corpus", problems_path, "--corpus", problems_path,
            "--refactorings", refactorings_path,
            "--out-dir", str(tmp_path / "out")])
        assert code == EXIT_HARNESS_ERROR
        assert "duplicate" in capsys.readouterr().err


class TestReportCommand:
    @pytest.fixture
    def report_path(self, tmp_path, mini_problems, mini_refactorings):
        from difffuzz.campaign import (CampaignConfig, run_campaign,
                                       write_report)
        from difffuzz.execution import ExecPolicy, InProcessExecutor

        report = run_campaign(
            mini_problems, mini_refactorings, InProcessExecutor(),
            cfg=CampaignConfig(seed=0, n_function=10, n_program=10),
            policy=ExecPolicy(per_run_timeout=0.2))
        return write_report(report, str(tmp_path / "report"))[0]

    def test_text_to_stdout(self, report_path, capsys):
        assert main(["report", "--report", report_path]) == 0
        assert "Non-equivalence" in capsys.readouterr().out

    def test_csv_to_directory(self, report_path, tmp_path, capsys):
        out_dir = tmp_path / "csv"
        code = main(["report", "--report", report_path, "--format", "csv",
                     "--out-dir", str(out_dir)])
        assert code == 0
        assert sorted(p.name for p in out_dir.iterdir()) == \
            ["table2.csv", "table3.csv"]

    def test_missing_report_exits_3(self, capsys):
        code = main(["report", "--report", "/nonexistent/report.json"])
        assert code == EXIT_HARNESS_ERROR
