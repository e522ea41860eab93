"""Campaign orchestration: aggregate tables, exclusion accounting, report
determinism. The bundled mini corpus has hand-verified ground truth, so every
aggregate number here is frozen."""

import json

import pytest

from difffuzz.campaign import (
    CampaignConfig,
    CampaignReport,
    aggregate_table2,
    build_header,
    count_divergence,
    count_exclusions,
    evaluate_pairs,
    read_report,
    render_table2_csv,
    render_table3_csv,
    render_text,
    report_to_json,
    run_campaign,
    write_report,
)
from difffuzz.compare import CompareConfig
from difffuzz.corpus import RefactoringRecord, parse_problem
from difffuzz.execution import ExecPolicy, InProcessExecutor
from difffuzz.llm import GenerationParams

MINI_CFG = CampaignConfig(seed=0, n_function=40, n_program=20)
MINI_POLICY = ExecPolicy(per_run_timeout=0.2)


@pytest.fixture(scope="module")
def mini_report(mini_problems, mini_refactorings):
    return run_campaign(mini_problems, mini_refactorings, InProcessExecutor(),
                        cfg=MINI_CFG, policy=MINI_POLICY)


def pair_of(report, problem_id, refactor_type):
    return next(p for p in report.pairs
                if p["problem_id"] == problem_id
                and p["refactor_type"] == refactor_type)


# ---------------------------------------------------------------------------
# frozen aggregates over the bundled corpus
# ---------------------------------------------------------------------------

class TestMiniCorpusAggregates:
    def test_every_cell_evaluated(self, mini_report):
        assert len(mini_report.pairs) == 20
        assert sum(row["n_attempted"] for row in mini_report.table2_cells) == 20

    def test_table2_cells(self, mini_report):
        assert list(mini_report.table2_cells) == [
            {"model": "mock-model", "refactor_type": "optimization",
             "dataset": "minifunc", "n_attempted": 7, "n_analyzed": 7,
             "n_noneq": 2, "pct_noneq": 28.57},
            {"model": "mock-model", "refactor_type": "optimization",
             "dataset": "miniprog", "n_attempted": 3, "n_analyzed": 2,
             "n_noneq": 1, "pct_noneq": 50.0},
            {"model": "mock-model", "refactor_type": "simplification",
             "dataset": "minifunc", "n_attempted": 7, "n_analyzed": 7,
             "n_noneq": 2, "pct_noneq": 28.57},
            {"model": "mock-model", "refactor_type": "simplification",
             "dataset": "miniprog", "n_attempted": 3, "n_analyzed": 3,
             "n_noneq": 0, "pct_noneq": 0.0},
        ]

    def test_table2_overall(self, mini_report):
        assert list(mini_report.table2_overall) == [
            {"model": "mock-model", "n_analyzed": 19, "n_noneq": 5,
             "pct_noneq": 26.32},
        ]

    def test_table3_divergence(self, mini_report):
        assert list(mini_report.table3) == [
            {"dataset": "minifunc", "n_total_analyzed": 14, "n_noneq": 4,
             "n_noneq_with_corr1": 2, "pct_of_noneq": 50.0},
            {"dataset": "miniprog", "n_total_analyzed": 5, "n_noneq": 1,
             "n_noneq_with_corr1": 1, "pct_of_noneq": 100.0},
        ]

    def test_exclusions(self, mini_report):
        assert mini_report.exclusions == {"timeout": 1}

    def test_analyzed_plus_excluded_covers_attempted(self, mini_report):
        analyzed = sum(row["n_analyzed"] for row in mini_report.table2_cells)
        excluded = sum(mini_report.exclusions.values())
        assert analyzed + excluded == 20
        assert not mini_report.failures

    def test_header_records_the_run_parameters(self, mini_report):
        header = mini_report.header
        assert header["seed"] == 0
        assert header["n_function"] == 40 and header["n_program"] == 20
        assert header["per_run_timeout"] == 0.2
        assert header["float_rel_tol"] == 1e-6
        assert header["program_output_normalization"] == "trim"
        assert header["set_serialization"] == "sorted"
        assert "generation_params" not in header


class TestMiniCorpusSpotChecks:
    """Individual cells whose ground truth was established independently."""

    def test_identity_preserving_simplification(self, mini_report):
        pair = pair_of(mini_report, "p01", "simplification")
        assert pair["verdict"]["status"] == "Equivalent"
        assert pair["suite"]["corr_bit"] == 1

    def test_sign_dropping_optimization_diverges(self, mini_report):
        """Absolute value rewritten to the identity: wrong on negatives, but
        the dataset tests only probe non-negatives."""
        pair = pair_of(mini_report, "p01", "optimization")
        assert pair["verdict"]["status"] == "NonEquivalent"
        assert pair["verdict"]["similarity"] == 0.5
        assert pair["verdict"]["witness"]["index"] is not None
        assert pair["suite"]["corr_bit"] == 1

    def test_caught_by_tests_case(self, mini_report):
        pair = pair_of(mini_report, "p02", "simplification")
        assert pair["verdict"]["status"] == "NonEquivalent"
        assert pair["suite"]["corr_bit"] == 0

    def test_charset_shrinking_rewrite(self, mini_report):
        pair = pair_of(mini_report, "p05", "optimization")
        assert pair["verdict"]["status"] == "NonEquivalent"
        assert pair["suite"]["corr_bit"] == 1

    def test_hanging_rewrite_is_excluded(self, mini_report):
        pair = pair_of(mini_report, "p10", "optimization")
        assert pair["verdict"]["status"] == "ExcludedTimeout"
        assert pair["verdict"]["eq_bit"] is None


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------

class TestDeterminism:
    def test_repeated_runs_are_byte_identical(self, mini_problems,
                                              mini_refactorings, mini_report):
        again = run_campaign(mini_problems, mini_refactorings,
                             InProcessExecutor(), cfg=MINI_CFG,
                             policy=MINI_POLICY)
        assert report_to_json(again) == report_to_json(mini_report)

    def test_worker_count_changes_nothing(self, mini_problems,
                                          mini_refactorings, mini_report):
        pooled_cfg = CampaignConfig(seed=0, n_function=40, n_program=20,
                                    max_workers=4)
        pooled = run_campaign(mini_problems, mini_refactorings,
                              InProcessExecutor(), cfg=pooled_cfg,
                              policy=MINI_POLICY)
        baseline = json.loads(report_to_json(mini_report))
        got = json.loads(report_to_json(pooled))
        baseline["header"].pop("max_workers", None)
        got["header"].pop("max_workers", None)
        assert got == baseline

    def test_serialized_report_carries_no_timings(self, mini_report):
        assert "wall_time" not in report_to_json(mini_report)

    def test_json_is_sorted_and_newline_terminated(self, mini_report):
        text = report_to_json(mini_report)
        assert text.endswith("\n")
        assert json.dumps(json.loads(text), sort_keys=True, indent=2,
                          ensure_ascii=False) + "\n" == text


# ---------------------------------------------------------------------------
# edge accounting on ad-hoc corpora
# ---------------------------------------------------------------------------

def make_problem(pid, source="def f(x):\n    return x + 1\n", dataset="adhoc",
                 tests=()):
    return parse_problem({
        "problem_id": pid, "dataset": dataset, "level": "function",
        "source": source, "entry_point": "f",
        "schema": {"params": [{"name": "x", "kind": "int", "bounds": [-20, 20]}]},
        "tests": [dict(t) for t in tests],
    })


def make_record(pid, source, refactor_type="optimization", model="m1"):
    return RefactoringRecord(problem_id=pid, model=model,
                             refactor_type=refactor_type, source=source)


SMALL_CFG = CampaignConfig(seed=0, n_function=10, n_program=10,
                           refactor_types=("optimization",))


class TestEdgeAccounting:
    def test_missing_refactorings_counted(self, inprocess):
        problems = [make_problem("q1"), make_problem("q2")]
        records = [make_record("q1", "def f(x):\n    return 1 + x\n")]
        report = run_campaign(problems, records, inprocess, cfg=SMALL_CFG)
        assert report.exclusions == {"missing": 1}
        cell = report.table2_cells[0]
        assert cell["n_attempted"] == 2 and cell["n_analyzed"] == 1

    def test_unparseable_candidate_excluded_not_failed(self, inprocess):
        problems = [make_problem("q1")]
        records = [make_record("q1", "def f(x:\n")]
        report = run_campaign(problems, records, inprocess, cfg=SMALL_CFG)
        assert report.exclusions == {"non_executable": 1}
        cell = report.table2_cells[0]
        assert cell["n_analyzed"] == 0
        assert cell["pct_noneq"] is None
        assert not report.failures

    def test_broken_original_is_a_failure_cell(self, inprocess):
        """Harness faults abort the cell: reported under failures, absent
        from every aggregate denominator."""
        problems = [make_problem("ok"), make_problem("broken", source="def f(:\n")]
        records = [make_record("ok", "def f(x):\n    return x + 1\n"),
                   make_record("broken", "def f(x):\n    return x\n")]
        report = run_campaign(problems, records, inprocess, cfg=SMALL_CFG)
        assert len(report.failures) == 1
        assert report.failures[0]["problem_id"] == "broken"
        assert "HarnessError" in report.failures[0]["error"]
        assert sum(r["n_attempted"] for r in report.table2_cells) == 1
        assert report.exclusions == {}

    def test_empty_noneq_denominator_in_divergence(self, inprocess):
        problems = [make_problem("q1")]
        records = [make_record("q1", "def f(x):\n    return x + 1\n")]
        report = run_campaign(problems, records, inprocess, cfg=SMALL_CFG)
        row = report.table3[0]
        assert row["n_noneq"] == 0 and row["pct_of_noneq"] is None

    def test_models_config_restricts_the_grid(self, inprocess):
        problems = [make_problem("q1")]
        records = [make_record("q1", "def f(x):\n    return x + 1\n", model="m1"),
                   make_record("q1", "def f(x):\n    return x + 1\n", model="m2")]
        cfg = CampaignConfig(seed=0, n_function=10,
                             refactor_types=("optimization",), models=("m2",))
        results = evaluate_pairs(problems, records, inprocess, cfg)
        assert [r.model for r in results] == ["m2"]

    def test_rounding_follows_the_example_convention(self):
        """3 non-equivalent out of 5 analyzed renders as 60.0 after two-place
        rounding; 2 of 7 renders as 28.57."""
        from difffuzz.campaign import _pct
        assert _pct(3, 5) == 60.0
        assert _pct(2, 7) == 28.57
        assert _pct(1, 3) == 33.33
        assert _pct(0, 4) == 0.0
        assert _pct(0, 0) is None


# ---------------------------------------------------------------------------
# serialization and rendering
# ---------------------------------------------------------------------------

class TestReportFiles:
    def test_structured_round_trip(self, mini_report, tmp_path):
        paths = write_report(mini_report, str(tmp_path))
        assert [p.split("/")[-1] for p in paths] == ["report.json"]
        loaded = read_report(paths[0])
        assert loaded == mini_report

    def test_csv_rendering(self, mini_report, tmp_path):
        paths = write_report(mini_report, str(tmp_path), format="csv")
        names = sorted(p.split("/")[-1] for p in paths)
        assert names == ["table2.csv", "table3.csv"]
        table2 = render_table2_csv(mini_report).splitlines()
        assert table2[0] == \
            "model,refactor_type,dataset,n_attempted,n_analyzed,n_noneq,pct_noneq"
        assert "mock-model,optimization,minifunc,7,7,2,28.57" in table2
        assert "mock-model,overall,overall,,19,5,26.32" in table2
        table3 = render_table3_csv(mini_report).splitlines()
        assert table3[1] == "minifunc,14,4,2,50.0"

    def test_unknown_format_rejected(self, mini_report, tmp_path):
        with pytest.raises(ValueError):
            write_report(mini_report, str(tmp_path), format="xml")

    def test_text_rendering_mentions_every_section(self, mini_report):
        text = render_text(mini_report)
        assert "Non-equivalence by model / type / dataset" in text
        assert "Divergence" in text
        assert "timeout=1" in text
        assert "28.57%" in text

    def test_from_object_tolerates_missing_failures(self, mini_report):
        obj = mini_report.to_object()
        del obj["failures"]
        assert CampaignReport.from_object(obj).failures == ()

    def test_header_with_generation_params(self):
        header = build_header(CampaignConfig(), ExecPolicy(), CompareConfig(),
                              GenerationParams(model="m", temperature=0.3))
        assert header["generation_params"] == {
            "model": "m", "temperature": 0.3, "max_tokens": 2048, "seed": 0}


# ---------------------------------------------------------------------------
# aggregation helpers on synthetic results
# ---------------------------------------------------------------------------

class TestAggregationHelpers:
    def test_counts_from_pair_results(self, inprocess):
        problems = [make_problem("q1"), make_problem("q2")]
        records = [
            make_record("q1", "def f(x):\n    return x + 1\n"),
            make_record("q2", "def f(x):\n    return x + 2\n"),  # wrong
        ]
        results = evaluate_pairs(problems, records, inprocess, SMALL_CFG)
        cells, overall = aggregate_table2(results)
        assert cells[0]["n_analyzed"] == 2 and cells[0]["n_noneq"] == 1
        assert overall[0]["pct_noneq"] == 50.0
        assert count_exclusions(results) == {}
        divergence = count_divergence(results)
        assert divergence[0]["n_noneq"] == 1
        # no tests in these problems: an empty suite passes, so the bad
        # rewrite counts as divergent
        assert divergence[0]["n_noneq_with_corr1"] == 1
