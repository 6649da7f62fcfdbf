from __future__ import annotations

import csv
import io
import json
import shlex
import sys
from pathlib import Path

import pytest

from deepcite import cli
from deepcite.models import Dimension, document_to_json, read_document
from tests.utils import FixedJudge, write_recording

REPORT = """# Solar

Solar output doubled in 2023 [1]. Panel prices fell sharply [2].

[1]: https://energy.example/solar
[2]: https://energy.example/prices
"""


@pytest.fixture
def workspace(tmp_path: Path) -> Path:
    (tmp_path / "report.md").write_text(REPORT, encoding="utf-8")
    replay = tmp_path / "replay"
    write_recording(replay, "https://energy.example/solar", body="<p>Solar output doubled in 2023 across Europe.</p>")
    write_recording(replay, "https://energy.example/prices", status=404)
    return tmp_path


def _main(workspace: Path, *args: str) -> int:
    return cli.main(["--workdir", str(workspace), "--replay-dir", "replay", *args])


def test_help_exits_cleanly(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli.main(["--help"]) == cli.EXIT_OK
    assert "evaluate" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [[], ["evaluate"], ["report", "--bogus"], ["frobnicate"]])
def test_bad_arguments_are_usage_errors(argv: list[str]) -> None:
    assert cli.main(argv) == cli.EXIT_USAGE


def test_parse_writes_the_document(workspace: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert cli.main(["--workdir", str(workspace), "parse", "report.md"]) == cli.EXIT_OK

    document = read_document(workspace / "report.document.json")
    assert [citation.url for citation in document.citations] == ["https://energy.example/solar", "https://energy.example/prices"]
    assert document.evals == ()
    assert "2 citations, 2 attributions, 2 citation-claim pairs" in capsys.readouterr().out


def test_parse_missing_report(workspace: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert cli.main(["--workdir", str(workspace), "parse", "absent.md"]) == cli.EXIT_USAGE
    assert "absent.md" in capsys.readouterr().err


def test_parse_output_that_cannot_be_written(workspace: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code = cli.main(["--workdir", str(workspace), "parse", "report.md", "--out", "report.md/x.json"])

    assert code == cli.EXIT_USAGE
    assert "deepcite parse:" in capsys.readouterr().err


def test_evaluate_missing_document(workspace: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert _main(workspace, "evaluate", "--doc", "missing.json") == cli.EXIT_USAGE
    assert "missing.json" in capsys.readouterr().err


def test_report_over_a_run_with_a_deleted_document(workspace: Path, capsys: pytest.CaptureFixture[str]) -> None:
    _main(workspace, "--run-id", "pruned", "evaluate", "--doc", "report.md")
    (workspace / "runs" / "pruned" / "report.document.json").unlink()
    capsys.readouterr()

    assert cli.main(["--workdir", str(workspace), "report"]) == cli.EXIT_USAGE
    assert "report.document.json" in capsys.readouterr().err


def test_evaluate_writes_a_run_directory(workspace: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert _main(workspace, "--run-id", "smoke", "evaluate", "--doc", "report.md") == cli.EXIT_OK

    run_dir = workspace / "runs" / "smoke"
    assert {path.name for path in run_dir.iterdir()} == {
        "manifest.json",
        "events.jsonl",
        "report.document.json",
        "report.json",
        "report.md",
        "report.csv",
    }
    document = read_document(run_dir / "report.document.json")
    links = {result.citation_id: result for result in document.evals if result.dimension is Dimension.LINK_WORKS}
    assert (links[1].score, links[2].score, links[2].fetch_category) == (1, 0, "http_error(404)")
    out = capsys.readouterr().out
    assert "| smoke | 100.0% | 50.0% |" in out
    manifest = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["config"]["fetcher"]["backend"] == "replay"


def test_evaluate_is_reproducible_over_a_replay_cache(workspace: Path) -> None:
    document = workspace / "runs" / "again" / "report.document.json"

    assert _main(workspace, "--run-id", "again", "evaluate", "--doc", "report.md") == cli.EXIT_OK
    first = document.read_bytes()
    assert _main(workspace, "--run-id", "again", "evaluate", "--doc", "report.md") == cli.EXIT_OK

    assert document.read_bytes() == first
    assert len((workspace / "runs" / "again" / "events.jsonl").read_text(encoding="utf-8").splitlines()) == 9


def test_evaluate_accepts_parsed_documents(workspace: Path) -> None:
    assert cli.main(["--workdir", str(workspace), "parse", "report.md"]) == cli.EXIT_OK
    assert _main(workspace, "--run-id", "from-md", "evaluate", "--doc", "report.md") == cli.EXIT_OK
    assert _main(workspace, "--run-id", "from-json", "evaluate", "--doc", "report.document.json") == cli.EXIT_OK

    from_md = read_document(workspace / "runs" / "from-md" / "report.document.json")
    from_json = read_document(workspace / "runs" / "from-json" / "report.document.json")
    assert document_to_json(from_md) == document_to_json(from_json)


def test_evaluate_from_a_manifest(workspace: Path) -> None:
    (workspace / "queries.json").write_text(
        json.dumps([{"query_id": "solar", "query": "How is solar doing?", "report_path": "report.md"}, {"query_id": "gone"}]),
        encoding="utf-8",
    )

    assert _main(workspace, "--run-id", "batch", "evaluate", "--manifest", "queries.json", "--reports-dir", ".") == cli.EXIT_OK

    manifest = json.loads((workspace / "runs" / "batch" / "manifest.json").read_text(encoding="utf-8"))
    assert [(entry["query_id"], entry["success"]) for entry in manifest["records"]] == [("solar", True), ("gone", False)]


def test_dimension_selection(workspace: Path) -> None:
    assert _main(workspace, "--run-id", "links", "evaluate", "--doc", "report.md", "--dims", "link") == cli.EXIT_OK

    document = read_document(workspace / "runs" / "links" / "report.document.json")
    assert {result.dimension for result in document.evals} == {Dimension.LINK_WORKS}


def test_unknown_dimensions_are_usage_errors(workspace: Path) -> None:
    assert _main(workspace, "evaluate", "--doc", "report.md", "--dims", "speed") == cli.EXIT_USAGE


def test_unreachable_judge_exits_with_three(workspace: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    (workspace / "deepcite.json").write_text(json.dumps({"judge": {"max_retries": 0}}), encoding="utf-8")
    monkeypatch.setattr(cli, "get_judge", lambda config: FixedJudge(unavailable=1000))

    code = _main(workspace, "--config", str(workspace / "deepcite.json"), "evaluate", "--doc", "report.md")

    assert code == cli.EXIT_JUDGE_UNAVAILABLE


def test_config_files_may_not_hold_secrets(workspace: Path) -> None:
    (workspace / "deepcite.json").write_text(json.dumps({"judge": {"api_key": "sk-1"}}), encoding="utf-8")

    assert _main(workspace, "--config", str(workspace / "deepcite.json"), "evaluate", "--doc", "report.md") == cli.EXIT_USAGE


def test_report_aggregates_runs(workspace: Path, capsys: pytest.CaptureFixture[str]) -> None:
    _main(workspace, "--run-id", "all-dims", "evaluate", "--doc", "report.md")
    _main(workspace, "--run-id", "links-only", "evaluate", "--doc", "report.md", "--dims", "link")
    capsys.readouterr()

    assert cli.main(["--workdir", str(workspace), "report", "--format", "csv"]) == cli.EXIT_OK

    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("label,budget,n_queries,n_success,success_rate,n_pairs")
    assert [line.split(",")[0] for line in lines[1:]] == ["all-dims", "links-only"]


def test_report_writes_to_a_file(workspace: Path) -> None:
    _main(workspace, "--run-id", "one", "evaluate", "--doc", "report.md")

    code = cli.main(["--workdir", str(workspace), "report", "--runs", "runs/one", "--format", "json", "--out", "out/table.json"])

    assert code == cli.EXIT_OK
    payload = json.loads((workspace / "out" / "table.json").read_text(encoding="utf-8"))
    assert [report["label"] for report in payload["reports"]] == ["one"]


def test_report_usage_errors(workspace: Path) -> None:
    assert cli.main(["--workdir", str(workspace), "report"]) == cli.EXIT_USAGE
    _main(workspace, "--run-id", "one", "evaluate", "--doc", "report.md")
    assert cli.main(["--workdir", str(workspace), "report", "--format", "xml"]) == cli.EXIT_USAGE


def test_ablate_runs_each_budget(workspace: Path, capsys: pytest.CaptureFixture[str]) -> None:
    (workspace / "queries.json").write_text(json.dumps([{"query_id": "report", "query": "Solar?"}]), encoding="utf-8")

    code = _main(workspace, "--run-id", "depth", "ablate", "--queries", "queries.json", "--reports-dir", ".", "--budgets", "10,2")

    assert code == cli.EXIT_OK
    runs = workspace / "runs"
    assert (runs / "depth-b2" / "manifest.json").is_file()
    assert (runs / "depth-b10" / "manifest.json").is_file()
    assert (runs / "depth" / "ablation.csv").read_text(encoding="utf-8").startswith("budget,dimension,passed,failed,not_evaluated,rate\n2,")
    out = capsys.readouterr().out
    assert out.index("| 2 |") < out.index("| 10 |")
    assert "Depth degradation (2 -> 10)" in out


def test_ablate_needs_a_report_source(workspace: Path) -> None:
    (workspace / "queries.json").write_text(json.dumps([{"query_id": "report"}]), encoding="utf-8")

    assert _main(workspace, "ablate", "--queries", "queries.json", "--budgets", "2") == cli.EXIT_USAGE


def test_ablate_with_a_stub_agent_covers_the_default_budgets(workspace: Path) -> None:
    agent = workspace / "stub_agent.py"
    agent.write_text(
        "import pathlib, sys\nsys.stdout.write(pathlib.Path(sys.argv[1]).read_text(encoding='utf-8'))\n",
        encoding="utf-8",
    )
    (workspace / "queries.json").write_text(json.dumps([{"query_id": "solar", "query": "Solar?"}]), encoding="utf-8")
    command = f"{shlex.quote(sys.executable)} {shlex.quote(str(agent))} {shlex.quote(str(workspace / 'report.md'))} {{query}} {{budget}}"

    assert _main(workspace, "--run-id", "stub", "ablate", "--queries", "queries.json", "--agent-cmd", command) == cli.EXIT_OK

    rows = list(csv.DictReader(io.StringIO((workspace / "runs" / "stub" / "ablation.csv").read_text(encoding="utf-8"))))
    budgets = [int(row["budget"]) for row in rows if row["dimension"] == "link_works"]
    assert budgets == [2, 10, 30, 50, 70, 100, 150]
    assert {row["rate"] for row in rows if row["dimension"] == "link_works"} == {"50.0%"}
