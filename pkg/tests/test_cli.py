"""Tests for the kernelfix command-line interface."""

import json
from pathlib import Path
from typing import Any

import pytest

from kernelfix.cli import EXIT_ERROR, EXIT_NO, EXIT_YES, main
from kernelfix.graph_core import are_isomorphic, cycle, parse_graph6


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    """Run every command without settings files or worker overrides."""
    monkeypatch.delenv("KERNELFIX_CONFIG", raising=False)
    monkeypatch.delenv("KERNELFIX_WORKERS", raising=False)
    monkeypatch.chdir(tmp_path)


def run(capsys: pytest.CaptureFixture[str], *argv: str) -> tuple[int, Any]:
    code = main(list(argv))
    out = capsys.readouterr().out.strip().splitlines()
    return code, json.loads(out[-1]) if out else None


class TestTrajectory:
    """Test the trajectory command."""

    def test_path_abc(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test abc on P3 from 111."""
        code, out = run(capsys, "trajectory", "--graph", "P3", "--word", "0 1 2", "--config", "111")
        assert code == EXIT_YES
        assert out == {"x": "111", "y": "001"}

    def test_path_acb(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test acb on P3 from 111."""
        code, out = run(capsys, "trajectory", "--graph", "P3", "--word", "0 2 1", "--config", "111")
        assert out["y"] == "010"

    def test_full_trajectory(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that --full lists every state."""
        code, out = run(
            capsys, "trajectory", "--graph", "P3", "--word", "0 1 2", "--config", "111", "--full"
        )
        assert out["trajectory"] == ["111", "011", "001", "001"]

    def test_text_format(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test plain-text output."""
        code = main(
            ["--format", "text", "trajectory", "--graph", "P3", "--word", "0 1 2", "--config", "111"]
        )
        assert code == EXIT_YES
        assert capsys.readouterr().out.strip() == "001"


class TestCheckWord:
    """Test the check-word command."""

    def test_fixes_counterexample(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that abc fails on P3 with the least counterexample 011."""
        code, out = run(capsys, "check-word", "--graph", "P3", "--fixes", "--word", "0 1 2")
        assert code == EXIT_NO
        assert out["answer"] is False
        assert out["witness"]["config"] == "011"

    def test_fixes(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that acb fixes P3."""
        code, out = run(capsys, "check-word", "--graph", "P3", "--fixes", "--word", "0 2 1")
        assert code == EXIT_YES
        assert out == {"answer": True, "property": "fixes", "witness": None}

    def test_prefix_edge_witness(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the uncovered-edge witness."""
        code, out = run(capsys, "check-word", "--graph", "P3", "--prefixes", "--word", "0")
        assert code == EXIT_NO
        assert out["witness"]["edge"] == [1, 2]

    def test_suffix_witness(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the dominion witness of a suffix failure."""
        code, out = run(capsys, "check-word", "--graph", "P3", "--suffixes", "--word", "1")
        assert code == EXIT_NO
        assert out["witness"]["v"] == 0
        assert out["witness"]["I"] == [2]


class TestCheckSet:
    """Test the check-set command."""

    def test_fixing_set_dominion(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that {b} of P3 is refuted by a dominion witness."""
        code, out = run(capsys, "check-set", "--graph", "P3", "--fixing-set", "--set", "1")
        assert code == EXIT_NO
        assert out["witness"] == {"I": [2], "kind": "dominion", "v": 0}

    def test_fixing_set(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that {a, c} of P3 is a fixing set."""
        code, out = run(capsys, "check-set", "--graph", "P3", "--fixing-set", "--set", "0 2")
        assert code == EXIT_YES

    def test_empty_colony(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that the empty set is a colony."""
        code, out = run(capsys, "check-set", "--graph", "C5", "--colony", "--set", "")
        assert code == EXIT_YES
        assert out["witness"] == {"I": [], "kind": "colony"}

    def test_cover(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the cover check with an uncovered edge."""
        code, out = run(capsys, "check-set", "--graph", "C5", "--cover", "--set", "0 2")
        assert code == EXIT_NO
        assert out["witness"] == {"edge": [3, 4], "kind": "edge"}

    def test_dominion(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the dominion check on the pentagon."""
        code, out = run(capsys, "check-set", "--graph", "C5", "--dominion", "--set", "0 1")
        assert code == EXIT_YES
        assert out["witness"] == {"I": [0], "kind": "dominion", "v": 2}


class TestCheckSplit:
    """Test the check-split command."""

    def test_split(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test acb on P3 split at a = 2, b = 1."""
        code, out = run(
            capsys, "check-split", "--graph", "P3", "--word", "0 2 1", "--a", "2", "--b", "1"
        )
        assert code == EXIT_YES
        assert out["answer"] is True


class TestShortestWord:
    """Test the shortest-word command."""

    def test_path(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that P3 is fixed by a word of length two."""
        code, out = run(capsys, "shortest-word", "--graph", "P3", "--max-len", "4")
        assert code == EXIT_YES
        assert out["word"] == [0, 2]
        assert out["status"] == "found"

    def test_none(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that a too-small bound exits with 1."""
        code, out = run(capsys, "shortest-word", "--graph", "P3", "--max-len", "1")
        assert code == EXIT_NO
        assert out["status"] == "none"


class TestPermis:
    """Test the permis subcommands."""

    def test_find(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test a permis search that succeeds."""
        code, out = run(capsys, "permis", "find", "--graph", "P3")
        assert code == EXIT_YES
        assert out["permis"] == [0, 2, 1]

    def test_find_heptagon(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that C7 has no permis."""
        code, out = run(capsys, "permis", "find", "--graph", "C7")
        assert code == EXIT_NO
        assert out["answer"] == "not_exists"
        assert out["certificate"] == {"kind": "exhaustive"}

    def test_find_above_limit(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that large graphs are refused with exit code 2."""
        code, out = run(capsys, "permis", "find", "--graph", "C11")
        assert code == EXIT_ERROR
        assert out["error_type"] == "BoundExceededError"

    def test_construct_auto(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the automatic route on a path."""
        code, out = run(capsys, "permis", "construct", "--graph", "P4")
        assert code == EXIT_YES
        assert out["route"] == "comparability"

    def test_construct_composition(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the composition route from shorthands."""
        code, out = run(
            capsys,
            "permis",
            "construct",
            "--route",
            "composition",
            "--outer",
            "K2",
            "--part",
            "C5",
            "--part",
            "P3",
        )
        assert code == EXIT_YES
        assert sorted(out["permis"]) == list(range(8))

    def test_construct_no_route(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that the simplicial route declines C5."""
        code, out = run(capsys, "permis", "construct", "--graph", "C5", "--route", "simplicial")
        assert code == EXIT_NO
        assert out["permis"] is None

    @pytest.mark.slow
    def test_certify_wheel(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the tethered certificate of the eight-vertex wheel."""
        code, out = run(capsys, "permis", "certify-none", "--graph", "W8")
        assert code == EXIT_YES
        assert out["certificate"]["S"] == list(range(7))

    def test_census_and_resume(self, capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
        """Test the census report and a resumed run that adds nothing."""
        report = tmp_path / "census.jsonl"
        resume = tmp_path / "last.txt"
        args = ["permis", "census", "--max-n", "4", "--out", str(report), "--resume", str(resume)]
        code, out = run(capsys, *args)
        assert code == EXIT_YES
        assert out["counts"] == {"1": 1, "2": 2, "3": 4, "4": 11}
        assert out["without_permis"] == []
        assert len(report.read_text().splitlines()) == 18
        last = json.loads(report.read_text().splitlines()[-1])
        assert resume.read_text().strip() == last["graph6"]

        code, again = run(capsys, *args)
        assert again == out
        assert len(report.read_text().splitlines()) == 18

    @pytest.mark.slow
    def test_census_seven(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that only C7 lacks a permis among seven-vertex graphs."""
        code, out = run(capsys, "permis", "census", "--max-n", "7")
        assert out["counts"]["7"] == 1044
        assert len(out["without_permis"]) == 1
        assert are_isomorphic(parse_graph6(out["without_permis"][0]), cycle(7))


class TestReduce:
    """Test the reduce and sweep commands."""

    def test_setcover_example(self, capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
        """Test the worked Set Cover example with preservation check."""
        source = tmp_path / "cover.json"
        target = tmp_path / "gadget.json"
        source.write_text(json.dumps({"n": 4, "subsets": [[], [0], [1, 2], [3]], "k": 2}))
        code, out = run(
            capsys, "reduce", "setcover-colony", "--in", str(source), "--out", str(target), "--verify"
        )
        assert code == EXIT_YES
        assert out["n"] == 12
        assert out["report"]["source"] is False
        assert out["report"]["target"] is False
        assert json.loads(target.read_text())["target"] == [0, 1, 2, 3]

    def test_malformed_json(self, capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
        """Test that a broken input file exits with 2 and an error object."""
        source = tmp_path / "broken.json"
        source.write_text('{"n": 4,')
        code, out = run(
            capsys, "reduce", "setcover-colony", "--in", str(source), "--out", str(tmp_path / "o")
        )
        assert code == EXIT_ERROR
        assert out["status"] == "error"
        assert out["error_type"] == "JSONDecodeError"

    def test_invalid_instance(self, capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
        """Test that an element out of range is a validation error."""
        source = tmp_path / "bad.json"
        source.write_text(json.dumps({"n": 1, "subsets": [[3]], "k": 1}))
        code, out = run(
            capsys, "reduce", "setcover-colony", "--in", str(source), "--out", str(tmp_path / "o")
        )
        assert code == EXIT_ERROR
        assert out["error_type"] == "ValidationError"

    def test_sweep(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test a small colony-dominion sweep."""
        code, out = run(capsys, "sweep", "colony-dominion", "--max-n", "3")
        assert code == EXIT_YES
        assert out["failures"] == []
        assert out["total"] == 1 * 2 + 2 * 4 + 4 * 8


class TestErrors:
    """Test the shared error surface."""

    def test_bad_graph(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that an unparsable graph exits with 2."""
        code, out = run(capsys, "permis", "find", "--graph", "not-a-graph")
        assert code == EXIT_ERROR
        assert out["error_type"] == "GraphError"

    def test_missing_graph(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that omitting the graph is a validation error."""
        code, out = run(capsys, "permis", "find")
        assert code == EXIT_ERROR
        assert out["error_type"] == "ValidationError"

    def test_both_graph_sources(self, tmp_path: Path) -> None:
        """Test that --graph and --graph-file are mutually exclusive."""
        with pytest.raises(SystemExit) as exc:
            main(["permis", "find", "--graph", "P3", "--graph-file", str(tmp_path / "g")])
        assert exc.value.code == 2

    def test_graph_file(self, capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
        """Test reading the graph from a file."""
        graph_file = tmp_path / "p3.json"
        graph_file.write_text(json.dumps({"n": 3, "edges": [[0, 1], [1, 2]]}))
        code, out = run(capsys, "permis", "find", "--graph-file", str(graph_file))
        assert code == EXIT_YES

    def test_deterministic_output(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that two deterministic runs print the same bytes."""
        argv = [
            "--deterministic",
            "--workers",
            "4",
            "check-word",
            "--graph",
            "C5",
            "--fixes",
            "--word",
            "0 1 2 3 4",
        ]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        assert capsys.readouterr().out == first

    def test_enumerate(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test graph enumeration."""
        code, out = run(capsys, "enumerate", "--n", "4")
        assert code == EXIT_YES
        assert out["count"] == 11

    def test_version(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the version flag."""
        with pytest.raises(SystemExit):
            main(["--version"])
        assert "kernelfix" in capsys.readouterr().out
