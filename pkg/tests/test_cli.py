"""Command-line behavior: outputs, exit codes, determinism."""

import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from nexus.cli import main
from nexus.fixtures import make_themepark

CORE_LINE = (
    "X1 <- isa(X1,amusement_park), isa(X1,theme_park), located(X1,florida), "
    "part_of(florida,us), top(X1), top(amusement_park), top(florida), "
    "top(theme_park), top(us)."
)


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    target = tmp_path_factory.mktemp("themepark")
    return make_themepark().write_files(target)


@pytest.fixture()
def runner():
    return CliRunner()


def base_args(files, *extra):
    return [
        "--facts", str(files["facts"]),
        "--rules", str(files["rules"]),
        "--unit", "discovery_cove;epcot",
        *extra,
    ]


class TestFormulaCommands:
    def test_core_prints_the_minimized_formula(self, runner, files):
        result = runner.invoke(main, ["core", *base_args(files)])
        assert result.exit_code == 0
        assert result.output == CORE_LINE + "\n"

    def test_can_prints_the_full_formula(self, runner, files):
        result = runner.invoke(main, ["can", *base_args(files)])
        assert result.exit_code == 0
        line = result.output.strip()
        assert line.startswith("X1 <- ")
        assert line.count("(") == 13  # one per atom

    def test_full_selector_is_accepted(self, runner, files):
        result = runner.invoke(
            main, ["core", *base_args(files), "--selector", "full"]
        )
        assert result.exit_code == 0

    def test_runs_are_byte_identical(self, runner, files):
        outputs = {
            runner.invoke(main, ["core", *base_args(files)]).output
            for _ in range(3)
        }
        assert len(outputs) == 1


class TestEssCommand:
    def test_lists_members_one_per_line(self, runner, files):
        result = runner.invoke(main, ["ess", *base_args(files)])
        assert result.exit_code == 0
        assert result.output == "discovery_cove\nepcot\n"

    def test_membership_false(self, runner, files):
        result = runner.invoke(
            main, ["ess", *base_args(files), "--tuple", "pacific_park"]
        )
        assert result.exit_code == 0
        assert result.output == "false\n"

    def test_membership_of_a_unit_member_is_an_error(self, runner, files):
        result = runner.invoke(
            main, ["ess", *base_args(files), "--tuple", "epcot"]
        )
        assert result.exit_code == 3
        assert "already in the unit" in result.stderr


class TestCompareCommand:
    @pytest.mark.parametrize(
        "tau,tau_prime,expected",
        [
            ("gardaland", "leolandia", "precedes"),
            ("leolandia", "gardaland", "preceded_by"),
            ("prater", "leolandia", "similar"),
            ("pacific_park", "gardaland", "incomparable"),
        ],
    )
    def test_relation_words(self, runner, files, tau, tau_prime, expected):
        result = runner.invoke(
            main,
            ["compare", *base_args(files), "--tau", tau, "--tau-prime", tau_prime],
        )
        assert result.exit_code == 0
        assert result.output == expected + "\n"

    def test_equal_tuples_exit_3(self, runner, files):
        result = runner.invoke(
            main,
            ["compare", *base_args(files), "--tau", "prater",
             "--tau-prime", "prater"],
        )
        assert result.exit_code == 3


class TestGraphCommand:
    def test_stdout_json(self, runner, files):
        result = runner.invoke(main, ["graph", *base_args(files)])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert len(doc["nodes"]) == 6
        assert len(doc["arcs"]) == 6

    def test_out_and_dot_files(self, runner, files, tmp_path):
        out = tmp_path / "g.json"
        dot = tmp_path / "g.dot"
        result = runner.invoke(
            main,
            ["graph", *base_args(files), "--out", str(out), "--dot", str(dot)],
        )
        assert result.exit_code == 0
        assert result.output == ""
        assert json.loads(out.read_text())["arity"] == 1
        assert dot.read_text().startswith("digraph expansion {")

    def test_graph_stdout_is_stable_across_runs(self, runner, files):
        outputs = {
            runner.invoke(main, ["graph", *base_args(files)]).output
            for _ in range(3)
        }
        assert len(outputs) == 1

    def test_tuple_cap_exits_4(self, runner, files):
        result = runner.invoke(
            main, ["graph", *base_args(files), "--tuple-cap", "1"]
        )
        assert result.exit_code == 4
        assert "exceed the cap" in result.stderr

    def test_partial_flag_lifts_the_cap_failure(self, runner, files):
        result = runner.invoke(
            main,
            ["graph", *base_args(files), "--tuple-cap", "3", "--partial"],
        )
        assert result.exit_code == 0
        assert json.loads(result.output)["nodes"]


class TestReportCommand:
    def test_writes_tables_and_figure(self, runner, files, tmp_path):
        out_dir = tmp_path / "rep"
        result = runner.invoke(
            main, ["report", *base_args(files), "--out-dir", str(out_dir)]
        )
        assert result.exit_code == 0
        printed = result.output.splitlines()
        assert len(printed) == 5
        nodes = (out_dir / "nodes.tsv").read_text().splitlines()
        assert len(nodes) == 7
        assert nodes[0].split("\t") == [
            "id", "is_source", "formula", "direct_instances",
        ]
        assert (out_dir / "arcs.tsv").read_text().startswith("from\tto\n")
        assert (out_dir / "graph.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
        assert json.loads((out_dir / "graph.json").read_text())["arity"] == 1


class TestFixtureCommand:
    def test_prime_cycles_bundle(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["fixture", "prime-cycles", "-m", "1", "--out-dir", str(tmp_path)],
        )
        assert result.exit_code == 0
        names = {line.rsplit("/", 1)[-1] for line in result.output.splitlines()}
        assert names == {
            "prime_cycles_1_facts.txt",
            "prime_cycles_1_rules.txt",
            "prime_cycles_1_summaries.txt",
            "prime_cycles_1_unit.txt",
        }

    def test_fixture_files_feed_back_into_the_cli(self, runner, tmp_path):
        runner.invoke(
            main,
            ["fixture", "prime-cycles", "-m", "1", "--out-dir", str(tmp_path)],
        )
        result = runner.invoke(
            main,
            [
                "can",
                "--facts", str(tmp_path / "prime_cycles_1_facts.txt"),
                "--selector", f"table:{tmp_path / 'prime_cycles_1_summaries.txt'}",
                "--unit", (tmp_path / "prime_cycles_1_unit.txt").read_text().strip(),
            ],
        )
        assert result.exit_code == 0
        assert result.output.strip().count("(") == 4

    def test_random_fixture_is_seed_stable(self, runner, tmp_path):
        one = tmp_path / "one"
        two = tmp_path / "two"
        for target in (one, two):
            runner.invoke(
                main,
                ["fixture", "random", "--seed", "5", "--out-dir", str(target)],
            )
        assert (one / "random_5_facts.txt").read_text() == (
            two / "random_5_facts.txt"
        ).read_text()


class TestErrorExits:
    def test_unparsable_facts_exit_2(self, runner, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("located(epcot")
        result = runner.invoke(main, ["core", "--facts", str(bad),
                                      "--unit", "epcot"])
        assert result.exit_code == 2
        assert "error:" in result.stderr

    def test_missing_facts_file_exits_2(self, runner):
        result = runner.invoke(
            main, ["core", "--facts", "no_such_file.txt", "--unit", "epcot"]
        )
        assert result.exit_code == 2

    def test_missing_summary_table_exits_2(self, runner, files):
        result = runner.invoke(
            main,
            ["core", *base_args(files), "--selector", "table:no_table.txt"],
        )
        assert result.exit_code == 2
        assert "cannot read" in result.stderr

    def test_unknown_constant_exits_3(self, runner, files):
        result = runner.invoke(
            main,
            ["core", "--facts", str(files["facts"]),
             "--rules", str(files["rules"]), "--unit", "narnia"],
        )
        assert result.exit_code == 3
        assert "unknown constant" in result.stderr

    def test_serve_help_does_not_bind(self, runner):
        result = runner.invoke(main, ["serve", "--help"])
        assert result.exit_code == 0
        assert "loopback" in result.output


class TestEntryPoint:
    def test_console_script_reports_version(self):
        proc = subprocess.run(
            ["nexus", "--version"], capture_output=True, text=True, timeout=60
        )
        assert proc.returncode == 0
        assert "nexus" in proc.stdout

    def test_module_invocation_matches_script(self, files):
        args = [
            "core",
            "--facts", str(files["facts"]),
            "--rules", str(files["rules"]),
            "--unit", "discovery_cove;epcot",
        ]
        via_script = subprocess.run(
            ["nexus", *args], capture_output=True, text=True, timeout=60
        )
        assert via_script.returncode == 0
        assert via_script.stdout == CORE_LINE + "\n"
