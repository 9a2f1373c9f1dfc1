"""CLI: commands, formats, exit codes, determinism."""

import json

import pytest
from click.testing import CliRunner

import multicent.cli as cli_module
from multicent import ConvergenceError
from multicent.centrality import CentralityReport
from multicent.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, args, **kwargs):
    return runner.invoke(main, args, catch_exceptions=False, **kwargs)


class TestRank:
    def test_mtc_exact_table_head(self, runner):
        result = invoke(
            runner,
            ["rank", "--builtin", "example1", "--measure", "mtc", "--beta", "1",
             "--mode", "exact", "--top", "10"],
        )
        assert result.exit_code == 0
        lines = result.output.strip().splitlines()
        assert lines[0] == "rank,node,layer,score"
        assert lines[1] == "1,2,2,17.2450"
        assert lines[-1].startswith("10,4,2,")

    def test_mkc_both_discrepancy_small(self, runner):
        result = invoke(
            runner,
            ["rank", "--builtin", "example1", "--measure", "mkc",
             "--alpha", "0.5rel", "--mode", "both", "--format", "json"],
        )
        assert result.exit_code == 0
        assert "discrepancy" in result.stderr  # headline goes to stderr
        payload = json.loads(result.stdout)
        assert payload["diagnostics"]["discrepancy_inf"] <= 1e-8
        krylov_scores = [s["score_krylov"] for s in payload["scores"]]
        assert len(krylov_scores) == 10

    def test_json_schema_and_round_trip(self, runner):
        result = invoke(
            runner,
            ["rank", "--builtin", "example1", "--measure", "mtc",
             "--format", "json"],
        )
        payload = json.loads(result.output)
        assert set(payload) >= {"config", "kind", "parameters", "scores", "ranking"}
        assert payload["config"]["measure"] == "mtc"
        assert all(set(s) == {"node", "layer", "score"} for s in payload["scores"])
        report_data = {k: v for k, v in payload.items() if k != "config"}
        rebuilt = CentralityReport.from_dict(report_data)
        assert rebuilt.to_dict(precision=4) == report_data

    def test_byte_identical_runs(self, runner):
        args = ["rank", "--builtin", "example1", "--measure", "mkc", "--format", "json"]
        first = invoke(runner, args).output
        second = invoke(runner, args).output
        assert first == second

    def test_output_file(self, runner, tmp_path):
        out = tmp_path / "report.csv"
        result = invoke(
            runner,
            ["rank", "--builtin", "example1", "--out", str(out)],
        )
        assert result.exit_code == 0
        assert out.read_text().startswith("rank,node,layer,score")

    def test_subgraph_measure(self, runner):
        result = invoke(
            runner,
            ["rank", "--builtin", "example1", "--measure", "msc-exp",
             "--nodes", "2:2,4:2", "--format", "json"],
        )
        payload = json.loads(result.output)
        scores = {(s["node"], s["layer"]): s["score"] for s in payload["scores"]}
        assert scores[(2, 2)] == pytest.approx(4.1313, abs=5e-4)
        assert "pairwise" in payload

    def test_pair_measure(self, runner):
        result = invoke(
            runner,
            ["rank", "--builtin", "example1", "--measure", "pair",
             "--source", "2:2", "--target", "2:2", "--format", "json"],
        )
        payload = json.loads(result.output)
        assert payload["value"] == pytest.approx(4.1313, abs=5e-4)

    def test_tnc_scalar(self, runner):
        result = invoke(
            runner,
            ["rank", "--builtin", "example1", "--measure", "tnc", "--format", "csv"],
        )
        lines = result.output.strip().splitlines()
        assert lines[0] == "value"
        assert float(lines[1]) == pytest.approx(103.8861, abs=5e-3)

    def test_stabilize(self, runner):
        result = invoke(
            runner,
            ["rank", "--builtin", "example1", "--measure", "mtc",
             "--mode", "krylov", "--stabilize", "--format", "json"],
        )
        payload = json.loads(result.output)
        assert "stabilization" in payload["diagnostics"]
        assert payload["config"]["m"] >= 1


class TestExitCodes:
    def test_parse_error_is_2(self, runner, tmp_path):
        bad = tmp_path / "bad.mlnet"
        bad.write_text("mlnet 2 1 directed weighted\n1 1 oops\n")
        result = runner.invoke(main, ["rank", "--input", str(bad)])
        assert result.exit_code == 2
        assert "error:" in result.output or "error:" in (result.stderr or "")

    def test_zero_tensor_is_3(self, runner, tmp_path):
        empty = tmp_path / "empty.mlnet"
        empty.write_text("mlnet 3 2 undirected unweighted\n")
        result = runner.invoke(main, ["rank", "--input", str(empty)])
        assert result.exit_code == 3
        assert "zero tensor" in result.output + (result.stderr or "")

    def test_bad_alpha_is_3(self, runner):
        result = runner.invoke(
            main,
            ["rank", "--builtin", "example1", "--measure", "mkc", "--alpha", "2rel"],
        )
        assert result.exit_code == 3

    def test_convergence_failure_is_4(self, runner, monkeypatch):
        def boom(*args, **kwargs):
            raise ConvergenceError("power iteration stalled")

        monkeypatch.setattr(cli_module, "estimate_lambda_max", boom)
        result = runner.invoke(
            main, ["rank", "--builtin", "example1", "--measure", "mkc"]
        )
        assert result.exit_code == 4

    def test_size_cap_is_5(self, runner):
        result = runner.invoke(
            main,
            ["rank", "--builtin", "example1", "--measure", "mtc", "--size-cap", "4"],
        )
        assert result.exit_code == 5

    def test_two_inputs_rejected(self, runner, tmp_path):
        f = tmp_path / "x.mlnet"
        f.write_text("mlnet 1 1 directed weighted\n")
        result = runner.invoke(
            main, ["rank", "--builtin", "example1", "--input", str(f)]
        )
        assert result.exit_code == 3


class TestConvergence:
    def test_example1_curve(self, runner):
        result = invoke(
            runner,
            ["convergence", "--builtin", "example1", "--measure", "mtc",
             "--m-max", "10"],
        )
        lines = result.output.strip().splitlines()
        assert lines[0] == "m,error"
        assert len(lines) == 11
        final = float(lines[-1].split(",")[1])
        assert final <= 1e-8

    def test_single_row(self, runner):
        result = invoke(
            runner,
            ["convergence", "--builtin", "example1", "--m-max", "1"],
        )
        assert len(result.output.strip().splitlines()) == 2

    def test_size_cap_exit_5_with_hint(self, runner):
        result = runner.invoke(
            main,
            ["convergence", "--builtin", "example1", "--size-cap", "4"],
        )
        assert result.exit_code == 5
        assert "stabilize" in result.output + (result.stderr or "")

    def test_json_format(self, runner):
        result = invoke(
            runner,
            ["convergence", "--builtin", "example1", "--measure", "mkc",
             "--alpha", "0.5rel", "--m-max", "5", "--format", "json"],
        )
        payload = json.loads(result.output)
        assert len(payload["errors"]) == 5
        assert payload["config"]["alpha"] > 0


class TestInfo:
    def test_example1_summary(self, runner):
        result = invoke(runner, ["info", "--builtin", "example1"])
        out = result.output
        assert "n_nodes: 5" in out
        assert "n_layers: 2" in out
        assert "undirected_edges: 11" in out
        assert "symmetric: True" in out
        assert "lambda_max: 2.45593" in out

    def test_zero_network_graceful(self, runner, tmp_path):
        empty = tmp_path / "empty.mlnet"
        empty.write_text("mlnet 3 2 undirected unweighted\n")
        result = invoke(runner, ["info", "--input", str(empty)])
        assert result.exit_code == 0
        assert "lambda_max: None" in result.output
        assert "lambda_max_note" in result.output

    def test_coupled_network_counts_coupling(self, runner, tmp_path):
        plain = tmp_path / "plain.mlnet"
        plain.write_text("mlnet 2 2 undirected unweighted\n1 1 2 1\n")
        coupled = tmp_path / "coupled.mlnet"
        coupled.write_text("mlnet 2 2 undirected unweighted\n1 1 2 1\ncouple 1.0\n")
        out_plain = invoke(runner, ["info", "--input", str(plain), "--format", "json"])
        out_coupled = invoke(runner, ["info", "--input", str(coupled), "--format", "json"])
        n_plain = json.loads(out_plain.output)["entries"]
        n_coupled = json.loads(out_coupled.output)["entries"]
        assert n_coupled == n_plain + 4  # 2 nodes x 2 ordered layer pairs

    def test_json_format(self, runner):
        result = invoke(runner, ["info", "--builtin", "example1", "--format", "json"])
        payload = json.loads(result.output)
        assert payload["n_nodes"] == 5
        assert payload["density"] == pytest.approx(0.22)


class TestThreadEnv:
    def test_thread_env_accepted(self, runner, monkeypatch):
        monkeypatch.setenv("MULTICENT_THREADS", "1")
        result = invoke(runner, ["rank", "--builtin", "example1"])
        assert result.exit_code == 0

    def test_thread_env_rejected(self, runner, monkeypatch):
        monkeypatch.setenv("MULTICENT_THREADS", "zero")
        result = runner.invoke(main, ["rank", "--builtin", "example1"])
        assert result.exit_code == 3

    def test_byte_identical_across_thread_counts(self, runner, monkeypatch):
        args = ["rank", "--builtin", "example1", "--measure", "mkc", "--format", "json"]
        monkeypatch.setenv("MULTICENT_THREADS", "1")
        single = invoke(runner, args).stdout
        monkeypatch.setenv("MULTICENT_THREADS", "4")
        multi = invoke(runner, args).stdout
        assert single == multi
