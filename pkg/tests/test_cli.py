"""End-to-end command runs through ``main(argv)``, asserting exit codes
and the printed reports rather than internals."""

import json

import pytest

from markab import load_chain
from markab.cli import main


@pytest.fixture(scope="module")
def fig2_paths(fixture_dir):
    return str(fixture_dir / "fig2_left.json"), str(fixture_dir / "fig2_right.json")


@pytest.fixture(scope="module")
def system_path(fixture_dir):
    return str(fixture_dir / "benchmark_system.json")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestMetric:
    def test_known_distance(self, capsys, fig2_paths):
        code, out, _ = run(capsys, "metric", *fig2_paths, "--horizon", "2")
        assert code == 0
        assert "value: 0.125" in out
        assert "(horizon 2)" in out
        assert "nodes expanded:" in out

    def test_identical_files_have_distance_zero(self, capsys, fig2_paths):
        left, _ = fig2_paths
        code, out, _ = run(capsys, "metric", left, left, "--horizon", "3")
        assert code == 0
        assert "value: 0.0" in out

    def test_epsilon_selects_the_horizon(self, capsys, fig2_paths):
        code, out, _ = run(capsys, "metric", *fig2_paths, "--epsilon", "0.25")
        assert code == 0
        assert "(horizon 2)" in out

    def test_json_with_oracle_cross_check(self, capsys, fig2_paths):
        code, out, _ = run(
            capsys, "metric", *fig2_paths, "--horizon", "4", "--oracle", "--json"
        )
        assert code == 0
        payload = json.loads(out)
        assert set(payload) == {"value", "horizon", "upper_bound", "nodes_expanded", "oracle"}
        assert payload["horizon"] == 4
        assert payload["upper_bound"] == pytest.approx(payload["value"] + 0.5**4)
        assert payload["oracle"]["gap"] <= 1e-9

    def test_missing_file_is_a_parse_error(self, capsys, fig2_paths, tmp_path):
        left, _ = fig2_paths
        code, _, err = run(capsys, "metric", left, str(tmp_path / "absent.json"))
        assert code == 2
        assert err.startswith("error:")

    def test_unknown_field_is_a_parse_error(self, capsys, fig2_paths, tmp_path):
        left, _ = fig2_paths
        doc = json.loads(open(left).read())
        doc["comment"] = "hello"
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        code, _, err = run(capsys, "metric", left, str(bad))
        assert code == 2
        assert "unknown field" in err

    def test_alphabet_mismatch_is_a_validation_error(self, capsys, fig2_paths, tmp_path):
        left, _ = fig2_paths
        ternary = {
            "schema": "chain/1",
            "alphabet": ["0", "1", "2"],
            "states": [{"id": "s", "label": "0"}],
            "initial": {"s": "1.0"},
            "transitions": [{"from": "s", "to": "s", "p": "1.0"}],
        }
        other = tmp_path / "ternary.json"
        other.write_text(json.dumps(ternary))
        code, _, err = run(capsys, "metric", left, str(other), "--horizon", "2")
        assert code == 3
        assert "alphabet" in err

    def test_oracle_guard_maps_to_exit_4(self, capsys, fig2_paths):
        code, _, err = run(capsys, "metric", *fig2_paths, "--horizon", "8", "--oracle")
        assert code == 4
        assert err.startswith("error:")

    def test_epsilon_and_horizon_are_exclusive(self, fig2_paths):
        with pytest.raises(SystemExit) as exc:
            main(["metric", *fig2_paths, "--epsilon", "0.1", "--horizon", "3"])
        assert exc.value.code == 2


class TestRefine:
    def test_benchmark_run_prints_trace_and_chain(self, capsys):
        code, out, _ = run(capsys, "refine", "benchmark")
        assert code == 0
        assert "stop: deterministic" in out
        assert "{0, 10, 110, 1110, 1111}" in out
        assert '"schema": "chain/1"' in out  # final chain appended in text mode

    def test_json_payload(self, capsys):
        code, out, _ = run(capsys, "refine", "benchmark", "--json")
        assert code == 0
        payload = json.loads(out)
        assert payload["trace"]["final_partition"] == ["0", "10", "110", "1110", "1111"]
        assert [s["id"] for s in payload["chain"]["states"]] == [
            "0", "10", "110", "1110", "1111",
        ]

    def test_budget_stop_exits_10(self, capsys):
        code, out, _ = run(capsys, "refine", "benchmark", "--max-iter", "1")
        assert code == 10
        assert "stop: budget-exhausted" in out

    def test_out_writes_a_loadable_chain(self, capsys, tmp_path):
        target = tmp_path / "abstraction.json"
        code, out, _ = run(capsys, "refine", "benchmark", "--out", str(target))
        assert code == 0
        assert '"schema"' not in out  # chain goes to the file, not stdout
        chain = load_chain(target)
        assert chain.n_states == 5

    def test_sampled_mode(self, capsys):
        code, out, _ = run(
            capsys, "refine", "benchmark", "--mode", "sampled", "--samples", "20000"
        )
        assert code == 0
        assert "3-standard-error" in out

    def test_bad_epsilon_is_a_validation_error(self, capsys):
        code, _, err = run(capsys, "refine", "benchmark", "--epsilon", "2.0")
        assert code == 3
        assert "epsilon" in err

    def test_missing_system_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "refine", str(tmp_path / "ghost.json"))
        assert code == 2
        assert err.startswith("error:")


class TestControl:
    def test_benchmark_report(self, capsys):
        code, out, _ = run(
            capsys, "control", "--trajectories", "200", "--length", "60"
        )
        assert code == 0
        assert "non-decreasing within 2 pooled standard errors: yes" in out
        assert "reward convention: sum over k = 1..length" in out

    def test_json_payload(self, capsys):
        code, out, _ = run(
            capsys, "control", "benchmark", "--trajectories", "150", "--length", "40", "--json"
        )
        assert code == 0
        payload = json.loads(out)
        assert len(payload["report"]["rows"]) == 4
        assert payload["refinement"]["stop_reason"] == "deterministic"

    def test_file_system_requires_actions(self, capsys, system_path):
        code, _, err = run(capsys, "control", system_path)
        assert code == 3
        assert "--actions" in err

    def test_file_system_with_actions(self, capsys, system_path):
        code, out, _ = run(
            capsys,
            "control",
            system_path,
            "--actions", "0,0.25",
            "--trajectories", "120",
            "--length", "40",
        )
        assert code == 0
        assert "reward convention" in out

    def test_bad_gamma(self, capsys):
        code, _, err = run(
            capsys, "control", "--gamma", "1.5", "--trajectories", "50", "--length", "10"
        )
        assert code == 3
        assert "discount" in err


class TestBench:
    def test_small_sweep(self, capsys):
        code, out, _ = run(capsys, "bench", "--max-horizon", "4", "--sizes", "3x2")
        assert code == 0
        assert "|S|=3 |A|=2" in out
        assert "log-nodes slope" in out
        assert "skipped" not in out

    def test_guard_marks_oracle_rows_skipped(self, capsys):
        code, out, _ = run(capsys, "bench", "--max-horizon", "8", "--sizes", "2x2", "--json")
        assert code == 0
        payload = json.loads(out)
        rows = payload["groups"][0]["rows"]
        assert "oracle_value" in rows[6]  # 2^7 couplings are still allowed
        assert rows[7].get("skipped") is True  # 2^8 couplings trip the guard

    def test_runs_are_reproducible(self, capsys):
        _, first, _ = run(capsys, "bench", "--max-horizon", "3", "--sizes", "2x2", "--json")
        _, second, _ = run(capsys, "bench", "--max-horizon", "3", "--sizes", "2x2", "--json")
        a, b = json.loads(first), json.loads(second)
        for row_a, row_b in zip(a["groups"][0]["rows"], b["groups"][0]["rows"]):
            assert row_a["value"] == row_b["value"]
            assert row_a["nodes"] == row_b["nodes"]

    def test_multiple_sizes(self, capsys):
        code, out, _ = run(capsys, "bench", "--max-horizon", "3", "--sizes", "2x2,2x3")
        assert code == 0
        assert "|S|=2 |A|=2" in out and "|S|=2 |A|=3" in out

    def test_horizon_must_be_positive(self, capsys):
        code, _, err = run(capsys, "bench", "--max-horizon", "0")
        assert code == 3
        assert "max-horizon" in err

    def test_malformed_sizes_are_a_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["bench", "--sizes", "4by2"])
        assert exc.value.code == 2
