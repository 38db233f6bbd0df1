import json
import math

import pytest

from qccp import RunRecord, Task, classical_bound, success_stats
from qccp.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def parse_records_tsv(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "# schema: qccp-records-v1"
    header = lines[1].split("\t")
    records = []
    for line in lines[2:]:
        row = dict(zip(header, line.split("\t")))
        inputs = tuple(
            float(row[c]) if "." in row[c] or "e" in row[c] else int(row[c])
            for c in header
            if c.startswith("input_")
        )
        records.append(
            RunRecord(
                inputs=inputs,
                trigger_count=int(row["trigger_count"]),
                accepted=bool(int(row["accepted"])),
                detected=bool(int(row["detected"])),
                guessed=bool(int(row["guessed"])),
                answer=int(row["answer"]),
                truth=int(row["truth"]),
            )
        )
    return records


class TestBounds:
    def test_json_rows(self, capsys):
        code, out = run_cli(capsys, "bounds", "--task", "A", "--parties", "5")
        assert code == 0
        payload = json.loads(out)
        assert payload["schema"] == "qccp-bounds-v1"
        assert len(payload["rows"]) == 5
        last = payload["rows"][-1]
        assert last["classical_success"] == 0.625
        assert last["quantum_success"] == 1.0

    def test_task_b_values(self, capsys):
        code, out = run_cli(capsys, "bounds", "--task", "B", "--parties", "5")
        rows = json.loads(out)["rows"]
        assert rows[-1]["classical_success"] == pytest.approx(0.5821, abs=1e-4)
        assert rows[-1]["quantum_success"] == pytest.approx(0.8927, abs=1e-4)

    def test_degenerate_single_party(self, capsys):
        _, out = run_cli(capsys, "bounds", "--task", "A", "--parties", "1")
        row = json.loads(out)["rows"][0]
        assert row["classical_success"] == row["quantum_success"] == 1.0

    def test_table_format(self, capsys):
        code, out = run_cli(capsys, "bounds", "--parties", "3", "--format", "delimited-table")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].split("\t")[0] == "task"
        assert len(lines) == 1 + 2 * 3  # header + both tasks

    def test_invalid_party_count(self, capsys):
        code, _ = run_cli(capsys, "bounds", "--parties", "-2")
        assert code == 2


class TestCertify:
    def test_n2_chain(self, capsys, tmp_path):
        out_file = tmp_path / "certify.json"
        code, _ = run_cli(capsys, "certify", "--parties", "2", "--tree", "chain", "--out", str(out_file))
        assert code == 0
        payload = json.loads(out_file.read_text())
        assert payload["max_fidelity"] == 1.0
        assert payload["matches_closed_form"] is True
        assert payload["search_space"] == 4096
        assert len(payload["argmax_tables"]) == 2

    def test_n3_star(self, capsys):
        code, out = run_cli(capsys, "certify", "--parties", "3", "--tree", "star")
        assert code == 0
        payload = json.loads(out)
        assert payload["max_fidelity"] == 0.5
        assert payload["search_space"] == 2**24


class TestOptimize:
    def test_small_search(self, capsys, tmp_path):
        trace_file = tmp_path / "trace.tsv"
        code, out = run_cli(
            capsys, "optimize", "--parties", "2", "--grid", "16",
            "--restarts", "3", "--seed", "5", "--trace-out", str(trace_file),
        )
        assert code == 0
        payload = json.loads(out)
        target = classical_bound(Task.B, 2).fidelity
        assert payload["target_fidelity"] == target
        assert payload["best_fidelity"] <= target + 1e-12
        trace = payload["trace"]
        assert all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))
        lines = trace_file.read_text().splitlines()
        assert lines[0] == "# schema: qccp-trace-v1"
        assert len(lines) == 2 + len(trace)


class TestExperiment:
    ARGS = (
        "experiment", "--task", "A", "--parties", "3", "--n-target", "400",
        "--eta", "0.9", "--visibility", "1.0", "--seed", "11",
        "--block-size", "100",
    )

    def test_stats_payload(self, capsys):
        code, out = run_cli(capsys, *self.ARGS)
        assert code == 0
        payload = json.loads(out)
        assert payload["n_accepted"] == 400
        assert payload["eta"] == 0.9
        assert payload["gamma"] == 1.0
        assert payload["classical_success"] == 0.75
        assert 0.9 < payload["p_hat"] <= 1.0

    def test_files_round_trip(self, capsys, tmp_path):
        out_file = tmp_path / "run.json"
        code, _ = run_cli(capsys, *self.ARGS, "--out", str(out_file))
        assert code == 0
        payload = json.loads(out_file.read_text())
        records = parse_records_tsv(tmp_path / "run.json.records.tsv")
        assert len(records) == payload["n_windows"]
        stats = success_stats(records)
        assert stats.n == payload["n_accepted"]
        assert stats.p_hat == payload["p_hat"]
        assert stats.sigma == payload["sigma"]
        hist_lines = (tmp_path / "run.json.histogram.tsv").read_text().splitlines()
        assert hist_lines[0] == "# schema: qccp-histogram-v1"
        total_blocks = sum(int(line.split("\t")[2]) for line in hist_lines[2:])
        assert total_blocks == payload["n_accepted"] // 100

    def test_byte_identical_reruns(self, capsys, tmp_path):
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        run_cli(capsys, *self.ARGS, "--out", str(first))
        run_cli(capsys, *self.ARGS, "--out", str(second))
        assert first.read_bytes() == second.read_bytes()
        assert (tmp_path / "a.json.records.tsv").read_bytes() == (
            tmp_path / "b.json.records.tsv"
        ).read_bytes()

    def test_streams_partition_is_deterministic(self, capsys):
        _, out1 = run_cli(capsys, *self.ARGS, "--streams", "4")
        _, out2 = run_cli(capsys, *self.ARGS, "--streams", "4")
        assert out1 == out2
        assert json.loads(out1)["n_accepted"] == 400

    def test_record_rows_carry_their_stream_id(self, capsys, tmp_path):
        out_file = tmp_path / "s.json"
        run_cli(capsys, *self.ARGS, "--streams", "4", "--out", str(out_file))
        lines = (tmp_path / "s.json.records.tsv").read_text().splitlines()
        header = lines[1].split("\t")
        stream_col = header.index("stream")
        ids = {line.split("\t")[stream_col] for line in lines[2:]}
        assert ids == {"0", "1", "2", "3"}

    def test_task_b_preset_inputs_are_floats(self, capsys, tmp_path):
        out_file = tmp_path / "b.json"
        code, _ = run_cli(
            capsys, "experiment", "--task", "B", "--n-target", "50",
            "--seed", "3", "--out", str(out_file),
        )
        assert code == 0
        records = parse_records_tsv(tmp_path / "b.json.records.tsv")
        accepted = [r for r in records if r.accepted]
        assert len(accepted) == 50
        assert all(isinstance(v, float) for v in records[0].inputs)
        assert len(records[0].inputs) == 5

    def test_zero_eta_reduces_to_coin_flipping(self, capsys):
        code, out = run_cli(
            capsys, "experiment", "--task", "A", "--n-target", "4000",
            "--eta", "0.0", "--seed", "13",
        )
        assert code == 0
        payload = json.loads(out)
        assert abs(payload["p_hat"] - 0.5) < 3 * math.sqrt(0.25 / 4000)
        assert payload["predicted_success"] == 0.5

    def test_window_and_rate_overrides(self, capsys):
        _, out = run_cli(
            capsys, "experiment", "--task", "A", "--n-target", "50",
            "--trigger-rate", "10000", "--seed", "2",
        )
        payload = json.loads(out)
        assert payload["trigger_rate"] == 10000.0
        assert payload["window"] == 100e-6  # re-optimised for the new rate
        _, out = run_cli(
            capsys, "experiment", "--task", "A", "--n-target", "50",
            "--window", "5e-5", "--seed", "2",
        )
        assert json.loads(out)["window"] == 5e-5

    def test_invalid_eta_exits_nonzero(self, capsys):
        code, _ = run_cli(
            capsys, "experiment", "--task", "A", "--eta", "1.5", "--n-target", "10"
        )
        assert code == 2

    def test_gamma_and_visibility_conflict(self):
        with pytest.raises(SystemExit):
            main(["experiment", "--task", "A", "--gamma", "0.9", "--visibility", "0.9"])


class TestConfigAndEnv:
    def test_config_file_supplies_flags(self, capsys, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("task = A\nn-target = 300\neta = 0.8\nvisibility = 1.0\nseed = 4\n")
        code, out = run_cli(capsys, "experiment", "--config", str(config))
        assert code == 0
        payload = json.loads(out)
        assert payload["n_accepted"] == 300 and payload["eta"] == 0.8

    def test_flags_override_config(self, capsys, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("task=A\nn_target=300\neta=0.8\nvisibility=1.0\nseed=4\n")
        _, out = run_cli(capsys, "experiment", "--config", str(config), "--eta", "0.6")
        assert json.loads(out)["eta"] == 0.6

    def test_unknown_config_key_rejected(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("task=A\nbogus=1\n")
        with pytest.raises(SystemExit, match="unknown config keys"):
            main(["experiment", "--config", str(config)])

    def test_malformed_config_line_rejected(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("task A\n")
        with pytest.raises(SystemExit, match="key=value"):
            main(["experiment", "--config", str(config)])

    def test_seed_env_variable(self, capsys, monkeypatch):
        args = ("experiment", "--task", "A", "--n-target", "100", "--eta", "0.9", "--visibility", "1.0")
        monkeypatch.setenv("QCCP_SEED", "77")
        _, out_env = run_cli(capsys, *args)
        assert json.loads(out_env)["seed"] == 77
        _, out_env2 = run_cli(capsys, *args)
        assert out_env == out_env2
        monkeypatch.setenv("QCCP_SEED", "78")
        _, out_other = run_cli(capsys, *args)
        assert json.loads(out_other)["seed"] == 78
        assert out_other != out_env


def test_entry_point_requires_a_command():
    with pytest.raises(SystemExit):
        main([])
