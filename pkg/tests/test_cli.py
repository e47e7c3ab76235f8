# type: ignore

import json

from click.testing import CliRunner

from quantum_exam.cli.main import (
    EXIT_COMPLETED,
    EXIT_CONFIG_ERROR,
    EXIT_EVE_DETECTED,
    EXIT_INCONSISTENT,
    EXIT_RESOURCE_ERROR,
    cli,
)


def invoke(*args):
    return CliRunner().invoke(cli, [str(arg) for arg in args])


def test_run_honest_scenario(tmp_path):
    out = tmp_path / "out"
    result = invoke("run", "--students", 2, "--problem-len", 8, "--solution-len", 8, "--out", out)
    assert result.exit_code == EXIT_COMPLETED, result.output
    assert result.output.startswith("Run ")
    assert "Completed: 1" in result.output
    assert (out / "transcript.jsonl").exists()


def test_run_reads_a_config_file(tmp_path):
    config = tmp_path / "scenario.json"
    config.write_text(json.dumps({"protocol": "direct", "phase": "give", "students": 2}))
    out = tmp_path / "out"
    result = invoke("run", "--config", config, "--problem-len", 4, "--out", out)
    assert result.exit_code == EXIT_COMPLETED, result.output
    summary = json.loads((out / "summary.json").read_text())
    assert summary["config"]["protocol"] == "direct"
    assert summary["config"]["problem_len"] == 4


def test_run_rejects_a_bad_control_rate(tmp_path):
    result = invoke("run", "--protocol", "direct", "--control-rate", 1.0, "--out", tmp_path)
    assert result.exit_code == EXIT_CONFIG_ERROR
    assert "control_rate" in result.output


def test_run_rejects_a_malformed_attack_param(tmp_path):
    result = invoke("run", "--attack", "entangle-measure", "--attack-param", "alpha", "--out", tmp_path)
    assert result.exit_code == EXIT_CONFIG_ERROR


def test_run_reports_detection(tmp_path):
    result = invoke(
        "run",
        "--protocol", "direct",
        "--phase", "give",
        "--problem-len", 64,
        "--attack", "disturbance",
        "--out", tmp_path / "out",
    )
    assert result.exit_code == EXIT_EVE_DETECTED, result.output
    assert "AbortedEveDetected: 1" in result.output


def test_run_refuses_registers_over_the_cap(tmp_path):
    result = invoke("run", "--students", 23, "--attack", "intercept-resend", "--out", tmp_path)
    assert result.exit_code == EXIT_RESOURCE_ERROR
    assert "#E4" in result.output


def test_replay_of_a_run(tmp_path):
    out = tmp_path / "out"
    invoke("run", "--students", 2, "--problem-len", 4, "--solution-len", 4, "--out", out)
    result = invoke("replay", out / "transcript.jsonl")
    assert result.exit_code == EXIT_COMPLETED
    assert result.output.startswith("consistent: ")


def test_replay_flags_a_tampered_transcript(tmp_path):
    out = tmp_path / "out"
    invoke("run", "--students", 2, "--problem-len", 4, "--solution-len", 4, "--out", out)
    path = out / "transcript.jsonl"
    lines = path.read_text().splitlines()
    for position, line in enumerate(lines):
        event = json.loads(line)
        if event["kind"] == "PublicBit" and event["payload"]["purpose"] == "message":
            event["payload"]["bit"] ^= 1
            lines[position] = json.dumps(event)
            break
    path.write_text("\n".join(lines) + "\n")
    result = invoke("replay", path)
    assert result.exit_code == EXIT_INCONSISTENT
    assert f"seq {event['seq']} (PublicBit)" in result.output


def test_replay_rejects_malformed_files(tmp_path):
    path = tmp_path / "transcript.jsonl"
    path.write_text("not a transcript\n")
    result = invoke("replay", path)
    assert result.exit_code == EXIT_CONFIG_ERROR
    assert "line 1" in result.output


def test_detect_smoke(tmp_path):
    out = tmp_path / "detect"
    result = invoke("detect", "--attack", "disturbance", "--trials", 200, "--out", out)
    assert result.exit_code == EXIT_COMPLETED, result.output
    assert "Bz:" in result.output and "Bx:" in result.output
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["estimates"]) == 2


def test_detect_needs_enough_trials(tmp_path):
    result = invoke("detect", "--trials", 10, "--out", tmp_path)
    assert result.exit_code == EXIT_CONFIG_ERROR


def test_sweep_smoke(tmp_path):
    out = tmp_path / "sweep"
    result = invoke(
        "sweep",
        "--control-rates", "0.25,0.75",
        "--lengths", "4",
        "--trials", 20,
        "--out", out,
    )
    assert result.exit_code == EXIT_COMPLETED, result.output
    assert result.output.startswith("2 cells;")
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["cells"]) == 2
    assert "diagnostics" in summary
