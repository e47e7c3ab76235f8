# type: ignore

import csv
import json

from quantum_exam.cli.runner import (
    ESTIMATES_FILE,
    SUMMARY_FILE,
    TRANSCRIPT_FILE,
    TrialSummary,
    estimate_rows,
    run_scenario,
    run_trial,
)
from quantum_exam.protocol import (
    EventKind,
    ExamPolicy,
    OutcomeStatus,
    OutcomeSummary,
    Transcript,
)

from .conftest import py_test_mark_slow


def test_honest_full_exam(scenario):
    config = scenario(trials=2, seed=3)
    report = run_scenario(config)
    assert report.status_counts == {"Completed": 2}
    assert not report.eve_detected
    assert not report.resource_error
    assert all(trial.decode_errors == 0 for trial in report.trials)
    assert [phase.phase for phase in report.trials[0].phases] == [
        "share_psi",
        "give",
        "share_phi",
        "collect",
    ]


def test_artifacts_are_written(scenario):
    config = scenario(trials=2, seed=3)
    run_scenario(config)
    out = config.out_dir
    transcript = Transcript.load(out / TRANSCRIPT_FILE)
    markers = [
        event.payload.get("marker") for event in transcript.of_kind(EventKind.ANNOUNCEMENT)
    ]
    assert "exam-period" in markers
    summary = json.loads((out / SUMMARY_FILE).read_text())
    assert "duration" not in summary
    assert summary["config"]["seed"] == 3
    with open(out / ESTIMATES_FILE, newline="") as f:
        rows = list(csv.DictReader(f))
    assert {row["phase"] for row in rows} == {"share_psi", "give", "share_phi", "collect"}


def test_same_seed_same_artifacts(scenario, tmp_path):
    first = scenario(trials=3, seed=8, attack="measure-resend", out=str(tmp_path / "a"))
    second = scenario(trials=3, seed=8, attack="measure-resend", out=str(tmp_path / "b"))
    run_scenario(first)
    run_scenario(second)
    for name in (TRANSCRIPT_FILE, SUMMARY_FILE):
        a = (first.out_dir / name).read_text()
        b = (second.out_dir / name).read_text().replace(str(tmp_path / "b"), str(tmp_path / "a"))
        assert a == b


def test_worker_count_does_not_change_results(scenario):
    single = run_scenario(scenario(trials=4, seed=5, attack="disturbance"), write=False)
    pooled = run_scenario(scenario(trials=4, seed=5, attack="disturbance", workers=2), write=False)
    assert single.trials == pooled.trials
    assert single.run_id == pooled.run_id


def test_run_trial_is_reproducible(scenario):
    config = scenario(protocol="direct", phase="give", seed=4)
    assert run_trial(config, 1) == run_trial(config, 1)
    assert run_trial(config, 1)[1] != run_trial(config, 2)[1]


def test_direct_give_under_disturbance_is_detected(scenario):
    config = scenario(
        protocol="direct", phase="give", problem_len=64, attack="disturbance", trials=2
    )
    report = run_scenario(config, write=False)
    assert report.eve_detected
    assert report.status_counts == {OutcomeStatus.ABORTED_EVE_DETECTED.value: 2}
    assert report.trials[0].cause == "eve-detected"


def test_sharing_phase_alone(scenario):
    report = run_scenario(scenario(phase="share-phi", solution_len=6), write=False)
    (trial,) = report.trials
    assert trial.status is OutcomeStatus.COMPLETED
    assert [phase.phase for phase in trial.phases] == ["share_phi"]


def test_estimate_rows_pool_the_checks(scenario):
    config = scenario(trials=3, attack="measure-resend", error_threshold=0.9, phase="give")
    report = run_scenario(config, write=False)
    rows = {row["phase"]: row for row in estimate_rows(config, report.trials)}
    share = rows["share_psi"]
    assert share["runs"] == 3
    assert share["checks"] > 0
    assert share["low"] <= share["failure_rate"] <= share["high"]
    assert share["attack"] == "measure-resend"
    assert 0.0 < share["oracle_per_check"] < 1.0
    assert rows["give"]["runs"] == 3
    assert 0 <= rows["give"]["mean_leaked_bits"] <= 16


def test_resource_aborts_are_not_detections(scenario):
    config = scenario(protocol="direct", phase="give")
    aborted = OutcomeStatus.ABORTED_EVE_DETECTED
    summaries = [
        TrialSummary(
            trial=0,
            status=aborted,
            cause="round-cap",
            phases=[OutcomeSummary(phase="direct_give", status=aborted, cause="round-cap")],
        ),
        TrialSummary(
            trial=1,
            status=aborted,
            cause="eve-detected",
            phases=[OutcomeSummary(phase="direct_give", status=aborted, cause="eve-detected")],
        ),
    ]
    assert [summary.eve_detected for summary in summaries] == [False, True]
    (row,) = estimate_rows(config, summaries)
    assert row["aborted_runs"] == 1
    assert row["abort_rate"] == 0.5


def test_report_counts_only_real_detections(scenario, monkeypatch):
    monkeypatch.setattr(ExamPolicy, "round_cap", lambda self, length, control_rate: 0)
    report = run_scenario(scenario(protocol="direct", phase="give", trials=2), write=False)
    assert report.status_counts == {OutcomeStatus.ABORTED_EVE_DETECTED.value: 2}
    assert report.resource_error
    assert report.eve_detections == 0
    assert not report.eve_detected


@py_test_mark_slow
def test_four_student_exams_decode_exactly(scenario):
    config = scenario(students=4, problem_len=64, solution_len=64, trials=100, seed=31, workers=2)
    report = run_scenario(config, write=False)
    assert report.status_counts == {"Completed": 100}
    assert sum(trial.decode_errors for trial in report.trials) == 0
    assert not report.eve_detected
