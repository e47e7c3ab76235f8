# type: ignore

import functools
import math

import pytest

from quantum_exam.adversary import AttackConfig
from quantum_exam.analysis import (
    check_failure_probability,
    detection_oracle,
    dumps_csv,
    estimate_detection,
    geometric_model,
    independence,
    interval_coverage,
    leakage_cell,
    leakage_sweep,
    map_trials,
    oracle_table,
    pad_uniformity_test,
    per_check_detection,
    resource_kind_for,
    student_isolation_test,
    sweep_diagnostics,
    uniformity,
    wilson_interval,
)
from quantum_exam.analysis.detection import _detection_trial
from quantum_exam.core import InvalidArgumentError, MeasurementBasis
from quantum_exam.protocol import (
    BitString,
    EventKind,
    ExamSession,
    ResourceKind,
    Transcript,
    resources_needed,
)
from quantum_exam.util import make_rng, trial_rng

from .conftest import py_test_mark_slow


Z = MeasurementBasis.Z
X = MeasurementBasis.X


@pytest.mark.parametrize(
    "attack, phase, expected",
    [
        (dict(kind="none"), "share_psi", {Z: 0.0, X: 0.0}),
        (dict(kind="measure-resend"), "share_psi", {Z: 0.0, X: 0.5}),
        (dict(kind="measure-resend", targets=[1]), "share_phi", {Z: 0.0, X: 0.5}),
        (dict(kind="disturbance"), "share_psi", {Z: 0.75, X: 0.0}),
        (dict(kind="disturbance", targets=[2]), "share_phi", {Z: 0.5, X: 0.0}),
        (dict(kind="entangle-measure", alpha=0.8, beta=0.6), "share_psi", {Z: 0.36, X: 0.0}),
        (dict(kind="intercept-resend"), "share_psi", {Z: 0.5, X: 0.5}),
        (dict(kind="masquerade", impersonate="bob1"), "share_phi", {Z: 1.0, X: 1.0}),
        (dict(kind="measure-resend", tap_rate=0.5), "give", {Z: 0.0, X: 0.25}),
    ],
)
def test_detection_oracle_table(attack, phase, expected):
    config = AttackConfig(**attack)
    for basis, probability in expected.items():
        assert detection_oracle(config, phase, basis, 2) == pytest.approx(probability)


def test_disturbance_on_three_students():
    table = oracle_table(AttackConfig(kind="disturbance"), "share_psi", 3)
    assert table[Z] == pytest.approx(0.875)
    assert table[X] == pytest.approx(0.0)


@pytest.mark.parametrize("beta_squared", [0.1, 0.25, 0.5])
def test_entangle_measure_fails_z_checks_with_beta_squared(beta_squared):
    config = AttackConfig(
        kind="entangle-measure",
        alpha=math.sqrt(1 - beta_squared),
        beta=math.sqrt(beta_squared),
    )
    assert detection_oracle(config, "share_psi", Z, 2) == pytest.approx(beta_squared)
    assert detection_oracle(config, "share_psi", X, 2) == pytest.approx(0.0)


def test_oracle_table_covers_both_bases():
    table = oracle_table(AttackConfig(kind="intercept-resend"), "share_psi", 3)
    assert set(table) == {Z, X}
    assert table[Z] == pytest.approx(0.5)


def test_oracle_averages_the_bases():
    config = AttackConfig(kind="disturbance")
    assert per_check_detection(config, "direct_give", 2) == pytest.approx(0.375)


def test_intercept_resend_on_phi_with_a_fixed_mask():
    random_mask = AttackConfig(kind="intercept-resend")
    fixed_mask = AttackConfig(kind="intercept-resend", intercept_mask=[0, 1])
    for config in (random_mask, fixed_mask):
        failure = check_failure_probability(config, ResourceKind.PHI, Z, 2)
        assert 0.0 < failure <= 1.0


def test_phases_map_to_resource_kinds():
    assert resource_kind_for("give") is ResourceKind.PSI
    assert resource_kind_for("direct_collect") is ResourceKind.PHI
    with pytest.raises(ValueError):
        resource_kind_for("exam-period")


def test_wilson_interval_known_values():
    low, high = wilson_interval(50, 100)
    assert low == pytest.approx(0.4038, abs=1e-3)
    assert high == pytest.approx(0.5962, abs=1e-3)
    assert wilson_interval(0, 100)[0] == pytest.approx(0.0, abs=1e-12)
    assert wilson_interval(100, 100)[1] == pytest.approx(1.0, abs=1e-12)
    assert wilson_interval(0, 0) == (0.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        wilson_interval(5, 4)


def test_wilson_interval_coverage():
    coverage = interval_coverage(0.3, trials=200, repetitions=4000, rng=make_rng(9))
    assert 0.93 <= coverage <= 0.97


def test_chi_square_helpers():
    assert uniformity([500, 500]).p_value == pytest.approx(1.0)
    assert not uniformity([900, 100]).passed
    assert independence([[250, 250], [250, 250]]).passed
    assert not independence([[500, 0], [0, 500]]).passed


def test_geometric_model_values():
    model = geometric_model(0.5, 0.5, 8)
    assert model.q == pytest.approx(2 / 3)
    assert model.mean_rounds == pytest.approx(2.0)
    assert model.truncated_mean_rounds == pytest.approx(2 * (1 - (2 / 3) ** 8))
    assert model.detection == pytest.approx(1 - (2 / 3) ** 8)


def test_geometric_model_without_detection():
    model = geometric_model(0.5, 0.0, 16)
    assert math.isinf(model.mean_rounds)
    assert model.truncated_mean_rounds == 16
    assert model.detection == 0.0


def test_trials_do_not_depend_on_worker_count():
    trial = functools.partial(
        _detection_trial, AttackConfig(kind="measure-resend"), "share_psi", None, 2
    )
    single = map_trials(trial, 42, 300, workers=1)
    pooled = map_trials(trial, 42, 300, workers=2, chunk_size=64)
    assert single == pooled


def test_trial_streams_are_independent_of_order():
    first = trial_rng(7, 3).random()
    trial_rng(7, 2).random()
    assert trial_rng(7, 3).random() == first
    assert trial_rng(7, 4).random() != first


def test_estimate_detection_needs_enough_trials():
    with pytest.raises(InvalidArgumentError):
        estimate_detection(AttackConfig(kind="disturbance"), "share_psi", 50, make_rng(1))


def test_estimate_detection_agrees_with_oracle():
    estimate = estimate_detection(
        AttackConfig(kind="measure-resend"), "share_psi", 2000, make_rng(1), basis=X
    )
    assert estimate.oracle == pytest.approx(0.5)
    assert abs(estimate.probability - 0.5) < 4 * math.sqrt(0.25 / 2000)
    assert estimate.low <= estimate.probability <= estimate.high


def test_leakage_cell_follows_geometric_model():
    report = leakage_cell(AttackConfig(kind="measure-resend"), 0.5, 8, 400, root_seed=11)
    # p = 0.25 per check, so q = 0.8
    assert report.per_check == pytest.approx(0.25)
    assert report.geometric_detection == pytest.approx(1 - 0.8**8)
    tolerance = 4 * math.sqrt(report.geometric_detection * (1 - report.geometric_detection) / 400)
    assert abs(report.detection_probability - report.geometric_detection) < tolerance
    assert report.mean_leaked <= 8


@py_test_mark_slow
def test_half_control_rate_catches_measure_resend():
    report = leakage_cell(
        AttackConfig(kind="measure-resend"), 0.5, 128, 2000, root_seed=23, workers=2
    )
    assert report.detection_probability >= 0.99
    # q = 0.8, so Eve reads four message rounds on average before a check fails.
    assert report.geometric_mean_rounds == pytest.approx(4.0)
    assert report.mean_rounds_before_detection == pytest.approx(4.0, rel=0.1)


@py_test_mark_slow
def test_leakage_falls_as_control_rate_rises():
    rates = [round(0.1 * step, 1) for step in range(1, 10)]
    reports = leakage_sweep(
        AttackConfig(kind="measure-resend"), rates, [64], 1000, make_rng(29), workers=2
    )
    assert [report.control_rate for report in reports] == rates
    assert sweep_diagnostics(reports).leakage_non_increasing_in_rate
    assert reports[0].mean_leaked > reports[-1].mean_leaked


def test_leakage_sweep_needs_a_generator():
    with pytest.raises(InvalidArgumentError):
        leakage_sweep(AttackConfig(kind="measure-resend"), [0.5], [8], 10)
    with pytest.raises(InvalidArgumentError):
        leakage_sweep(AttackConfig(kind="measure-resend"), [0.5], [8], 10, make_rng(1), phase="give")


def test_leakage_reports_write_as_csv():
    reports = leakage_sweep(
        AttackConfig(kind="disturbance"), [0.5], [4], 20, make_rng(2)
    )
    header, row = dumps_csv(reports).splitlines()
    assert "geometric_mean_rounds" in header.split(",")
    assert row.startswith("disturbance,direct_give,0.5,4,20,")


def _honest_transcripts(count, length, students=2, seed=0):
    transcripts = []
    for index in range(count):
        rng = trial_rng(seed, index)
        session = ExamSession(students, rng)
        session.direct_give_problem(BitString.random(length, rng), control_rate=0.0)
        solutions = [BitString.random(length, rng) for _ in range(students)]
        session.direct_collect_solutions(solutions, control_rate=0.0)
        transcripts.append(session.transcript)
    return transcripts


def test_pads_are_uniform_and_independent():
    report = pad_uniformity_test(_honest_transcripts(8, 64))
    assert report.samples == 8 * 64 * 3
    assert report.passed


def test_pad_test_needs_enough_samples():
    with pytest.raises(InvalidArgumentError):
        pad_uniformity_test(_honest_transcripts(1, 16))


def test_pad_test_catches_a_constant_pad():
    transcript = Transcript()
    rng = make_rng(4)
    for serial in range(1200):
        bit = int(rng.integers(0, 2))
        transcript.record(serial, "alice", EventKind.ENCODE, resource=serial, bit=bit)
        transcript.record(
            serial, "alice", EventKind.PUBLIC_BIT, purpose="message", resource=serial, bit=bit
        )
    report = pad_uniformity_test([transcript])
    assert not report.passed
    assert report.independence_p_value < 0.01


def test_students_cannot_read_each_other():
    report = student_isolation_test(_honest_transcripts(8, 128), reader=1, target=2)
    assert report.samples == 8 * 128
    assert report.passed


@py_test_mark_slow
def test_pads_hide_a_constant_plaintext():
    transcripts = []
    for index in range(40):
        session = ExamSession(2, trial_rng(3, index))
        session.direct_give_problem(BitString.constant(256, 0), control_rate=0.0)
        transcripts.append(session.transcript)
    report = pad_uniformity_test(transcripts)
    assert report.samples == 40 * 256
    assert report.independence_p_value is None
    assert report.passed


@py_test_mark_slow
def test_students_cannot_read_each_other_at_scale():
    report = student_isolation_test(_honest_transcripts(40, 256, seed=5), reader=2, target=1)
    assert report.samples == 40 * 256
    assert report.passed


@py_test_mark_slow
def test_give_problem_broadcasts_are_uniform():
    length = 256
    ones = samples = 0
    for index in range(40):
        rng = trial_rng(9, index)
        session = ExamSession(3, rng)
        pool, shared = session.share_psi(resources_needed(length, 0.25), 0.25, required=length)
        assert shared.completed
        session.give_problem(pool, BitString.random(length, rng))
        for event in session.transcript.of_kind(EventKind.PUBLIC_BIT):
            if event.payload["purpose"] == "message":
                samples += 1
                ones += event.payload["bit"]
    assert samples == 40 * length
    assert uniformity([samples - ones, ones]).passed


def test_isolation_needs_two_students():
    with pytest.raises(InvalidArgumentError):
        student_isolation_test([], reader=1, target=1)


def test_sweep_diagnostics_flag_non_monotone_cells():
    reports = leakage_sweep(AttackConfig(kind="measure-resend"), [0.3, 0.7], [4, 16], 100, make_rng(5))
    diagnostics = sweep_diagnostics(reports)
    assert diagnostics.as_dict()["detection_non_decreasing_in_length"] is True
    # Leakage at c = 0.7 pushed above c = 0.3 for M = 16.
    reports[3].mean_leaked = reports[1].mean_leaked + 10
    reports[1].leaked_stderr = reports[3].leaked_stderr = 0.0
    assert sweep_diagnostics(reports).leakage_violations == [(16, 0.3, 0.7)]


@py_test_mark_slow
@pytest.mark.parametrize(
    "attack",
    [
        dict(kind="measure-resend"),
        dict(kind="disturbance"),
        dict(kind="entangle-measure", alpha=0.8, beta=0.6),
        dict(kind="intercept-resend"),
    ],
)
@pytest.mark.parametrize("phase", ["share_psi", "share_phi"])
def test_detection_estimates_cover_the_oracle(attack, phase):
    config = AttackConfig(**attack)
    for estimate in [
        estimate_detection(config, phase, 10_000, make_rng(13), basis=basis, workers=2)
        for basis in MeasurementBasis
    ]:
        band = 4 * max(math.sqrt(estimate.oracle * (1 - estimate.oracle) / 10_000), 1e-4)
        assert abs(estimate.probability - estimate.oracle) <= band


@py_test_mark_slow
def test_detection_rises_with_message_length():
    reports = leakage_sweep(
        AttackConfig(kind="measure-resend"),
        [0.2, 0.5, 0.8],
        [8, 32, 128],
        2000,
        make_rng(17),
        workers=2,
    )
    diagnostics = sweep_diagnostics(reports)
    assert diagnostics.detection_non_decreasing_in_length
    assert diagnostics.leakage_non_increasing_in_rate


def test_package_exports_the_chi_square_function():
    import quantum_exam.analysis as analysis
    from quantum_exam.analysis import pads, stats

    assert analysis.uniformity is stats.uniformity
    assert callable(analysis.uniformity)
    assert analysis.pad_uniformity_test is pads.pad_uniformity_test
