# type: ignore

import pytest

from quantum_exam.core import InvalidArgumentError
from quantum_exam.protocol import (
    BitString,
    EventKind,
    ExamPolicy,
    OutcomeStatus,
    RoundCapExceededError,
)
from quantum_exam.util import make_rng


def test_honest_direct_give(session):
    problem = BitString.random(24, make_rng(1))
    outcome = session.direct_give_problem(problem, control_rate=0.5)
    assert outcome.completed
    assert outcome.decoded == {party: problem for party in session.bobs}
    stats = outcome.statistics
    assert stats.message_rounds == len(problem)
    assert stats.control_rounds + stats.message_rounds == stats.rounds
    assert stats.checks_failed == 0


def test_control_rounds_do_not_advance_the_message(session):
    problem = BitString.from_str("10110")
    session.direct_give_problem(problem, control_rate=0.7)
    modes = session.transcript.of_kind(EventKind.MODE_ANNOUNCE)
    controls = [event.m for event in modes if event.payload["mode"] == "control"]
    messages = [event.m for event in modes if event.payload["mode"] == "message"]
    assert messages == list(range(len(problem)))
    assert all(0 <= m <= len(problem) - 1 for m in controls)


def test_zero_control_rate_sends_only_messages(session):
    outcome = session.direct_give_problem(BitString.from_str("0110"), control_rate=0.0)
    assert outcome.statistics.rounds == 4
    assert outcome.statistics.control_rounds == 0


@pytest.mark.parametrize("rate", [-0.1, 1.0, 1.5])
def test_control_rate_must_be_below_one(session, rate):
    with pytest.raises(InvalidArgumentError):
        session.direct_give_problem(BitString.from_str("1"), control_rate=rate)


def test_honest_direct_collect(session):
    solutions = [
        BitString.from_str("1101"),
        BitString.from_str("0"),
        BitString.from_str("101"),
    ]
    outcome = session.direct_collect_solutions(solutions, control_rate=0.4)
    assert outcome.completed
    assert outcome.decoded == dict(zip(session.bobs, solutions))


def test_round_cap_aborts(make_session):
    session = make_session(students=2, policy=ExamPolicy(round_cap_factor=0))
    with pytest.raises(RoundCapExceededError) as e:
        session.direct_give_problem(BitString.from_str("1"), control_rate=0.5)
    assert e.value.outcome.cause == "round-cap"
    assert e.value.outcome.status is OutcomeStatus.ABORTED_EVE_DETECTED
    assert not e.value.outcome.eve_detected
    assert e.value.outcome.out_of_resources
    assert session.transcript[-1].kind is EventKind.ABORT


def test_first_detection_aborts_by_default(make_session):
    session = make_session(students=2, kind="disturbance")
    outcome = session.direct_give_problem(BitString.random(64, make_rng(2)), control_rate=0.5)
    assert outcome.status is OutcomeStatus.ABORTED_EVE_DETECTED
    assert outcome.cause == "eve-detected"
    last, restart = session.transcript[-1], session.transcript[-2]
    assert last.kind is EventKind.ABORT
    assert restart.kind is EventKind.RESTART
    assert restart.payload["failed"] == 1
    stats = outcome.statistics
    assert stats.first_detection_round is not None
    assert stats.message_rounds_before_detection == stats.message_rounds


def test_restart_budget_is_spent_before_abort(make_session):
    session = make_session(
        students=2, kind="disturbance", policy=ExamPolicy(direct_max_restarts=2)
    )
    outcome = session.direct_give_problem(BitString.random(64, make_rng(3)), control_rate=0.5)
    assert outcome.eve_detected
    assert outcome.statistics.restarts == 3
    assert len(session.transcript.of_kind(EventKind.RESTART)) == 3


def test_restart_starts_the_message_over(make_session):
    session = make_session(
        students=2, kind="disturbance", policy=ExamPolicy(direct_max_restarts=50)
    )
    outcome = session.direct_give_problem(BitString.random(32, make_rng(6)), control_rate=0.5)
    restart = session.transcript.of_kind(EventKind.RESTART)[0]
    after = [
        event
        for event in session.transcript.since(restart.seq)
        if event.kind is EventKind.MODE_ANNOUNCE
    ]
    assert after[0].m == 0
    assert outcome.statistics.restarts >= 1


def test_eve_reads_message_rounds_without_controls(make_session):
    session = make_session(students=2, kind="measure-resend")
    problem = BitString.random(32, make_rng(4))
    outcome = session.direct_give_problem(problem, control_rate=0.0)
    assert outcome.completed
    assert outcome.statistics.leaked_bits == len(problem)


def test_leakage_stops_at_detection(make_session):
    session = make_session(students=2, kind="measure-resend")
    outcome = session.direct_give_problem(BitString.random(128, make_rng(5)), control_rate=0.5)
    stats = outcome.statistics
    assert outcome.eve_detected
    assert stats.leaked_bits <= stats.message_rounds_before_detection


def test_masquerade_aborts_direct_collect(make_session):
    session = make_session(students=2, kind="masquerade", impersonate="alice")
    outcome = session.direct_collect_solutions(
        [BitString.from_str("10"), BitString.from_str("01")], control_rate=0.5
    )
    assert outcome.eve_detected
    assert outcome.cause == "masquerade"
    assert outcome.statistics.first_detection_round == 1
