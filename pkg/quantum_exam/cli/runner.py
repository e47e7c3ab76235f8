import functools
import logging
import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .._compat import ExamModel, model_dump
from ..adversary import Eavesdropper
from ..analysis import per_check_detection, wilson_interval, write_csv, write_json
from ..analysis.trials import map_trials
from ..protocol import (
    ALICE,
    BitString,
    EventKind,
    ExamSession,
    OutcomeStatus,
    OutcomeSummary,
    ProtocolAbortError,
    ProtocolOutcome,
    RESOURCE_CAUSES,
    ResourceKind,
    detected,
    resources_needed,
)
from ..util import make_rng, seeded_ulid, trial_rng
from .config import Phase, ProtocolFamily, ScenarioConfig, dump_config


log = logging.getLogger(__name__)

TRANSCRIPT_FILE = "transcript.jsonl"
SUMMARY_FILE = "summary.json"
ESTIMATES_FILE = "estimates.csv"

EXAM_PERIOD = "exam-period"


class TrialSummary(ExamModel):
    trial: int
    status: OutcomeStatus
    cause: Optional[str] = None
    decode_errors: int = 0
    phases: List[OutcomeSummary] = []

    @property
    def eve_detected(self) -> bool:
        return detected(self.status, self.cause)


class RunReport(ExamModel):
    """Everything ``run_scenario`` learned. ``duration`` is wall-clock seconds
    and stays out of summary.json."""

    run_id: str
    config: Dict[str, Any]
    status_counts: Dict[str, int]
    trials: List[TrialSummary]
    eve_detections: int = 0
    artifacts: Dict[str, str] = {}
    duration: Optional[float] = None

    @property
    def eve_detected(self) -> bool:
        return self.eve_detections > 0

    @property
    def resource_error(self) -> bool:
        return any(trial.cause in RESOURCE_CAUSES for trial in self.trials)

    def summary(self) -> Dict[str, Any]:
        data = model_dump(self)
        data.pop("duration", None)
        return data


def _decode_errors(outcome: ProtocolOutcome, expected: Dict[str, BitString]) -> int:
    errors = 0
    for party, bits in expected.items():
        got = outcome.decoded.get(party)
        if got is None:
            continue
        errors += sum(a != b for a, b in zip(got, bits)) + abs(len(got) - len(bits))
    return errors


def _share_and_move(
    session: ExamSession,
    config: ScenarioConfig,
    kind: ResourceKind,
    length: int,
    move,
) -> List[ProtocolOutcome]:
    count = resources_needed(length, config.check_fraction)
    pool, shared = session.share_with_restarts(kind, count, config.check_fraction, required=length)
    if not shared.completed or move is None:
        return [shared]
    return [shared, move(pool)]


def _phases(
    session: ExamSession,
    config: ScenarioConfig,
    problem: BitString,
    solutions: Sequence[BitString],
) -> List[Tuple[str, Any]]:
    """The steps of the configured scenario, in order."""
    if config.protocol is ProtocolFamily.DIRECT:
        give = ("give", lambda: [session.direct_give_problem(problem, config.control_rate)])
        collect = (
            "collect",
            lambda: [session.direct_collect_solutions(solutions, config.control_rate)],
        )
    else:
        give = (
            "give",
            lambda: _share_and_move(
                session, config, ResourceKind.PSI, len(problem),
                lambda pool: session.give_problem(pool, problem),
            ),
        )
        collect = (
            "collect",
            lambda: _share_and_move(
                session, config, ResourceKind.PHI, max(len(s) for s in solutions),
                lambda pool: session.collect_solutions(pool, solutions),
            ),
        )
    steps = {
        Phase.GIVE: [give],
        Phase.COLLECT: [collect],
        Phase.FULL_EXAM: [give, (EXAM_PERIOD, None), collect],
        Phase.SHARE_PSI: [
            ("share_psi", lambda: _share_and_move(
                session, config, ResourceKind.PSI, config.problem_len, None)),
        ],
        Phase.SHARE_PHI: [
            ("share_phi", lambda: _share_and_move(
                session, config, ResourceKind.PHI, config.solution_len, None)),
        ],
    }
    return steps[config.phase]


def run_trial(config: ScenarioConfig, index: int) -> Tuple[TrialSummary, str]:
    """Run trial ``index`` of ``config``; returns its summary and transcript."""
    rng = trial_rng(config.seed, index)
    attack = config.attack_config()
    eve = Eavesdropper(attack, config.students) if attack.active else None
    session = ExamSession(config.students, rng, adversary=eve, policy=config.policy())
    problem = BitString.random(config.problem_len, rng)
    solutions = [BitString.random(config.solution_len, rng) for _ in range(config.students)]
    expected_give = {party: problem for party in session.bobs}
    expected_collect = dict(zip(session.bobs, solutions))

    outcomes: List[ProtocolOutcome] = []
    decode_errors = 0
    for name, step in _phases(session, config, problem, solutions):
        if step is None:
            session.classical.post(0, ALICE, EventKind.ANNOUNCEMENT, marker=name)
            continue
        try:
            produced = step()
        except ProtocolAbortError as e:
            produced = [e.outcome]
        outcomes.extend(produced)
        last = produced[-1]
        if last.completed and last.phase in ("give", "direct_give"):
            decode_errors += _decode_errors(last, expected_give)
        if last.completed and last.phase in ("collect", "direct_collect"):
            decode_errors += _decode_errors(last, expected_collect)
        if not last.completed:
            break

    final = outcomes[-1]
    summary = TrialSummary(
        trial=index,
        status=final.status,
        cause=final.cause,
        decode_errors=decode_errors,
        phases=[outcome.summary() for outcome in outcomes],
    )
    return summary, session.transcript.dumps()


def _trial_worker(config: ScenarioConfig, root_seed: int, index: int) -> Tuple[TrialSummary, str]:
    summary, transcript = run_trial(config, index)
    # Only trial 0's transcript is written, so the rest need not cross processes.
    return summary, transcript if index == 0 else ""


def estimate_rows(config: ScenarioConfig, summaries: Sequence[TrialSummary]) -> List[Dict[str, Any]]:
    """One row per phase: pooled check failures with a Wilson interval."""
    attack = config.attack_config()
    rows: Dict[str, Dict[str, Any]] = {}
    for summary in summaries:
        for phase in summary.phases:
            row = rows.setdefault(
                phase.phase,
                dict(phase=phase.phase, runs=0, checks=0, failed_checks=0, aborted_runs=0, leaked_bits=0),
            )
            row["runs"] += 1
            row["checks"] += phase.statistics.get("checks", 0)
            row["failed_checks"] += phase.statistics.get("checks_failed", 0)
            row["leaked_bits"] += phase.statistics.get("leaked_bits", 0)
            row["aborted_runs"] += phase.eve_detected
    result = []
    for name, row in rows.items():
        low, high = wilson_interval(row["failed_checks"], row["checks"])
        row.update(
            attack=attack.kind.value,
            failure_rate=row["failed_checks"] / row["checks"] if row["checks"] else 0.0,
            low=low,
            high=high,
            oracle_per_check=per_check_detection(attack, name, config.students),
            abort_rate=row["aborted_runs"] / row["runs"],
            mean_leaked_bits=row["leaked_bits"] / row["runs"],
        )
        result.append(row)
    return result


def run_scenario(config: ScenarioConfig, write: bool = True) -> RunReport:
    """Run every trial of ``config`` and write its artifacts under ``config.out``."""
    started = time.perf_counter()
    worker = functools.partial(_trial_worker, config)
    results = map_trials(worker, config.seed, config.trials, workers=config.workers)
    summaries = [summary for summary, _ in results]
    counts: Dict[str, int] = {}
    for summary in summaries:
        counts[summary.status.value] = counts.get(summary.status.value, 0) + 1

    artifacts: Dict[str, str] = {}
    if write:
        out = config.out_dir
        artifacts = {
            "transcript": str(out / TRANSCRIPT_FILE),
            "summary": str(out / SUMMARY_FILE),
            "estimates": str(out / ESTIMATES_FILE),
        }
    report = RunReport(
        run_id=str(seeded_ulid(make_rng(config.seed))),
        config=dump_config(config),
        status_counts=counts,
        trials=summaries,
        eve_detections=sum(summary.eve_detected for summary in summaries),
        artifacts=artifacts,
    )
    if write:
        out.mkdir(parents=True, exist_ok=True)
        (out / TRANSCRIPT_FILE).write_text(results[0][1], encoding="utf-8")
        write_json(out / SUMMARY_FILE, report.summary())
        write_csv(out / ESTIMATES_FILE, estimate_rows(config, summaries))
    report.duration = time.perf_counter() - started
    log.info(
        "Ran %s trial(s) of %s/%s in %.2fs: %s",
        config.trials, config.protocol, config.phase, report.duration, counts,
    )
    return report
