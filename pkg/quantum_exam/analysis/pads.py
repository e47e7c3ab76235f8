from typing import Dict, Iterable, List, Optional, Tuple

from .._compat import ExamModel
from ..core import InvalidArgumentError
from ..protocol import EventKind, Transcript, TranscriptEvent, bob
from .stats import SIGNIFICANCE, independence, uniformity


MIN_SAMPLES = 1000
ISOLATION_BAND = (0.45, 0.55)


def message_pairs(transcript: Transcript) -> List[Tuple[TranscriptEvent, int]]:
    """Every message broadcast with the plaintext bit its sender encoded."""
    plaintext = {
        (event.payload["resource"], event.actor): event.payload["bit"]
        for event in transcript.of_kind(EventKind.ENCODE)
    }
    pairs = []
    for event in transcript.of_kind(EventKind.PUBLIC_BIT):
        if event.payload.get("purpose") != "message":
            continue
        key = (event.payload["resource"], event.actor)
        if key in plaintext:
            pairs.append((event, plaintext[key]))
    return pairs


class PadUniformityReport(ExamModel):
    samples: int
    ones: int
    uniformity_statistic: float
    uniformity_p_value: float
    independence_statistic: Optional[float] = None
    independence_p_value: Optional[float] = None
    significance: float = SIGNIFICANCE
    passed: bool


def pad_uniformity_test(
    transcripts: Iterable[Transcript], sender: Optional[str] = None
) -> PadUniformityReport:
    """Chi-square tests that broadcasts are uniform and independent of plaintext.

    ``sender`` restricts the sample to one party's broadcasts. When every
    plaintext bit is the same the independence test has nothing to compare
    and only uniformity decides.
    """
    table = [[0, 0], [0, 0]]
    for transcript in transcripts:
        for event, plain in message_pairs(transcript):
            if sender is None or event.actor == sender:
                table[plain][event.payload["bit"]] += 1
    samples = sum(map(sum, table))
    if samples < MIN_SAMPLES:
        raise InvalidArgumentError(
            f"Pad tests need at least {MIN_SAMPLES} broadcast bits, got {samples}"
        )
    counts = [table[0][0] + table[1][0], table[0][1] + table[1][1]]
    fit = uniformity(counts)
    report: Dict[str, object] = dict(
        samples=samples,
        ones=counts[1],
        uniformity_statistic=fit.statistic,
        uniformity_p_value=fit.p_value,
    )
    passed = fit.passed
    if all(sum(row) for row in table) and all(counts):
        test = independence(table)
        report.update(independence_statistic=test.statistic, independence_p_value=test.p_value)
        passed = passed and test.passed
    return PadUniformityReport(passed=passed, **report)


class IsolationReport(ExamModel):
    reader: int
    target: int
    samples: int
    correct: int
    accuracy: float
    passed: bool


def student_isolation_test(
    transcripts: Iterable[Transcript], reader: int, target: int
) -> IsolationReport:
    """Bob ``reader`` decodes Bob ``target``'s broadcasts with their own outcomes."""
    if reader == target:
        raise InvalidArgumentError("A student reading their own broadcasts is not isolation")
    reader_party, target_party = bob(reader), bob(target)
    samples = correct = 0
    for transcript in transcripts:
        outcomes = {
            event.payload["resource"]: event.payload["outcome"]
            for event in transcript.of_kind(EventKind.MEASUREMENT)
            if event.actor == reader_party and event.payload["basis"] == "Bz"
        }
        for event, plain in message_pairs(transcript):
            pad = outcomes.get(event.payload["resource"])
            if event.actor != target_party or pad is None:
                continue
            samples += 1
            correct += (event.payload["bit"] ^ pad) == plain
    if not samples:
        raise InvalidArgumentError(f"No broadcasts of {target_party} that {reader_party} can read")
    accuracy = correct / samples
    low, high = ISOLATION_BAND
    return IsolationReport(
        reader=reader,
        target=target,
        samples=samples,
        correct=correct,
        accuracy=accuracy,
        passed=low <= accuracy <= high,
    )
