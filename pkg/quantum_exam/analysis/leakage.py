import dataclasses
import functools
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .._compat import ExamModel
from ..adversary import AttackConfig, AttackKind, Eavesdropper
from ..core import InvalidArgumentError
from ..protocol import BitString, ExamSession, ProtocolOutcome, RoundCapExceededError
from ..util import RandomSource, trial_rng
from .oracle import per_check_detection
from .stats import wilson_interval
from .trials import map_trials


log = logging.getLogger(__name__)

DEFAULT_CONTROL_RATES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
DEFAULT_LENGTHS = (8, 16, 32, 64, 128)
DEFAULT_TRIALS = 1000
DIRECT_PHASES = ("direct_give", "direct_collect")

MODEL_LABEL = "geometric model"


@dataclasses.dataclass(frozen=True)
class GeometricModel:
    """Our own quantification of how fast a persistent Eve gets caught.

    Each round is a message round with probability 1 - c and a detecting
    control round with probability c * p; ``q`` is the chance that the next
    decisive round carries a message.
    """

    control_rate: float
    per_check: float
    length: int
    q: float
    mean_rounds: float
    truncated_mean_rounds: float
    detection: float
    label: str = MODEL_LABEL


def geometric_model(control_rate: float, per_check: float, length: int) -> GeometricModel:
    catch = control_rate * per_check
    q = (1.0 - control_rate) / (1.0 - control_rate + catch)
    mean = (1.0 - control_rate) / catch if catch > 0 else math.inf
    if q >= 1.0:
        truncated = float(length)
    else:
        truncated = q * (1.0 - q**length) / (1.0 - q)
    return GeometricModel(
        control_rate=control_rate,
        per_check=per_check,
        length=length,
        q=q,
        mean_rounds=mean,
        truncated_mean_rounds=truncated,
        detection=1.0 - q**length,
    )


class LeakageReport(ExamModel):
    """One (c, M) cell of a leakage sweep.

    Leaked bits are Eve's correct plaintext guesses from rounds she tapped,
    counted up to the first failed check.
    """

    attack: AttackKind
    phase: str
    control_rate: float
    length: int
    trials: int
    mean_leaked: float
    leaked_stderr: float
    detections: int
    detection_probability: float
    detection_low: float
    detection_high: float
    mean_rounds_before_detection: float
    per_check: float
    geometric_mean_rounds: Optional[float]
    geometric_truncated_mean_rounds: float
    geometric_detection: float
    geometric_label: str = MODEL_LABEL


def _run_direct(
    session: ExamSession, phase: str, length: int, control_rate: float, rng: RandomSource
) -> ProtocolOutcome:
    try:
        if phase == "direct_give":
            return session.direct_give_problem(BitString.random(length, rng), control_rate)
        solutions = [BitString.random(length, rng) for _ in range(session.students)]
        return session.direct_collect_solutions(solutions, control_rate)
    except RoundCapExceededError as e:
        return e.outcome


def _leakage_trial(
    attack: AttackConfig,
    phase: str,
    control_rate: float,
    length: int,
    students: int,
    root_seed: int,
    index: int,
) -> Tuple[bool, int, int]:
    rng = trial_rng(root_seed, index)
    eve = Eavesdropper(attack, students) if attack.active else None
    session = ExamSession(students, rng, adversary=eve)
    outcome = _run_direct(session, phase, length, control_rate, rng)
    stats = outcome.statistics
    return outcome.eve_detected, stats.leaked_bits, stats.message_rounds_before_detection


def leakage_cell(
    attack: AttackConfig,
    control_rate: float,
    length: int,
    trials: int,
    root_seed: int,
    phase: str = "direct_give",
    students: int = 2,
    workers: int = 1,
) -> LeakageReport:
    if not 0.0 <= control_rate < 1.0:
        raise InvalidArgumentError(f"Control rate must lie in [0, 1), got {control_rate}")
    trial = functools.partial(_leakage_trial, attack, phase, control_rate, length, students)
    results = map_trials(trial, root_seed, trials, workers=workers)
    detected = np.array([r[0] for r in results], dtype=bool)
    leaked = np.array([r[1] for r in results], dtype=float)
    before = np.array([r[2] for r in results], dtype=float)
    detections = int(detected.sum())
    low, high = wilson_interval(detections, trials)
    per_check = per_check_detection(attack, phase, students)
    model = geometric_model(control_rate, per_check, length)
    return LeakageReport(
        attack=attack.kind,
        phase=phase,
        control_rate=control_rate,
        length=length,
        trials=trials,
        mean_leaked=float(leaked.mean()),
        leaked_stderr=float(leaked.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
        detections=detections,
        detection_probability=detections / trials,
        detection_low=low,
        detection_high=high,
        mean_rounds_before_detection=float(before.mean()),
        per_check=per_check,
        geometric_mean_rounds=None if math.isinf(model.mean_rounds) else model.mean_rounds,
        geometric_truncated_mean_rounds=model.truncated_mean_rounds,
        geometric_detection=model.detection,
    )


def leakage_sweep(
    attack: AttackConfig,
    control_rates: Sequence[float] = DEFAULT_CONTROL_RATES,
    lengths: Sequence[int] = DEFAULT_LENGTHS,
    trials: int = DEFAULT_TRIALS,
    rng: Optional[RandomSource] = None,
    phase: str = "direct_give",
    students: int = 2,
    workers: int = 1,
) -> List[LeakageReport]:
    """Leakage and detection over a grid of control rates and message lengths."""
    if phase not in DIRECT_PHASES:
        raise InvalidArgumentError(f"Leakage sweeps run the direct programs, not {phase!r}")
    if rng is None:
        raise InvalidArgumentError("leakage_sweep needs a seeded random source")
    reports = []
    for control_rate in control_rates:
        for length in lengths:
            root_seed = int(rng.integers(0, 2**63 - 1))
            report = leakage_cell(
                attack, control_rate, length, trials, root_seed, phase, students, workers
            )
            log.info(
                "c=%s M=%s: leaked %.3f, detected %.3f",
                control_rate, length, report.mean_leaked, report.detection_probability,
            )
            reports.append(report)
    return reports


@dataclasses.dataclass
class SweepDiagnostics:
    """Monotonicity checks of a sweep, each violation beyond confidence bands."""

    detection_violations: List[Tuple[float, int, int]] = dataclasses.field(default_factory=list)
    leakage_violations: List[Tuple[int, float, float]] = dataclasses.field(default_factory=list)

    @property
    def detection_non_decreasing_in_length(self) -> bool:
        return not self.detection_violations

    @property
    def leakage_non_increasing_in_rate(self) -> bool:
        return not self.leakage_violations

    def as_dict(self) -> Dict[str, object]:
        return {
            "detection_non_decreasing_in_length": self.detection_non_decreasing_in_length,
            "leakage_non_increasing_in_rate": self.leakage_non_increasing_in_rate,
            "detection_violations": [list(v) for v in self.detection_violations],
            "leakage_violations": [list(v) for v in self.leakage_violations],
        }


def sweep_diagnostics(reports: Sequence[LeakageReport], bands: float = 3.0) -> SweepDiagnostics:
    """Flag cells where detection falls with M at fixed c, or leakage rises with
    c at fixed M, by more than the cells' uncertainty allows."""
    diagnostics = SweepDiagnostics()
    by_rate: Dict[float, List[LeakageReport]] = {}
    by_length: Dict[int, List[LeakageReport]] = {}
    for report in reports:
        by_rate.setdefault(report.control_rate, []).append(report)
        by_length.setdefault(report.length, []).append(report)

    for rate, cells in by_rate.items():
        cells = sorted(cells, key=lambda r: r.length)
        for shorter, longer in zip(cells, cells[1:]):
            if longer.detection_high < shorter.detection_low:
                diagnostics.detection_violations.append((rate, shorter.length, longer.length))

    for length, cells in by_length.items():
        cells = sorted(cells, key=lambda r: r.control_rate)
        for lower, higher in zip(cells, cells[1:]):
            slack = bands * math.hypot(lower.leaked_stderr, higher.leaked_stderr)
            if higher.mean_leaked > lower.mean_leaked + slack:
                diagnostics.leakage_violations.append(
                    (length, lower.control_rate, higher.control_rate)
                )
    return diagnostics
