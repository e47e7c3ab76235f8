import functools
import logging
from typing import List, Optional

from .._compat import ExamModel
from ..adversary import AttackConfig, AttackKind, Eavesdropper
from ..core import InvalidArgumentError, MeasurementBasis
from ..protocol import ExamSession
from ..util import RandomSource, coin, trial_rng
from .oracle import detection_oracle, per_check_detection, resource_kind_for
from .stats import wilson_interval
from .trials import map_trials


log = logging.getLogger(__name__)

MIN_TRIALS = 100


class DetectionEstimate(ExamModel):
    """Monte Carlo detection rate of one attack on single checks.

    ``basis`` is "Bz", "Bx" or "random" (a fair coin per check, like control
    rounds). ``oracle`` is the exact value the estimate should converge to.
    """

    attack: AttackKind
    phase: str
    basis: str
    students: int
    trials: int
    detections: int
    probability: float
    low: float
    high: float
    half_width: float
    oracle: Optional[float] = None


def _detection_trial(
    attack: AttackConfig,
    phase: str,
    basis: Optional[MeasurementBasis],
    students: int,
    root_seed: int,
    index: int,
) -> bool:
    rng = trial_rng(root_seed, index)
    eve = Eavesdropper(attack, students) if attack.active else None
    session = ExamSession(students, rng, adversary=eve)
    if basis is None:
        basis = MeasurementBasis.Z if coin(rng, 0.5) else MeasurementBasis.X
    return not session.spot_check(resource_kind_for(phase), basis)


def estimate_detection(
    attack: AttackConfig,
    phase: str,
    trials: int,
    rng: RandomSource,
    basis: Optional[MeasurementBasis] = None,
    students: int = 2,
    workers: int = 1,
) -> DetectionEstimate:
    """Run ``trials`` independent single-check experiments against ``attack``."""
    if trials < MIN_TRIALS:
        raise InvalidArgumentError(
            f"Detection estimates need at least {MIN_TRIALS} trials, got {trials}"
        )
    resource_kind_for(phase)
    root_seed = int(rng.integers(0, 2**63 - 1))
    trial = functools.partial(_detection_trial, attack, phase, basis, students)
    detections = sum(map_trials(trial, root_seed, trials, workers=workers))
    low, high = wilson_interval(detections, trials)
    if basis is None:
        oracle = per_check_detection(attack, phase, students)
    else:
        oracle = detection_oracle(attack, phase, basis, students)
    estimate = DetectionEstimate(
        attack=attack.kind,
        phase=phase,
        basis=basis.value if basis is not None else "random",
        students=students,
        trials=trials,
        detections=detections,
        probability=detections / trials,
        low=low,
        high=high,
        half_width=(high - low) / 2,
        oracle=oracle,
    )
    log.info(
        "%s in %s (%s): %s/%s detected, oracle %.4f",
        attack.kind, phase, estimate.basis, detections, trials, oracle,
    )
    return estimate


def detection_table(
    attack: AttackConfig,
    phase: str,
    trials: int,
    rng: RandomSource,
    students: int = 2,
    workers: int = 1,
) -> List[DetectionEstimate]:
    return [
        estimate_detection(attack, phase, trials, rng, basis, students, workers)
        for basis in MeasurementBasis
    ]
