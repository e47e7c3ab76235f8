import dataclasses
import math

from ..settings import QUBIT_CAP


@dataclasses.dataclass(frozen=True)
class DefaultPolicy:
    """Tunable constants of the sharing and direct programs.

    error_threshold: the "predetermined small value" a sharing phase's failed
    check rate may reach without a restart. Zero suits the noiseless channel.
    """

    error_threshold: float = 0.0
    check_fraction: float = 0.25
    max_restarts: int = 3
    direct_max_restarts: int = 0
    round_cap_factor: int = 64
    qubit_cap: int = QUBIT_CAP

    def round_cap(self, message_length: int, control_rate: float) -> int:
        return math.ceil(self.round_cap_factor * message_length / (1.0 - control_rate))


ExamPolicy = DefaultPolicy


def check_count(count: int, fraction: float) -> int:
    """Number of resources a sharing phase sacrifices to security checks."""
    return max(1, math.ceil(count * fraction))


def resources_needed(length: int, fraction: float) -> int:
    """Smallest distribution count that leaves ``length`` resources after checks."""
    count = max(length + 1, math.ceil(length / (1.0 - fraction)))
    while count - check_count(count, fraction) < length:
        count += 1
    return count
