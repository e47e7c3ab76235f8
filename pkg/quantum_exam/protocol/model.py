import dataclasses
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Sequence

from .._compat import ExamModel
from ..core import (
    InvalidArgumentError,
    MeasurementBasis,
    ShiftMask,
    StateVector,
    measure,
)
from ..util import RandomSource, bits_to_str, random_bits, str_to_bits


ALICE = "alice"


def bob(n: int) -> str:
    return f"bob{n}"


def bob_index(party: str) -> int:
    if not party.startswith("bob"):
        raise InvalidArgumentError(f"{party!r} is not a student")
    return int(party[3:])


def parties(students: int) -> List[str]:
    return [ALICE] + [bob(n) for n in range(1, students + 1)]


class ResourceKind(str, Enum):
    PSI = "psi"
    PHI = "phi"

    def __str__(self):
        return self.value


class OperatingMode(str, Enum):
    CONTROL = "control"
    MESSAGE = "message"

    def __str__(self):
        return self.value


class OutcomeStatus(str, Enum):
    COMPLETED = "Completed"
    ABORTED_EVE_DETECTED = "AbortedEveDetected"
    RESTARTED = "Restarted"

    def __str__(self):
        return self.value


# Abort causes that mean a run ran out of room rather than caught Eve.
RESOURCE_CAUSES = frozenset({"round-cap", "insufficient-resources", "pool-exhausted"})


def detected(status: OutcomeStatus, cause: Optional[str]) -> bool:
    return status is OutcomeStatus.ABORTED_EVE_DETECTED and cause not in RESOURCE_CAUSES


@dataclasses.dataclass(frozen=True)
class BitString:
    """An ordered string of secret bits: Alice's problem or one Bob's solution."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise InvalidArgumentError(f"Bit strings hold only 0 and 1, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        try:
            return cls(bits=tuple(str_to_bits(text)))
        except ValueError as e:
            raise InvalidArgumentError(str(e)) from e

    @classmethod
    def random(cls, length: int, rng: RandomSource) -> "BitString":
        return cls(bits=tuple(random_bits(rng, length)))

    @classmethod
    def constant(cls, length: int, bit: int) -> "BitString":
        return cls(bits=(bit,) * length)

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __getitem__(self, index: int) -> int:
        return self.bits[index]

    def __str__(self) -> str:
        return bits_to_str(self.bits)


def default_ownership(students: int) -> Dict[str, int]:
    return {party: qubit for qubit, party in enumerate(parties(students))}


@dataclasses.dataclass
class EntangledResource:
    """One (N+1)-qubit state shared by Alice and the Bobs.

    ``index`` is the position m in the ordered pool, ``serial`` is unique within
    a session. Resources are owned by exactly one protocol run: channel taps and
    measurements replace ``state`` in place.
    """

    index: int
    serial: int
    kind: ResourceKind
    state: StateVector
    ownership: Dict[str, int]
    mask: Optional[ShiftMask] = None
    eve_qubits: Dict[str, int] = dataclasses.field(default_factory=dict)
    measured: Dict[str, int] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        students = len(self.ownership) - 1
        if sorted(self.ownership) != sorted(parties(students)):
            raise InvalidArgumentError(
                f"Ownership must name Alice and every Bob, got {sorted(self.ownership)}"
            )
        if sorted(self.ownership.values()) != list(range(students + 1)):
            raise InvalidArgumentError(
                "Ownership must map the parties one-to-one onto qubits 0..N"
            )
        if self.kind is ResourceKind.PSI and self.mask is not None:
            raise InvalidArgumentError("Psi resources carry no mask")
        if self.kind is ResourceKind.PHI:
            if self.mask is None or len(self.mask) != students:
                raise InvalidArgumentError(
                    f"Phi resources need a {students}-bit mask"
                )

    @property
    def students(self) -> int:
        return len(self.ownership) - 1

    def mask_bits(self) -> List[int]:
        if self.mask is None:
            return [0] * self.students
        return list(self.mask.bits)

    def measure_party(
        self, party: str, basis: MeasurementBasis, rng: RandomSource
    ) -> int:
        if party in self.measured:
            raise InvalidArgumentError(
                f"{party} already measured resource {self.serial}"
            )
        result = measure(self.state, self.ownership[party], basis, rng)
        self.state = result.post_state
        self.measured[party] = result.outcome
        return result.outcome


@dataclasses.dataclass
class RunStatistics:
    rounds: int = 0
    message_rounds: int = 0
    control_rounds: int = 0
    checks_passed: int = 0
    checks_failed: int = 0
    restarts: int = 0
    first_detection_round: Optional[int] = None
    message_rounds_before_detection: int = 0
    eve_guesses: int = 0
    eve_correct: int = 0
    leaked_bits: int = 0

    @property
    def checks(self) -> int:
        return self.checks_passed + self.checks_failed

    @property
    def error_rate(self) -> float:
        return self.checks_failed / self.checks if self.checks else 0.0

    def record_check(self, passed: bool) -> None:
        if passed:
            self.checks_passed += 1
        else:
            self.checks_failed += 1
            if self.first_detection_round is None:
                self.first_detection_round = self.rounds

    def as_dict(self) -> Dict[str, Any]:
        data = dataclasses.asdict(self)
        data["checks"] = self.checks
        data["error_rate"] = self.error_rate
        return data


class OutcomeSummary(ExamModel):
    phase: str
    status: OutcomeStatus
    cause: Optional[str] = None
    decoded: Dict[str, str] = {}
    statistics: Dict[str, Any] = {}

    @property
    def eve_detected(self) -> bool:
        return detected(self.status, self.cause)


@dataclasses.dataclass
class ProtocolOutcome:
    phase: str
    status: OutcomeStatus
    transcript: Any
    decoded: Dict[str, BitString] = dataclasses.field(default_factory=dict)
    recipients: Sequence[str] = ()
    statistics: RunStatistics = dataclasses.field(default_factory=RunStatistics)
    cause: Optional[str] = None

    def __post_init__(self):
        if self.status is OutcomeStatus.COMPLETED:
            missing = [r for r in self.recipients if r not in self.decoded]
            if missing:
                raise InvalidArgumentError(
                    f"A completed {self.phase} outcome lacks payloads for {missing}"
                )

    @property
    def completed(self) -> bool:
        return self.status is OutcomeStatus.COMPLETED

    @property
    def eve_detected(self) -> bool:
        return detected(self.status, self.cause)

    @property
    def out_of_resources(self) -> bool:
        return self.cause in RESOURCE_CAUSES

    def summary(self) -> OutcomeSummary:
        return OutcomeSummary(
            phase=self.phase,
            status=self.status,
            cause=self.cause,
            decoded={name: str(bits) for name, bits in self.decoded.items()},
            statistics=self.statistics.as_dict(),
        )
