from enum import Enum
from typing import Any, List, Optional

from .._compat import ExamModel, validator
from ..core import NORM_TOLERANCE
from ..settings import ERRORS_URL


class AttackConfigError(ValueError):
    """Raised when an attack's parameters do not fit its kind."""


class AttackKind(str, Enum):
    NONE = "none"
    MEASURE_RESEND = "measure-resend"
    DISTURBANCE = "disturbance"
    ENTANGLE_MEASURE = "entangle-measure"
    INTERCEPT_RESEND = "intercept-resend"
    MASQUERADE = "masquerade"

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, value: Any) -> "AttackKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).strip().lower().replace("_", "-"))


# Qubit taps; masquerade lives on the classical channel instead.
QUANTUM_ATTACKS = frozenset(
    {
        AttackKind.MEASURE_RESEND,
        AttackKind.DISTURBANCE,
        AttackKind.ENTANGLE_MEASURE,
        AttackKind.INTERCEPT_RESEND,
    }
)


def _parse_int_list(value: Any) -> Optional[List[int]]:
    if value is None or isinstance(value, list):
        return value
    if isinstance(value, (tuple, set)):
        return sorted(int(v) for v in value)
    text = str(value).strip()
    if text in ("", "all"):
        return None
    return [int(part) for part in text.split(",") if part.strip()]


class AttackConfig(ExamModel):
    """Which attack Eve runs, where, and with which parameters.

    ``rounds`` limits the attack to the listed resource serials (all when unset),
    ``tap_rate`` is the chance that an eligible round is attacked at all, and
    ``targets`` lists the Bobs whose qubits are tapped (all Bobs when unset, Bob 1
    for the entangle-measure attack).
    """

    kind: AttackKind = AttackKind.NONE
    rounds: Optional[List[int]] = None
    tap_rate: float = 1.0
    targets: Optional[List[int]] = None
    alpha: Optional[complex] = None
    beta: Optional[complex] = None
    intercept_mask: Optional[List[int]] = None
    impersonate: Optional[str] = None

    @validator("kind", pre=True)
    def parse_kind(cls, value):
        return AttackKind.parse(value)

    @validator("rounds", "targets", pre=True)
    def parse_int_lists(cls, value):
        return _parse_int_list(value)

    @validator("intercept_mask", pre=True)
    def parse_mask(cls, value):
        if value is None or isinstance(value, list):
            return value
        text = str(value).strip()
        if text in ("", "random"):
            return None
        return [int(ch) for ch in text]

    @validator("alpha", "beta", pre=True)
    def parse_complex(cls, value):
        if value is None or isinstance(value, complex):
            return value
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return complex(float(value[0]), float(value[1]))
        return complex(str(value).replace(" ", "")) if isinstance(value, str) else complex(value)

    @validator("tap_rate")
    def check_tap_rate(cls, value):
        if not 0.0 <= value <= 1.0:
            raise ValueError("tap_rate must lie in [0, 1]")
        return value

    def __init__(self, **data: Any) -> None:
        super().__init__(**data)
        self._check_parameters()

    def _check_parameters(self) -> None:
        kind = self.kind
        needs_amplitudes = kind is AttackKind.ENTANGLE_MEASURE
        has_amplitudes = self.alpha is not None or self.beta is not None
        if needs_amplitudes and (self.alpha is None or self.beta is None):
            raise AttackConfigError(
                f"The {kind} attack needs both alpha and beta. Docs: {ERRORS_URL}#E3"
            )
        if has_amplitudes and not needs_amplitudes:
            raise AttackConfigError(f"alpha and beta do not apply to the {kind} attack")
        if needs_amplitudes:
            norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
            if abs(norm - 1.0) > NORM_TOLERANCE:
                raise AttackConfigError(
                    f"|alpha|^2 + |beta|^2 must be 1, got {norm!r}. "
                    f"Docs: {ERRORS_URL}#E3"
                )
        if self.intercept_mask is not None:
            if kind is not AttackKind.INTERCEPT_RESEND:
                raise AttackConfigError(
                    f"intercept_mask does not apply to the {kind} attack"
                )
            if any(bit not in (0, 1) for bit in self.intercept_mask):
                raise AttackConfigError("intercept_mask holds bits only")
        if kind is AttackKind.MASQUERADE and not self.impersonate:
            raise AttackConfigError("The masquerade attack needs a party to impersonate")
        if self.impersonate and kind is not AttackKind.MASQUERADE:
            raise AttackConfigError(f"impersonate does not apply to the {kind} attack")

    @property
    def active(self) -> bool:
        return self.kind is not AttackKind.NONE

    def target_bobs(self, students: int) -> List[int]:
        if self.targets is not None:
            chosen = sorted(set(self.targets))
        elif self.kind is AttackKind.ENTANGLE_MEASURE:
            chosen = [1]
        else:
            chosen = list(range(1, students + 1))
        invalid = [n for n in chosen if not 1 <= n <= students]
        if invalid:
            raise AttackConfigError(
                f"Targets {invalid} are not students of a {students}-student exam"
            )
        return chosen

    def extra_qubits(self, students: int) -> int:
        """Qubits the attack adds to each resource's register."""
        if self.kind is AttackKind.ENTANGLE_MEASURE:
            return len(self.target_bobs(students))
        if self.kind is AttackKind.INTERCEPT_RESEND:
            return students + 1
        return 0

    @property
    def flip_probability(self) -> float:
        """|beta|^2 of the entangle-measure attack, zero otherwise."""
        if self.beta is None:
            return 0.0
        return abs(self.beta) ** 2
