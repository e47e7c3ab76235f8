from .attacks import (
    READING_ATTACKS,
    Eavesdropper,
    EveScore,
    ForgedIdentity,
    InFlightQubit,
    masquerade,
    tap_disturbance,
    tap_entangle_measure,
    tap_intercept_resend,
    tap_measure_resend,
)
from .config import QUANTUM_ATTACKS, AttackConfig, AttackConfigError, AttackKind
from .knowledge import BitEstimate, EveKnowledge, EveRoundRecord
