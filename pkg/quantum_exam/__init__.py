from .adversary import AttackConfig, AttackConfigError, AttackKind, Eavesdropper
from .analysis import (
    detection_oracle,
    estimate_detection,
    leakage_sweep,
    pad_uniformity_test,
    student_isolation_test,
    wilson_interval,
)
from .cli import (
    ConfigError,
    ScenarioConfig,
    load_config,
    replay,
    run_scenario,
    verify_transcript,
)
from .core import (
    ConsistencyError,
    InvalidArgumentError,
    MeasurementBasis,
    QuantumStateError,
    QubitBudgetError,
    ShiftMask,
    StateVector,
    ghz_prepare,
    measure,
    outcome_distribution,
)
from .protocol import (
    BitString,
    ExamPolicy,
    ExamSession,
    MasqueradeDetectedError,
    OutcomeStatus,
    ProtocolAbortError,
    ProtocolOutcome,
    ResourceKind,
    Transcript,
    TranscriptParseError,
)
