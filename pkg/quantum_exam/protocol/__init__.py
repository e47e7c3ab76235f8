from .channel import (
    ClassicalChannel,
    Forger,
    MasqueradeDetectedError,
    ProtocolError,
    QuantumChannel,
    Tapper,
)
from .model import (
    ALICE,
    BitString,
    EntangledResource,
    OperatingMode,
    OutcomeStatus,
    OutcomeSummary,
    ProtocolOutcome,
    RESOURCE_CAUSES,
    ResourceKind,
    RunStatistics,
    bob,
    bob_index,
    default_ownership,
    detected,
    parties,
)
from .policy import DefaultPolicy, ExamPolicy, check_count, resources_needed
from .session import (
    PROBLEM_SENT,
    SOLUTIONS_COLLECTED,
    ExamSession,
    InsufficientResourcesError,
    ProtocolAbortError,
    RoundCapExceededError,
    check_passes,
)
from .transcript import (
    PUBLIC_KINDS,
    EventKind,
    Transcript,
    TranscriptEvent,
    TranscriptParseError,
)
