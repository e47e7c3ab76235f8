from .detection import DetectionEstimate, detection_table, estimate_detection
from .leakage import (
    DEFAULT_CONTROL_RATES,
    DEFAULT_LENGTHS,
    DEFAULT_TRIALS,
    GeometricModel,
    LeakageReport,
    SweepDiagnostics,
    geometric_model,
    leakage_cell,
    leakage_sweep,
    sweep_diagnostics,
)
from .oracle import (
    check_failure_probability,
    detection_oracle,
    oracle_table,
    per_check_detection,
    resource_kind_for,
)
from .reports import dumps_csv, dumps_json, write_csv, write_json
from .stats import (
    ChiSquareResult,
    independence,
    interval_coverage,
    uniformity,
    wilson_interval,
)
from .trials import map_trials
from .pads import (
    IsolationReport,
    PadUniformityReport,
    message_pairs,
    pad_uniformity_test,
    student_isolation_test,
)
