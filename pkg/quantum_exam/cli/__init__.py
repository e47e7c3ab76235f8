from .config import (
    ConfigError,
    Phase,
    ProtocolFamily,
    ScenarioConfig,
    apply_overrides,
    dump_config,
    dumps_config,
    load_config,
    parse_attack_params,
    parse_config,
    validate_config,
)
from .replay import ReplayIssue, ReplayVerdict, replay, verify_transcript
from .runner import RunReport, TrialSummary, estimate_rows, run_scenario, run_trial
