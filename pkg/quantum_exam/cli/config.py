import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

from .._compat import ExamModel, ValidationError, model_dump, model_load, validator
from ..adversary import AttackConfig, AttackConfigError, AttackKind
from ..core import check_qubit_budget
from ..encoders import jsonable_encoder
from ..protocol import ExamPolicy, parties
from ..settings import ERRORS_URL, QUBIT_CAP


class ConfigError(ValueError):
    """Raised when a scenario config is invalid; ``field`` names the culprit."""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"Invalid value for {field!r}: {reason}. Docs: {ERRORS_URL}#E7")


class ProtocolFamily(str, Enum):
    ABSOLUTE = "absolute"
    DIRECT = "direct"

    def __str__(self):
        return self.value


class Phase(str, Enum):
    GIVE = "give"
    COLLECT = "collect"
    SHARE_PSI = "share_psi"
    SHARE_PHI = "share_phi"
    FULL_EXAM = "full_exam"

    def __str__(self):
        return self.value


SHARING_PHASES = frozenset({Phase.SHARE_PSI, Phase.SHARE_PHI})


class ScenarioConfig(ExamModel):
    """One experiment: which protocol runs, against which attack, how often.

    Serialized as a flat JSON document; ``attack_params`` holds the attack's
    own parameters (alpha, beta, rounds, tap_rate, targets, intercept_mask,
    impersonate).
    """

    protocol: ProtocolFamily = ProtocolFamily.ABSOLUTE
    phase: Phase = Phase.FULL_EXAM
    students: int = 3
    problem_len: int = 16
    solution_len: int = 16
    control_rate: float = 0.5
    check_fraction: float = 0.25
    attack: AttackKind = AttackKind.NONE
    attack_params: Dict[str, Any] = {}
    seed: int = 0
    trials: int = 1
    out: str = "out"
    workers: int = 1
    error_threshold: float = 0.0
    max_restarts: int = 3
    direct_max_restarts: int = 0

    @validator("phase", pre=True)
    def parse_phase(cls, value):
        if isinstance(value, str):
            return value.strip().lower().replace("-", "_")
        return value

    @validator("attack", pre=True)
    def parse_attack(cls, value):
        return AttackKind.parse(value)

    @validator("students")
    def check_students(cls, value):
        if value < 1:
            raise ValueError("an exam needs at least one student")
        return value

    @validator("problem_len", "solution_len", "trials", "workers")
    def check_positive(cls, value):
        if value < 1:
            raise ValueError("must be at least 1")
        return value

    @validator("max_restarts", "direct_max_restarts")
    def check_non_negative(cls, value):
        if value < 0:
            raise ValueError("must not be negative")
        return value

    @validator("control_rate")
    def check_control_rate(cls, value):
        if not 0.0 <= value < 1.0:
            raise ValueError("the control rate must lie in [0, 1)")
        return value

    @validator("check_fraction")
    def check_fraction_range(cls, value):
        if not 0.0 < value < 1.0:
            raise ValueError("the check fraction must lie in (0, 1)")
        return value

    @validator("error_threshold")
    def check_threshold(cls, value):
        if not 0.0 <= value < 1.0:
            raise ValueError("the error threshold must lie in [0, 1)")
        return value

    def attack_config(self) -> AttackConfig:
        try:
            return AttackConfig(kind=self.attack, **self.attack_params)
        except (ValidationError, AttackConfigError, TypeError) as e:
            raise ConfigError("attack_params", _first_reason(e)) from e

    def policy(self) -> ExamPolicy:
        return ExamPolicy(
            error_threshold=self.error_threshold,
            check_fraction=self.check_fraction,
            max_restarts=self.max_restarts,
            direct_max_restarts=self.direct_max_restarts,
        )

    def qubits_needed(self) -> int:
        return self.students + 1 + self.attack_config().extra_qubits(self.students)

    @property
    def out_dir(self) -> Path:
        return Path(self.out)


def _first_reason(error: Exception) -> str:
    if isinstance(error, ValidationError):
        first = error.errors()[0]
        return first.get("msg", str(error))
    return str(error)


def _validation_field(error: ValidationError) -> str:
    loc = error.errors()[0].get("loc") or ("config",)
    return ".".join(str(part) for part in loc)


def validate_config(config: ScenarioConfig) -> ScenarioConfig:
    """Checks that span several fields; raises QubitBudgetError when the
    register would not fit the qubit cap."""
    if config.protocol is ProtocolFamily.DIRECT and config.phase in SHARING_PHASES:
        raise ConfigError(
            "phase", f"the direct protocols have no separate {config.phase} phase"
        )
    attack = config.attack_config()
    if attack.impersonate is not None:
        if attack.impersonate not in parties(config.students):
            raise ConfigError(
                "attack_params",
                f"cannot impersonate {attack.impersonate!r} among {config.students} students",
            )
    if attack.intercept_mask is not None and len(attack.intercept_mask) != config.students:
        raise ConfigError(
            "attack_params", f"intercept_mask needs {config.students} bits"
        )
    if attack.targets is not None:
        try:
            attack.target_bobs(config.students)
        except AttackConfigError as e:
            raise ConfigError("attack_params", str(e)) from e
    check_qubit_budget(config.qubits_needed(), QUBIT_CAP)
    return config


def parse_config(data: Dict[str, Any]) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("config", "expected a JSON object")
    try:
        config = model_load(ScenarioConfig, data)
    except ValidationError as e:
        raise ConfigError(_validation_field(e), _first_reason(e)) from e
    return validate_config(config)


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"{path} is not valid JSON ({e.msg})") from e
    return parse_config(data)


def parse_attack_params(pairs: Iterable[str]) -> Dict[str, str]:
    """``K=V`` command-line pairs as a dict; later pairs win."""
    params = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError("attack_param", f"expected K=V, got {pair!r}")
        params[key.strip()] = value.strip()
    return params


def apply_overrides(
    config: Optional[ScenarioConfig], overrides: Dict[str, Any]
) -> ScenarioConfig:
    """A new config with every non-None override applied on top of ``config``."""
    data = dump_config(config) if config is not None else {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "attack_params":
            data["attack_params"] = dict(data.get("attack_params", {}), **value)
        else:
            data[key] = value
    return parse_config(data)


def dump_config(config: ScenarioConfig) -> Dict[str, Any]:
    return jsonable_encoder(model_dump(config))


def dumps_config(config: ScenarioConfig) -> str:
    return json.dumps(dump_config(config), indent=2, sort_keys=False) + "\n"
