import pytest

from quantum_exam.adversary import AttackConfig, Eavesdropper
from quantum_exam.cli.config import parse_config
from quantum_exam.protocol import ExamSession
from quantum_exam.util import make_rng


TEST_SEED = 20240611


py_test_mark_slow = pytest.mark.slow


@pytest.fixture
def rng():
    return make_rng(TEST_SEED)


@pytest.fixture
def session(rng):
    return ExamSession(students=3, rng=rng)


@pytest.fixture
def make_session():
    """Build a session for ``students`` with Eve running ``attack``."""

    def _make(students=2, seed=TEST_SEED, policy=None, **attack):
        rng = make_rng(seed)
        config = AttackConfig(**attack) if attack else AttackConfig()
        eve = Eavesdropper(config, students) if config.active else None
        return ExamSession(students, rng, adversary=eve, policy=policy)

    return _make


@pytest.fixture
def scenario(tmp_path):
    def _scenario(**fields):
        fields.setdefault("out", str(tmp_path / "out"))
        return parse_config(fields)

    return _scenario
