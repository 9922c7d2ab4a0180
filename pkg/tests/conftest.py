# tests/conftest.py
import pytest

from qdsig.core.config import settings
from qdsig.core.dependencies import get_fingerprint_code
from qdsig.models.schemas import SessionConfig
from qdsig.utils.random_stream import RandomStream

SMALL_W = 4
SMALL_C_RATE = 4
SMALL_DELTA = 0.75
CODE_SEED = 99


@pytest.fixture(autouse=True)
def no_log_file(monkeypatch):
    monkeypatch.setattr(settings, "LOG_FILE", None)


@pytest.fixture
def rng():
    return RandomStream(12345)


@pytest.fixture
def small_code():
    return get_fingerprint_code(SMALL_W, SMALL_C_RATE, SMALL_DELTA, CODE_SEED)


@pytest.fixture
def small_config():
    return SessionConfig(n_msg=1, w=SMALL_W, c_rate=SMALL_C_RATE, target_delta=SMALL_DELTA,
                         master_seed=11, code_seed=CODE_SEED)


@pytest.fixture
def make_config():
    def _make(**overrides):
        values = dict(n_msg=1, w=SMALL_W, c_rate=SMALL_C_RATE, target_delta=SMALL_DELTA,
                      master_seed=11, code_seed=CODE_SEED)
        values.update(overrides)
        return SessionConfig(**values)
    return _make
