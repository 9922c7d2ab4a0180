# qdsig/core/dependencies.py
import logging
from functools import lru_cache

from qdsig.models.codes import CodeSpec
from qdsig.models.schemas import SessionConfig
from qdsig.services.fingerprint import build_code
from qdsig.utils.random_stream import RandomStream

logger = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def get_fingerprint_code(w: int, c_rate: int, target_delta: float, code_seed: int) -> CodeSpec:
    """Shared fingerprint code per parameter set; building one is the slow step of a session"""
    logger.info(f"Building fingerprint code w={w} c_rate={c_rate} target_delta={target_delta}")
    return build_code(w, c_rate, target_delta, RandomStream(code_seed).spawn("fingerprint-code"))


def get_code_for(config: SessionConfig) -> CodeSpec:
    return get_fingerprint_code(config.w, config.c_rate, config.target_delta,
                                config.effective_code_seed)
