# qdsig/core/config.py
import os
from pathlib import Path
from typing import Optional
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Simulator configuration with environment variable support"""

    # Application settings
    APP_NAME: str = "Arbitrated Quantum Signature Simulator"
    DEBUG: bool = os.getenv("DEBUG", "false").lower() == "true"
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = "qdsig.log"

    # File paths
    BASE_DIR: Path = Path(__file__).parent.parent.parent
    DATA_DIR: Path = BASE_DIR / "data"
    PLANS_DIR: Path = DATA_DIR / "plans"
    REPORTS_DIR: Path = DATA_DIR / "reports"
    TRANSCRIPTS_DIR: Path = DATA_DIR / "transcripts"

    # Statevector limits
    MAX_QUBITS: int = 20
    TOLERANCE: float = 1e-10

    # Fingerprint code settings
    FINGERPRINT_FORM: str = "register"  # register | phase
    DEFAULT_W: int = 8
    DEFAULT_C_RATE: int = 4
    DEFAULT_TARGET_DELTA: float = 0.75
    CODE_SEARCH_ATTEMPTS: int = 20000
    MAX_TABLE_W: int = 12

    # Stabilizer family
    CODE_FAMILY_KEY_BITS: int = 8

    # Classical key material
    KEY_RESERVE_BITS: int = 64
    LENGTH_PREFIX_BITS: int = 16

    # Verification settings
    DEFAULT_C_THRESH: float = 0.0
    SWAP_REPETITIONS: int = 1

    # Experiment harness
    NUM_WORKERS: int = 4
    MAX_GRID_CELLS: int = 64
    TRIAL_CHUNK_SIZE: int = 250
    SCHEMA_VERSION: str = "1.0"

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "ignore"


settings = Settings()

# Create directories if they don't exist
for dir_path in [
    settings.PLANS_DIR,
    settings.REPORTS_DIR,
    settings.TRANSCRIPTS_DIR,
]:
    dir_path.mkdir(parents=True, exist_ok=True)
