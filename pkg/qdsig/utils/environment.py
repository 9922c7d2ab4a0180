# qdsig/utils/environment.py
import platform
from typing import Any, Dict

import numpy as np
import psutil
import pydantic

from qdsig.core.config import settings


def environment_stamp() -> Dict[str, Any]:
    """Machine description for reports; holds no clocks or load figures"""
    memory = psutil.virtual_memory()
    return {
        "app": settings.APP_NAME,
        "schema_version": settings.SCHEMA_VERSION,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "pydantic": pydantic.VERSION,
        "platform": platform.system(),
        "machine": platform.machine(),
        "cpu_count": psutil.cpu_count(logical=True),
        "memory_gb": round(memory.total / (1024 ** 3), 1),
    }
