# qdsig/storage/plan_store.py
import json
import logging
from pathlib import Path
from typing import Type, TypeVar

from pydantic import BaseModel, ValidationError

from qdsig.core.exceptions import PlanValidationError
from qdsig.models.schemas import ExperimentPlan, SessionConfig

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


def _load(path: Path, model: Type[ModelT]) -> ModelT:
    path = Path(path)
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise PlanValidationError(f"File not found: {path}", field="path", value=str(path)) from e
    except json.JSONDecodeError as e:
        raise PlanValidationError(f"{path} is not valid JSON: {e}", field="path", value=str(path)) from e

    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first.get("loc", ())) or None
        raise PlanValidationError(f"Invalid {model.__name__} in {path}: {first.get('msg')}",
                                  field=location, value=first.get("input")) from e


def load_plan(path: Path) -> ExperimentPlan:
    plan = _load(path, ExperimentPlan)
    logger.info(f"Loaded plan '{plan.name}' with {len(plan.cells())} cells from {path}")
    return plan


def load_session_config(path: Path) -> SessionConfig:
    return _load(path, SessionConfig)
