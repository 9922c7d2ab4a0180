# qdsig/models/schemas.py
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import List, Optional, Dict, Any, Literal

from qdsig.core.config import settings

STRATEGIES = (
    "honest",
    "substitute_state",
    "forge_partial_key",
    "tamper_signature",
    "dispute_repudiation",
    "dispute_fabrication",
)

Strategy = Literal[
    "honest",
    "substitute_state",
    "forge_partial_key",
    "tamper_signature",
    "dispute_repudiation",
    "dispute_fabrication",
]

CODE_BLOCK_QUBITS = 5


class SessionConfig(BaseModel):
    """Parameters of one protocol session"""
    n_msg: int = Field(default=1, ge=1)
    w: int = Field(default=settings.DEFAULT_W, ge=1, le=16)
    c_rate: int = Field(default=settings.DEFAULT_C_RATE, ge=2)
    target_delta: float = Field(default=settings.DEFAULT_TARGET_DELTA, gt=0.0, lt=1.0)
    c_thresh: float = Field(default=settings.DEFAULT_C_THRESH, ge=0.0, lt=1.0)
    seq_num: int = Field(default=1, ge=0, lt=2 ** 32)
    master_seed: int = Field(default=0, ge=0, lt=2 ** 64)
    code_seed: Optional[int] = Field(default=None, ge=0, lt=2 ** 64)
    swap_repetitions: int = Field(default=settings.SWAP_REPETITIONS, ge=1)
    fingerprint_form: Literal["register", "phase"] = settings.FINGERPRINT_FORM
    key_reserve_bits: int = Field(default=settings.KEY_RESERVE_BITS, ge=0)

    @model_validator(mode="after")
    def check_qubit_budget(self):
        if CODE_BLOCK_QUBITS * self.n_msg > settings.MAX_QUBITS:
            raise ValueError(
                f"n_msg={self.n_msg} needs {CODE_BLOCK_QUBITS * self.n_msg} physical qubits, "
                f"limit is {settings.MAX_QUBITS}"
            )
        return self

    @property
    def m(self) -> int:
        return self.c_rate * self.w

    @property
    def num_blocks(self) -> int:
        return 2 * self.n_msg

    @property
    def syndrome_bits(self) -> int:
        return 4 * self.n_msg

    @property
    def s_used_bits(self) -> int:
        """Leading syndrome bits that mask x when deriving X"""
        return min(self.syndrome_bits, 2 * self.n_msg)

    @property
    def max_failed_blocks(self) -> float:
        return self.c_thresh * self.num_blocks

    @property
    def effective_code_seed(self) -> int:
        return self.master_seed if self.code_seed is None else self.code_seed


class PlanGrid(BaseModel):
    n_msg: List[int] = Field(default_factory=lambda: [1], min_length=1)
    w: List[int] = Field(default_factory=lambda: [settings.DEFAULT_W], min_length=1)
    c_rate: List[int] = Field(default_factory=lambda: [settings.DEFAULT_C_RATE], min_length=1)
    t: List[int] = Field(default_factory=lambda: [0], min_length=1)
    c_thresh: List[float] = Field(default_factory=lambda: [settings.DEFAULT_C_THRESH], min_length=1)
    target_delta: List[float] = Field(default_factory=lambda: [settings.DEFAULT_TARGET_DELTA],
                                      min_length=1)

    @field_validator("t")
    @classmethod
    def t_nonnegative(cls, values: List[int]) -> List[int]:
        if any(v < 0 for v in values):
            raise ValueError("t values must be nonnegative")
        return values


class CellSpec(BaseModel):
    """One fully specified grid cell"""
    index: int
    strategy: Strategy
    n_msg: int
    w: int
    c_rate: int
    t: int = 0
    c_thresh: float
    target_delta: float
    trials: int

    def params(self) -> Dict[str, Any]:
        return {
            "n_msg": self.n_msg,
            "w": self.w,
            "c_rate": self.c_rate,
            "m": self.c_rate * self.w,
            "t": self.t,
            "c_thresh": self.c_thresh,
            "target_delta": self.target_delta,
        }

    def session_config(self, master_seed: int, code_seed: int) -> SessionConfig:
        return SessionConfig(
            n_msg=self.n_msg,
            w=self.w,
            c_rate=self.c_rate,
            target_delta=self.target_delta,
            c_thresh=self.c_thresh,
            seq_num=self.index + 1,
            master_seed=master_seed,
            code_seed=code_seed,
        )


class ExperimentPlan(BaseModel):
    schema_version: str = settings.SCHEMA_VERSION
    name: str = "experiment"
    strategies: List[Strategy] = Field(..., min_length=1)
    grid: PlanGrid = Field(default_factory=PlanGrid)
    trials: int = Field(default=100, ge=1)
    trials_by_strategy: Dict[str, int] = Field(default_factory=dict)
    master_seed: int = Field(default=0, ge=0, lt=2 ** 64)
    report_name: str = "report"
    check_assertions: bool = True

    @field_validator("schema_version")
    @classmethod
    def known_schema(cls, value: str) -> str:
        if value.split(".")[0] != settings.SCHEMA_VERSION.split(".")[0]:
            raise ValueError(f"Unsupported plan schema_version {value}")
        return value

    @field_validator("trials_by_strategy")
    @classmethod
    def known_strategies(cls, value: Dict[str, int]) -> Dict[str, int]:
        for name, trials in value.items():
            if name not in STRATEGIES:
                raise ValueError(f"Unknown strategy '{name}' in trials_by_strategy")
            if trials < 1:
                raise ValueError(f"trials for '{name}' must be at least 1")
        return value

    @model_validator(mode="after")
    def bounded_grid(self):
        count = len(self.cells())
        if count > settings.MAX_GRID_CELLS:
            raise ValueError(f"Plan expands to {count} cells, limit is {settings.MAX_GRID_CELLS}")
        for n_msg in self.grid.n_msg:
            if n_msg < 1 or CODE_BLOCK_QUBITS * n_msg > settings.MAX_QUBITS:
                raise ValueError(f"n_msg={n_msg} is outside the simulable range")
        return self

    def cells(self) -> List[CellSpec]:
        """Grid x strategies in a fixed order; t only varies for the forgery strategy"""
        cells: List[CellSpec] = []
        g = self.grid
        for strategy in self.strategies:
            t_values = g.t if strategy == "forge_partial_key" else [0]
            for n_msg in g.n_msg:
                for w in g.w:
                    for c_rate in g.c_rate:
                        for delta in g.target_delta:
                            for c_thresh in g.c_thresh:
                                for t in t_values:
                                    cells.append(CellSpec(
                                        index=len(cells),
                                        strategy=strategy,
                                        n_msg=n_msg,
                                        w=w,
                                        c_rate=c_rate,
                                        t=t,
                                        c_thresh=c_thresh,
                                        target_delta=delta,
                                        trials=self.trials_by_strategy.get(strategy, self.trials),
                                    ))
        return cells


class CellSummary(BaseModel):
    strategy: str
    params: Dict[str, Any]
    trials: int
    successes: int
    rate: float = Field(..., ge=0.0, le=1.0)
    wilson_low: float
    wilson_high: float
    analytic_bound: Optional[float] = None
    assertion: str = ""
    passed: bool = True
    null_control: bool = False
    boundary_case: bool = False
    swap_accept_rate: Optional[float] = None
    stages: Dict[str, int] = Field(default_factory=dict)
    delta: Optional[float] = None


class ExperimentReport(BaseModel):
    schema_version: str = settings.SCHEMA_VERSION
    plan: Dict[str, Any]
    master_seed: int
    cells: List[CellSummary]
    environment: Dict[str, Any]
    all_passed: bool
