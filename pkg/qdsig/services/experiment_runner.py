# qdsig/services/experiment_runner.py
import asyncio
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from qdsig.core.config import settings
from qdsig.core.dependencies import get_fingerprint_code
from qdsig.models.schemas import CellSpec, CellSummary, ExperimentPlan, ExperimentReport, SessionConfig
from qdsig.services.adversary import TrialResult, analytic_bound, simulate_trial
from qdsig.utils.environment import environment_stamp
from qdsig.utils.random_stream import derive_seed
from qdsig.utils.stats import binomial_sigma, wilson_interval, within_sigma

logger = logging.getLogger(__name__)

SIGMA_SLACK = 3.0


def code_seed_for(master_seed: int, w: int, c_rate: int, target_delta: float) -> int:
    """One fingerprint code per (w, c_rate, target_delta) within a plan"""
    return derive_seed(master_seed, f"code:{w}:{c_rate}:{target_delta!r}")


def cell_seed_for(master_seed: int, cell: CellSpec) -> int:
    return derive_seed(master_seed, f"cell:{cell.index}")


def trial_seed_for(cell_seed: int, trial_index: int) -> int:
    return derive_seed(cell_seed, f"trial:{trial_index}")


def check_assertion(strategy: str, successes: int, trials: int,
                    bound: Optional[float]) -> Tuple[str, bool]:
    """Acceptance rule per strategy at 3σ; returns (description, passed)"""
    rate = successes / trials
    if strategy in ("honest", "dispute_repudiation"):
        return "rate == 1", successes == trials
    if bound is None:
        return "reported only", True
    slack = SIGMA_SLACK * binomial_sigma(bound, trials) + 1e-12
    if strategy == "substitute_state":
        return f"|rate - {bound:.6g}| <= 3 sigma", within_sigma(rate, bound, trials, SIGMA_SLACK)
    if strategy == "forge_partial_key":
        return f"rate <= {bound:.6g} + 3 sigma", rate <= bound + slack
    if strategy == "dispute_fabrication":
        return f"rate >= {bound:.6g} - 3 sigma", rate >= bound - slack
    return "reported only", True


def reduce_cell(cell: CellSpec, config: SessionConfig, results: Dict[int, TrialResult],
                delta: float) -> CellSummary:
    """Deterministic reducer: consumes results in trial-index order"""
    ordered = [results[i] for i in sorted(results)]
    trials = len(ordered)
    successes = sum(1 for r in ordered if r.success)
    swap_accepts = sum(1 for r in ordered if r.swap_accepted)
    stages: Dict[str, int] = {}
    for r in ordered:
        if r.stage:
            stages[r.stage] = stages.get(r.stage, 0) + 1

    bound = analytic_bound(cell.strategy, config, cell.t, delta)
    assertion, passed = check_assertion(cell.strategy, successes, trials, bound)
    low, high = wilson_interval(successes, trials)
    return CellSummary(
        strategy=cell.strategy,
        params=cell.params(),
        trials=trials,
        successes=successes,
        rate=successes / trials,
        wilson_low=low,
        wilson_high=high,
        analytic_bound=bound,
        assertion=assertion,
        passed=passed,
        null_control=cell.strategy == "honest",
        boundary_case=any(r.boundary_case for r in ordered),
        swap_accept_rate=swap_accepts / trials,
        stages=dict(sorted(stages.items())),
        delta=delta,
    )


def _run_chunk(strategy: str, config: SessionConfig, cell_seed: int, t: int,
               start: int, stop: int) -> Dict[int, TrialResult]:
    results = {}
    for index in range(start, stop):
        trial_cfg = config.model_copy(update={"master_seed": trial_seed_for(cell_seed, index)})
        results[index] = simulate_trial(strategy, trial_cfg, t)
    return results


@dataclass
class RunResult:
    report: ExperimentReport
    runtimes_ms: List[float] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return self.report.all_passed


class ExperimentRunner:
    """Runs experiment plans: cells in order, trials chunked over a thread pool"""

    def __init__(self, num_workers: Optional[int] = None, chunk_size: Optional[int] = None):
        self.num_workers = num_workers or settings.NUM_WORKERS
        self.chunk_size = chunk_size or settings.TRIAL_CHUNK_SIZE
        self.executor = ThreadPoolExecutor(max_workers=self.num_workers)
        self.cells_run = 0
        self.trials_run = 0
        self.failed_cells = 0

    def _chunks(self, trials: int) -> List[Tuple[int, int]]:
        return [(start, min(start + self.chunk_size, trials))
                for start in range(0, trials, self.chunk_size)]

    async def run_cell(self, cell: CellSpec, master_seed: int) -> Tuple[CellSummary, float]:
        started = time.perf_counter()
        code_seed = code_seed_for(master_seed, cell.w, cell.c_rate, cell.target_delta)
        cell_seed = cell_seed_for(master_seed, cell)
        config = cell.session_config(master_seed=cell_seed, code_seed=code_seed)

        # build the shared code once before the workers ask for it
        code = get_fingerprint_code(cell.w, cell.c_rate, cell.target_delta, code_seed)

        loop = asyncio.get_event_loop()
        tasks = [
            loop.run_in_executor(self.executor, _run_chunk, cell.strategy, config,
                                 cell_seed, cell.t, start, stop)
            for start, stop in self._chunks(cell.trials)
        ]
        results: Dict[int, TrialResult] = {}
        for chunk in await asyncio.gather(*tasks):
            results.update(chunk)

        summary = reduce_cell(cell, config, results, code.delta)
        runtime_ms = (time.perf_counter() - started) * 1000.0
        self.cells_run += 1
        self.trials_run += summary.trials
        if not summary.passed:
            self.failed_cells += 1
            logger.warning(f"Cell {cell.index} ({cell.strategy}) failed: {summary.assertion}, "
                           f"rate={summary.rate:.6f}")
        else:
            logger.info(f"Cell {cell.index} ({cell.strategy}) rate={summary.rate:.6f} "
                        f"bound={summary.analytic_bound} in {runtime_ms:.0f} ms")
        return summary, runtime_ms

    async def run_plan(self, plan: ExperimentPlan, master_seed: Optional[int] = None) -> RunResult:
        seed = plan.master_seed if master_seed is None else master_seed
        cells = plan.cells()
        logger.info(f"Running plan '{plan.name}': {len(cells)} cells, seed={seed}, "
                    f"workers={self.num_workers}")

        summaries: List[CellSummary] = []
        runtimes: List[float] = []
        # cells run one after another; parallelism is inside a cell
        for cell in cells:
            summary, runtime_ms = await self.run_cell(cell, seed)
            summaries.append(summary)
            runtimes.append(runtime_ms)

        plan_echo = plan.model_dump(mode="json")
        plan_echo["master_seed"] = seed
        all_passed = all(s.passed for s in summaries) if plan.check_assertions else True
        report = ExperimentReport(
            plan=plan_echo,
            master_seed=seed,
            cells=summaries,
            environment=environment_stamp(),
            all_passed=all_passed,
        )
        return RunResult(report=report, runtimes_ms=runtimes)

    def run(self, plan: ExperimentPlan, master_seed: Optional[int] = None) -> RunResult:
        return asyncio.run(self.run_plan(plan, master_seed))

    def shutdown(self):
        self.executor.shutdown(wait=True)

    def get_statistics(self) -> Dict[str, Any]:
        """Get runner statistics"""
        return {
            'num_workers': self.num_workers,
            'chunk_size': self.chunk_size,
            'cells_run': self.cells_run,
            'trials_run': self.trials_run,
            'failed_cells': self.failed_cells,
        }
