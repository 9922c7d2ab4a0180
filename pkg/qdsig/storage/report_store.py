# qdsig/storage/report_store.py
import csv
import io
import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import aiofiles

from qdsig.core.exceptions import ReportIOError
from qdsig.models.schemas import ExperimentReport

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "strategy", "n_msg", "w", "c_rate", "m", "t", "c_thresh", "target_delta",
    "trials", "successes", "rate", "ci_low", "ci_high", "bound", "passed", "runtime_ms",
]


def report_json(report: ExperimentReport) -> str:
    """Canonical JSON text; identical for identical (plan, seed)"""
    return json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True)


def report_csv(report: ExperimentReport, runtimes_ms: Optional[Sequence[float]] = None) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for index, cell in enumerate(report.cells):
        p = cell.params
        runtime = runtimes_ms[index] if runtimes_ms and index < len(runtimes_ms) else ""
        writer.writerow([
            cell.strategy, p["n_msg"], p["w"], p["c_rate"], p["m"], p["t"], p["c_thresh"],
            p["target_delta"], cell.trials, cell.successes, f"{cell.rate:.8f}",
            f"{cell.wilson_low:.8f}", f"{cell.wilson_high:.8f}",
            "" if cell.analytic_bound is None else f"{cell.analytic_bound:.8f}",
            int(cell.passed), f"{runtime:.1f}" if runtime != "" else "",
        ])
    return buffer.getvalue()


class ReportStore:
    """Persists experiment reports as JSON plus a CSV summary"""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)

    def paths(self, name: str) -> Tuple[Path, Path]:
        return self.out_dir / f"{name}.json", self.out_dir / f"{name}.csv"

    async def save(self, report: ExperimentReport, name: str,
                   runtimes_ms: Optional[List[float]] = None) -> Tuple[Path, Path]:
        json_path, csv_path = self.paths(name)
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            async with aiofiles.open(json_path, 'w') as f:
                await f.write(report_json(report))
            async with aiofiles.open(csv_path, 'w') as f:
                await f.write(report_csv(report, runtimes_ms))
        except OSError as e:
            logger.error(f"Report write failed in {self.out_dir}: {e}")
            raise ReportIOError(f"Cannot write report to {self.out_dir}: {e}",
                                path=str(self.out_dir)) from e
        logger.info(f"Saved report {json_path} and summary {csv_path}")
        return json_path, csv_path

    async def load(self, name: str) -> ExperimentReport:
        json_path, _ = self.paths(name)
        try:
            async with aiofiles.open(json_path, 'r') as f:
                content = await f.read()
        except OSError as e:
            raise ReportIOError(f"Cannot read report {json_path}: {e}", path=str(json_path)) from e
        return ExperimentReport.model_validate(json.loads(content))
