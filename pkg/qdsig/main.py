# qdsig/main.py
import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import List, Optional

from qdsig.core.config import settings
from qdsig.core.exceptions import PlanValidationError, ReportIOError
from qdsig.services.experiment_runner import ExperimentRunner
from qdsig.services.protocol import replay_transcript, run_session
from qdsig.services.selftest import run_selftest
from qdsig.storage.plan_store import load_plan, load_session_config
from qdsig.storage.report_store import ReportStore
from qdsig.storage.transcript_store import TranscriptStore

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ASSERTION = 2
EXIT_IO = 3


def configure_logging(level: Optional[str] = None):
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if settings.LOG_FILE:
        handlers.append(logging.FileHandler(settings.LOG_FILE))
    logging.basicConfig(
        level=getattr(logging, (level or settings.LOG_LEVEL).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
    )


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with EXIT_USAGE"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def cmd_run(plan_path: Path, seed: Optional[int], out_dir: Path,
            workers: Optional[int] = None) -> int:
    try:
        plan = load_plan(plan_path)
    except PlanValidationError as e:
        logger.error(e.message)
        print(f"invalid plan: {e.message}", file=sys.stderr)
        return EXIT_USAGE

    runner = ExperimentRunner(num_workers=workers)
    try:
        result = runner.run(plan, seed)
    finally:
        runner.shutdown()

    try:
        json_path, csv_path = asyncio.run(
            ReportStore(out_dir).save(result.report, plan.report_name, result.runtimes_ms))
    except ReportIOError as e:
        print(f"I/O error: {e.message}", file=sys.stderr)
        return EXIT_IO

    for cell in result.report.cells:
        status = "ok" if cell.passed else "FAILED"
        print(f"[{status}] {cell.strategy} {cell.params} rate={cell.rate:.6f} "
              f"bound={cell.analytic_bound} ({cell.assertion})")
    print(f"report: {json_path}\nsummary: {csv_path}")
    return EXIT_OK if result.all_passed else EXIT_ASSERTION


def cmd_selftest(quick: bool = False) -> int:
    results = run_selftest(quick=quick)
    for suite in results:
        print(suite.line())
    return EXIT_OK if all(s.passed for s in results) else EXIT_ASSERTION


def cmd_transcript(config_path: Path, out_path: Path, check_replay: bool = False) -> int:
    try:
        config = load_session_config(config_path)
    except PlanValidationError as e:
        print(f"invalid config: {e.message}", file=sys.stderr)
        return EXIT_USAGE

    session = run_session(config)
    store = TranscriptStore()
    try:
        path, sidecar = asyncio.run(store.write(session.transcript, out_path, session.summary()))
        records = asyncio.run(store.read(path)) if check_replay else None
    except ReportIOError as e:
        print(f"I/O error: {e.message}", file=sys.stderr)
        return EXIT_IO

    print(f"verdict: {session.verdict.reason.value} accepted={session.verdict.accepted}")
    print(f"transcript: {path} ({len(session.transcript)} messages)\nsummary: {sidecar}")
    if records is not None:
        ok = replay_transcript(config, records)
        print(f"replay: {'match' if ok else 'MISMATCH'}")
        if not ok:
            return EXIT_ASSERTION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(prog="qdsig", description=settings.APP_NAME)
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=UsageParser)

    run = sub.add_parser("run", help="Run an experiment plan and write JSON + CSV reports")
    run.add_argument("--plan", type=Path, required=True)
    run.add_argument("--seed", type=int, default=None, help="Override the plan master_seed")
    run.add_argument("--out", type=Path, default=settings.REPORTS_DIR)
    run.add_argument("--workers", type=int, default=None,
                     help="Worker threads (default NUM_WORKERS)")

    selftest = sub.add_parser("selftest", help="Run the invariant battery")
    selftest.add_argument("--quick", action="store_true", help="Reduced trial counts")

    transcript = sub.add_parser("transcript", help="Run one honest session and write its transcript")
    transcript.add_argument("--config", type=Path, required=True)
    transcript.add_argument("--out", type=Path, required=True)
    transcript.add_argument("--check-replay", action="store_true",
                            help="Re-run the session and compare with the written transcript")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    if args.command == "run":
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            print("--seed must be an unsigned 64-bit integer", file=sys.stderr)
            return EXIT_USAGE
        if args.workers is not None and args.workers < 1:
            print("--workers must be at least 1", file=sys.stderr)
            return EXIT_USAGE
        return cmd_run(args.plan, args.seed, args.out, args.workers)
    if args.command == "selftest":
        return cmd_selftest(args.quick)
    return cmd_transcript(args.config, args.out, args.check_replay)


if __name__ == "__main__":
    sys.exit(main())
