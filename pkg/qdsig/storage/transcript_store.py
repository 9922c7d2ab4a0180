# qdsig/storage/transcript_store.py
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import aiofiles

from qdsig.core.exceptions import ReportIOError
from qdsig.models.messages import SessionTranscript

logger = logging.getLogger(__name__)


def summary_path_for(path: Path) -> Path:
    """Sidecar holding decisions and key bookkeeping next to a transcript"""
    return path.with_name(path.stem + ".summary.json")


class TranscriptStore:
    """Writes session transcripts as JSON lines, one message per line"""

    async def write(self, transcript: SessionTranscript, path: Path,
                    summary: Optional[Dict[str, Any]] = None) -> Tuple[Path, Optional[Path]]:
        path = Path(path)
        lines = [json.dumps(message.to_dict(), sort_keys=True) for message in transcript.messages]
        sidecar = summary_path_for(path) if summary is not None else None
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            async with aiofiles.open(path, 'w') as f:
                await f.write("\n".join(lines) + "\n")
            if sidecar is not None:
                async with aiofiles.open(sidecar, 'w') as f:
                    await f.write(json.dumps(summary, indent=2, sort_keys=True, default=str))
        except OSError as e:
            logger.error(f"Transcript write failed for {path}: {e}")
            raise ReportIOError(f"Cannot write transcript to {path}: {e}", path=str(path)) from e

        logger.info(f"Wrote {len(lines)} messages to {path}")
        return path, sidecar

    async def read(self, path: Path) -> List[Dict[str, Any]]:
        path = Path(path)
        try:
            async with aiofiles.open(path, 'r') as f:
                content = await f.read()
        except OSError as e:
            logger.error(f"Transcript read failed for {path}: {e}")
            raise ReportIOError(f"Cannot read transcript {path}: {e}", path=str(path)) from e

        records = []
        for number, line in enumerate(content.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise ReportIOError(f"Line {number} of {path} is not JSON: {e}", path=str(path)) from e
        return records
