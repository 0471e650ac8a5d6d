"""Batch execution on a bounded worker pool and table emission."""

import asyncio
import csv
import io
import json
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from agentstr.logger import get_logger

from .command_handler import CommandHandler, JobSpec, ResultEnvelope
from .constants import DEFAULT_WORKERS
from .exceptions import ParseError

logger = get_logger(__name__)

FIXED_COLUMNS = ["job", "command", "status"]


def json_default(value: Any) -> Any:
    """Convert numpy scalars and arrays for ``json.dumps``."""
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def dumps(payload: Any) -> str:
    """Canonical JSON: sorted keys, fixed indentation."""
    return json.dumps(payload, indent=2, sort_keys=True, default=json_default)


@dataclass
class BatchRow:
    """Outcome of one batch job: an envelope or the error that stopped it."""

    index: int
    spec: JobSpec
    envelope: Optional[ResultEnvelope] = None
    error: Optional[ValueError] = None

    @property
    def status(self) -> str:
        if self.error is not None:
            return f"ERR:{type(self.error).__name__}"
        return "ok" if self.envelope.passed else "failed"

    def scalar_fields(self) -> Dict[str, Any]:
        if self.envelope is None:
            return {}
        return {
            k: v for k, v in self.envelope.result.items()
            if isinstance(v, (bool, int, float, str, np.integer))
        }

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"job": self.index, "command": self.spec.key, "status": self.status}
        if self.envelope is not None:
            data["envelope"] = self.envelope.to_json()
        if self.error is not None:
            data["error"] = {"message": str(self.error), "witness": getattr(self.error, "witness", None)}
        return data


class JobRunner:
    """Runs a batch of jobs with at most ``workers`` in flight."""

    def __init__(self, handler: CommandHandler, workers: int = DEFAULT_WORKERS, timing: bool = False):
        """Initialize job runner.

        Args:
            handler: Command handler executing each job.
            workers: Maximum number of concurrently running jobs.
            timing: Record wall time in each envelope.
        """
        if workers < 1:
            raise ValueError(f"workers must be positive, got {workers}")
        self.handler = handler
        self.workers = workers
        self.timing = timing
        logger.info(f"Job runner initialized with {workers} workers")

    async def _run_one(self, semaphore: asyncio.Semaphore, index: int, spec: JobSpec) -> BatchRow:
        async with semaphore:
            try:
                envelope = await asyncio.to_thread(self.handler.run, spec, self.timing)
                return BatchRow(index, spec, envelope=envelope)
            except ValueError as e:
                logger.warning(f"Job {index} ({spec.key}) failed: {type(e).__name__}: {e}")
                return BatchRow(index, spec, error=e)

    async def run(self, specs: Sequence[JobSpec]) -> List[BatchRow]:
        """Run every job; rows come back in input order."""
        semaphore = asyncio.Semaphore(self.workers)
        rows = await asyncio.gather(*(self._run_one(semaphore, i, s) for i, s in enumerate(specs)))
        failed = sum(1 for r in rows if r.status != "ok")
        logger.info(f"Batch finished: {len(rows)} jobs, {failed} not ok")
        return list(rows)


def check_homogeneous(specs: Sequence[JobSpec]) -> None:
    """Raise ParseError unless every job runs the same command."""
    keys = sorted({s.key for s in specs})
    if len(keys) > 1:
        raise ParseError(f"batch mixes commands: {keys}")


def load_batch(data: Any) -> List[JobSpec]:
    """Jobs from a parsed batch file: a list, or an object with a "jobs" list."""
    if isinstance(data, dict):
        data = data.get("jobs")
    if not isinstance(data, list):
        raise ParseError("batch file must hold a list of jobs")
    specs = []
    for i, entry in enumerate(data):
        if not isinstance(entry, dict):
            raise ParseError(f"batch entry {i} is not an object")
        specs.append(JobSpec.build(**entry))
    check_homogeneous(specs)
    return specs


def emit_table(rows: Sequence[BatchRow], output_format: str = "tsv") -> str:
    """Render batch rows as TSV or JSON.

    TSV columns are job, command and status followed by the sorted union of
    the scalar result fields; failed rows keep their place with the error
    name in the status column.
    """
    if output_format == "json":
        return dumps([r.to_json() for r in rows])
    if output_format != "tsv":
        raise ParseError(f"unknown table format {output_format!r}")
    columns = sorted({k for r in rows for k in r.scalar_fields()} - set(FIXED_COLUMNS))
    buffer = io.StringIO()
    writer = csv.writer(buffer, delimiter="\t", lineterminator="\n")
    writer.writerow(FIXED_COLUMNS + columns)
    for r in rows:
        fields = r.scalar_fields()
        writer.writerow([r.index, r.spec.key, r.status] + [_cell(fields.get(c)) for c in columns])
    return buffer.getvalue()


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)
