"""Command-line entry point for the metric group toolkit."""

import argparse
import asyncio
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from agentstr.logger import get_logger

from .command_handler import CommandHandler, JobSpec
from .config_manager import DEFAULT_CONFIG_PATH, ConfigManager
from .constants import (
    EXIT_CAP_EXCEEDED,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFICATION_FAILURE,
    TOOL_VERSION,
)
from .exceptions import CapExceeded, ParseError, ToolkitError, VerificationFailure
from .input_parser import read_json_file
from .job_runner import BatchRow, JobRunner, dumps, emit_table, load_batch

logger = get_logger(__name__)

# Flags forwarded to the job payload as-is.
PAYLOAD_FLAGS = [
    "group", "form", "coeff", "tau", "degree", "modulus", "subgroup",
    "correction", "n", "p", "diag", "samples",
]
PAYLOAD_SWITCHES = ["nondegenerate", "list"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metric-toolkit",
        description="Exact computations on finite metric groups, cohomology, centers and spinors.",
    )
    parser.add_argument("command", help="group | quad | orth | lagrangian | cohomology | center | "
                                        "clifford | scalars | batch")
    parser.add_argument("verb", nargs="?", help="subcommand, or the job file for batch")
    for flag in PAYLOAD_FLAGS:
        parser.add_argument(f"--{flag}", default=None)
    for flag in PAYLOAD_SWITCHES:
        parser.add_argument(f"--{flag}", action="store_true")
    parser.add_argument("--cap", type=int, default=None, help="override the command's enumeration cap")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--output", default=None, help="write output to this path instead of stdout")
    parser.add_argument("--config", default=DEFAULT_CONFIG_PATH)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--timing", action="store_true", help="record wall time (output is then not reproducible)")
    fmt = parser.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="output_format", action="store_const", const="json")
    fmt.add_argument("--tsv", dest="output_format", action="store_const", const="tsv")
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    return parser


def job_from_args(args: argparse.Namespace, config: ConfigManager) -> JobSpec:
    if not args.verb:
        raise ParseError(f"{args.command} needs a verb")
    payload: Dict[str, Any] = {
        flag: getattr(args, flag) for flag in PAYLOAD_FLAGS if getattr(args, flag) is not None
    }
    payload.update({flag: True for flag in PAYLOAD_SWITCHES if getattr(args, flag)})
    return JobSpec.build(
        command=args.command,
        verb=args.verb,
        args=payload,
        cap=args.cap,
        seed=args.seed if args.seed is not None else config.get_seed(),
        output=args.output,
    )


def write_output(text: str, path: Optional[str]) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if path:
        Path(path).write_text(text)
        logger.info(f"Wrote output to {path}")
    else:
        sys.stdout.write(text)


def error_envelope(spec: Optional[JobSpec], error: ToolkitError) -> Dict[str, Any]:
    return {
        "tool_version": TOOL_VERSION,
        "input": spec.canonical() if spec else None,
        "seed": spec.seed if spec else None,
        "status": "error",
        "error": {"type": type(error).__name__, "message": str(error), "witness": error.witness},
    }


def exit_code_for(error: Exception) -> int:
    if isinstance(error, CapExceeded):
        return EXIT_CAP_EXCEEDED
    if isinstance(error, ParseError):
        return EXIT_USAGE
    if isinstance(error, ToolkitError):
        return EXIT_VERIFICATION_FAILURE
    return EXIT_USAGE


async def run_batch(args: argparse.Namespace, config: ConfigManager, handler: CommandHandler,
                    output_format: str) -> int:
    if not args.verb:
        raise ParseError("batch needs a job file")
    specs = load_batch(read_json_file(args.verb))
    runner = JobRunner(handler, args.workers or config.get_workers(),
                       timing=args.timing or config.include_timing())
    rows: List[BatchRow] = await runner.run(specs)
    write_output(emit_table(rows, output_format), args.output)
    return EXIT_OK if all(r.status == "ok" for r in rows) else EXIT_VERIFICATION_FAILURE


async def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return the process exit code."""
    args = build_parser().parse_args(argv)
    spec: Optional[JobSpec] = None
    try:
        config = ConfigManager(args.config)
        handler = CommandHandler(config)
        output_format = args.output_format or config.get_output_format()
        if args.command == "batch":
            return await run_batch(args, config, handler, output_format)
        spec = job_from_args(args, config)
        timing = args.timing or config.include_timing()
        envelope = await asyncio.to_thread(handler.run, spec, timing)
        if output_format == "tsv":
            write_output(emit_table([BatchRow(0, spec, envelope=envelope)], "tsv"), spec.output)
        else:
            write_output(dumps(envelope.to_json()), spec.output)
        return EXIT_OK if envelope.passed else EXIT_VERIFICATION_FAILURE
    except ToolkitError as e:
        logger.error(f"{type(e).__name__}: {e}")
        if isinstance(e, VerificationFailure):
            write_output(dumps(error_envelope(spec, e)), spec.output if spec else args.output)
        return exit_code_for(e)
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_USAGE


def cli() -> None:
    """Console-script entry point."""
    try:
        sys.exit(asyncio.run(main()))
    except KeyboardInterrupt:
        logger.info("Interrupted")
        sys.exit(130)
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        sys.exit(1)


if __name__ == "__main__":
    cli()
