#!/usr/bin/env python3
"""Smoke check: load the configuration and run a few small jobs end to end."""

import asyncio
import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.command_handler import CommandHandler, JobSpec
from src.config_manager import ConfigManager
from src.job_runner import JobRunner, emit_table

SMOKE_JOBS = [
    {"command": "group", "verb": "dual", "args": {"group": "2,4"}},
    {"command": "quad", "verb": "show", "args": {"form": "ev:2"}},
    {"command": "orth", "verb": "split", "args": {"n": 1, "p": 3}},
    {"command": "cohomology", "verb": "compute", "args": {"group": "2", "degree": 3}},
    {"command": "center", "verb": "double", "args": {"group": "3", "tau": "carry"}},
    {"command": "clifford", "verb": "pin", "args": {"n": 1, "p": 3}},
]


def check_config() -> ConfigManager:
    """Load config/toolkit.yaml and print the effective caps."""
    print("🔍 Checking configuration...")
    config = ConfigManager()
    print(f"  ✓ Automorphism cap: {config.get_automorphism_cap()}")
    print(f"  ✓ Subgroup cap: {config.get_subgroup_cap()}")
    print(f"  ✓ Matrix entry cap: {config.get_matrix_cap()}")
    print(f"  ✓ Workers: {config.get_workers()}")
    return config


async def run_jobs(config: ConfigManager) -> bool:
    """Run each smoke job as its own batch and print the table rows."""
    print("\n🧮 Running smoke jobs...")
    runner = JobRunner(CommandHandler(config), config.get_workers())
    ok = True
    for job in SMOKE_JOBS:
        rows = await runner.run([JobSpec.build(**job)])
        row = rows[0]
        marker = "✓" if row.status == "ok" else "❌"
        print(f"  {marker} {row.spec.key}: {row.status}")
        if row.status != "ok":
            print(emit_table(rows, "json"))
            ok = False
    return ok


async def main():
    """Run all checks."""
    print("=" * 60)
    print("Metric Group Toolkit - Smoke Check")
    print("=" * 60)
    print()

    try:
        config = check_config()
    except Exception as e:
        print(f"  ❌ Error: {e}")
        return 1
    jobs_ok = await run_jobs(config)

    print("\n" + "=" * 60)
    if jobs_ok:
        print("✅ All checks passed.")
        return 0
    print("❌ Some jobs failed. See the envelopes above.")
    return 1


if __name__ == "__main__":
    exit_code = asyncio.run(main())
    sys.exit(exit_code)
