"""
lmfem - locally modified second-order finite elements for interface problems
Main entry point
"""
import argparse
import importlib
import logging
import sys
import traceback

import config
from database import init_db, record_run
from experiments.options import build_config
from fem import AssumptionViolation

# Fix encoding for Windows console
if sys.platform == 'win32':
    import io
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8')

# Command modules, each exposing setup(subparsers)
COMMANDS = [
    'experiments.convergence',
    'experiments.sweep',
    'experiments.condition',
    'experiments.mesh',
]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ASSUMPTION = 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lmfem",
        description="Convergence, delta-sweep and conditioning experiments for the interface problems",
    )
    subparsers = parser.add_subparsers(dest="command_name", metavar="command")
    subparsers.required = True
    for name in COMMANDS:
        module = importlib.import_module(name)
        module.setup(subparsers)
    return parser


def _record(command, cfg, reports=(), status=config.STATUS_COMPLETED, message=None):
    try:
        record_run(command, cfg, reports, status, message)
    except Exception as e:
        print(f"⚠️ Could not record the run in the results database: {e}")


def main(argv=None) -> int:
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    # Validate configuration
    try:
        config.validate_config()
    except ValueError as e:
        print(f"\n❌ Configuration error:\n{e}\n")
        return EXIT_ERROR

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_ERROR
    command = args.command

    try:
        cfg = build_config(args, command.defaults)
    except ValueError as e:
        print(f"\n❌ {e}\n")
        return EXIT_ERROR

    if config.RESULTS_DB:
        try:
            init_db()
        except Exception as e:
            print(f"⚠️ Results database unavailable, continuing without it: {e}")

    try:
        reports = command.run(cfg)
    except AssumptionViolation as e:
        print(f"\n❌ {e}")
        print("   The interface is not resolved by the patch grid at this mesh size. Refine h and retry.\n")
        _record(command.name, cfg, status=config.STATUS_ASSUMPTION_VIOLATION, message=str(e))
        return EXIT_ASSUMPTION
    except Exception as e:
        print(f'\n{"=" * 50}')
        print(f'Error in command {command.name}:')
        print(f'{"=" * 50}')
        traceback.print_exception(type(e), e, e.__traceback__)
        print(f'{"=" * 50}\n')
        _record(command.name, cfg, status=config.STATUS_FAILED, message=str(e))
        return EXIT_ERROR

    _record(command.name, cfg, reports)
    print(f"\n✅ {command.name} finished ({len(reports)} rows)")
    return EXIT_OK


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\n👋 Interrupted\n")
        sys.exit(EXIT_ERROR)
