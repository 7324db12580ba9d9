import argparse
import os
import sys
from typing import List, Optional

import utils
from cli import SUBCOMMANDS, CLIHandler, RunManifest
from database import RunStore
from errors import LatwaveError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='latwave', allow_abbrev=False,
        description='latwave - numerical laboratory for dispersive decay of lattice wave equations.')
    parser.add_argument('--out', default=None, help='output directory (default: current directory)')
    parser.add_argument('--threads', type=int, default=None, help='worker threads; 1 is bitwise deterministic')
    parser.add_argument('--config', default=None, help='file of `key = value` defaults')
    parser.add_argument('--seed', type=int, default=None)
    parser.add_argument('--force', action='store_true', default=None, help='lift the memory guard')
    parser.add_argument('--replay', default=None, metavar='MANIFEST', help='re-run a recorded manifest')
    parser.add_argument('--db', default=None, help='run registry path (default: LATWAVE_DB or ~/latwave.db)')
    parser.add_argument('--no-db', dest='no_db', action='store_true', help='do not record the run')
    parser.add_argument('-v', '--verbose', action='store_true')
    parser.add_argument('-q', '--quiet', action='store_true')
    parser.add_argument('subcommand', nargs='?', choices=SUBCOMMANDS)
    parser.add_argument('args', nargs=argparse.REMAINDER)
    return parser


def _resolve(flag, config: dict, key: str, default, convert=str):
    """Flag beats config file beats built-in default."""
    if flag is not None:
        return flag
    if key in config:
        return convert(config[key])
    return default


def _as_bool(text: str) -> bool:
    return text.strip().lower() in ('1', 'true', 'yes', 'on')


def run(argv: Optional[List[str]] = None, seed_override: Optional[int] = None) -> int:
    """Parse argv, run one subcommand and return the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        options = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    utils.configure_logging(1 if options.verbose else -1 if options.quiet else 0)

    if options.replay:
        try:
            manifest = RunManifest.load(options.replay)
        except LatwaveError as e:
            print(utils.format_error(f"Error: {e}"))
            return e.exit_code
        print(utils.format_heading(f"Replaying {manifest.subcommand} run from {manifest.started}"))
        return run(manifest.argv, seed_override=manifest.seed)
    if options.subcommand is None:
        parser.print_usage()
        return 2

    try:
        config = utils.load_config(options.config) if options.config else {}
    except LatwaveError as e:
        print(utils.format_error(f"Error: {e}"))
        return e.exit_code
    out_dir = _resolve(options.out, config, 'out', '.')
    threads = _resolve(options.threads, config, 'threads', None, int)
    seed = _resolve(options.seed, config, 'seed', 0, int)
    if seed_override is not None:
        seed = seed_override
    if os.environ.get('LATWAVE_SEED'):
        seed = int(os.environ['LATWAVE_SEED'])
    force = _resolve(options.force, config, 'force', False, _as_bool)
    os.makedirs(out_dir, exist_ok=True)

    store = None if options.no_db else RunStore(options.db)
    handler = CLIHandler(out_dir, threads, seed, force, config, store)
    return handler.execute(options.subcommand, options.args, argv)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
